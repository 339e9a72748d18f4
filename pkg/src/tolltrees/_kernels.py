"""
Compiled kernels for bulk tree generation and built-in toll evaluation.

Each sample ``i`` of a run draws from its own splitmix64 stream seeded with
``stream_seed(seed, i)``, so a run's values do not depend on how samples are
split across threads.  Trees are stored as parent arrays in label order
(parent index < child index); reverse index order is a post-order.
"""

import math
import warnings

import numba as nb
import numpy as np

# older system TBB: numba falls back to another threading layer by itself
warnings.filterwarnings("ignore", message="The TBB threading layer")

MODEL_DARY = 0
MODEL_GPORT = 1
MODEL_RECURSIVE = 2

TOLL_CONSTANT = 0
TOLL_FRINGE_SIZE = 1
TOLL_OUTDEGREE = 2
TOLL_PATH_LENGTH = 3
TOLL_LOG_SIZE = 4
TOLL_LOG_ROOT_SUBTREES = 5
TOLL_LOG_BRANCH_SYMMETRY = 6
TOLL_ORBITS = 7

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_LEAF_HASH = np.uint64(0x2545F4914F6CDD1D)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def stream_seed(seed, index):
    """Initial splitmix64 state of sample ``index`` in a run seeded by ``seed``."""
    return _mix64(_mix64(np.uint64(seed)) + np.uint64(index) * _GOLDEN)


@nb.njit(inline="always")
def _next(state):
    state = state + _GOLDEN
    return state, _mix64(state)


@nb.njit(inline="always")
def _uniform(state):
    state, z = _next(state)
    return state, float(z >> _S11) * _INV53


@nb.njit(cache=True)
def _grow_dary(d, n, state, parent, slot, free):
    parent[0] = -1
    slot[0] = -1
    for s in range(d):
        free[s] = s
    nfree = d
    for v in range(1, n):
        state, u = _uniform(state)
        r = int(u * nfree)
        if r >= nfree:
            r = nfree - 1
        code = free[r]
        free[r] = free[nfree - 1]
        nfree -= 1
        parent[v] = code // d
        slot[v] = code % d
        for s in range(d):
            free[nfree] = v * d + s
            nfree += 1
    return state


@nb.njit(cache=True)
def _grow_gport(alpha, n, state, parent):
    parent[0] = -1
    for v in range(1, n):
        state, u = _uniform(state)
        x = u * (alpha * v + (v - 1))
        if x < alpha * v:
            p = int(x / alpha)
            if p >= v:
                p = v - 1
        else:
            e = int(x - alpha * v)
            if e > v - 2:
                e = v - 2
            p = parent[e + 1]
        parent[v] = p
    return state


@nb.njit(cache=True)
def _grow_recursive(n, state, parent):
    parent[0] = -1
    for v in range(1, n):
        state, u = _uniform(state)
        p = int(u * v)
        if p >= v:
            p = v - 1
        parent[v] = p
    return state


@nb.njit(cache=True)
def _children_csr(parent, n, start, kids):
    for v in range(n + 1):
        start[v] = 0
    for v in range(1, n):
        start[parent[v] + 1] += 1
    for v in range(n):
        start[v + 1] += start[v]
    fill = start[:n].copy()
    for v in range(1, n):
        p = parent[v]
        kids[fill[p]] = v
        fill[p] += 1


@nb.njit(cache=True)
def _toll_pass(parent, n, code, param, logfact, out):
    """Fill ``out[v]`` with the toll of the fringe subtree at ``v``.

    Returns the number of vertices violating s(T) >= |T| (only checked for
    the root-subtree toll).
    """
    size = np.ones(n, dtype=np.int64)
    for v in range(n - 1, 0, -1):
        size[parent[v]] += size[v]
    violations = 0
    if code == TOLL_CONSTANT:
        for v in range(n):
            out[v] = param
    elif code == TOLL_FRINGE_SIZE:
        k = int(param)
        for v in range(n):
            out[v] = 1.0 if size[v] == k else 0.0
    elif code == TOLL_OUTDEGREE:
        k = int(param)
        deg = np.zeros(n, dtype=np.int64)
        for v in range(1, n):
            deg[parent[v]] += 1
        for v in range(n):
            out[v] = 1.0 if deg[v] == k else 0.0
    elif code == TOLL_PATH_LENGTH:
        for v in range(n):
            out[v] = size[v] - 1.0
    elif code == TOLL_LOG_SIZE:
        for v in range(n):
            out[v] = math.log(size[v])
    elif code == TOLL_LOG_ROOT_SUBTREES:
        # acc[v] accumulates log s(v) = sum over children of log(1 + s(c))
        acc = np.zeros(n)
        for v in range(n - 1, -1, -1):
            ls = acc[v]
            f = math.log1p(math.exp(-ls))
            out[v] = f
            if ls < math.log(size[v]) - 1e-12 * (1.0 + ls):
                violations += 1
            if f > math.log1p(1.0 / size[v]) * (1.0 + 1e-12):
                violations += 1
            if v > 0:
                acc[parent[v]] += ls + f
    else:
        start = np.empty(n + 1, dtype=np.int64)
        kids = np.empty(max(n - 1, 1), dtype=np.int64)
        _children_csr(parent, n, start, kids)
        h = np.empty(n, dtype=np.uint64)
        orb = np.empty(n, dtype=np.int64)
        buf = np.empty(n, dtype=np.uint64)
        ibuf = np.empty(n, dtype=np.int64)
        for v in range(n - 1, -1, -1):
            lo = start[v]
            m = start[v + 1] - lo
            if m == 0:
                h[v] = _LEAF_HASH
                orb[v] = 1
                out[v] = 0.0 if code == TOLL_LOG_BRANCH_SYMMETRY else 1.0
                continue
            # insertion sort of child hashes, carrying a representative child
            for i in range(m):
                c = kids[lo + i]
                x = h[c]
                j = i
                while j > 0 and buf[j - 1] > x:
                    buf[j] = buf[j - 1]
                    ibuf[j] = ibuf[j - 1]
                    j -= 1
                buf[j] = x
                ibuf[j] = c
            acc = _mix64(np.uint64(m) + _LEAF_HASH)
            logr = 0.0
            orbits = 1
            branch_orbits = 0
            run = 1
            for i in range(m):
                acc = _mix64(acc ^ buf[i]) + _GOLDEN
                branch_orbits += orb[ibuf[i]]
                if i + 1 < m and buf[i + 1] == buf[i]:
                    run += 1
                else:
                    logr += logfact[run]
                    orbits += orb[ibuf[i]]
                    run = 1
            h[v] = acc
            orb[v] = orbits
            if code == TOLL_LOG_BRANCH_SYMMETRY:
                out[v] = logr
            else:
                out[v] = float(orbits - branch_orbits)
    return violations


@nb.njit(parallel=True, cache=True)
def simulate_block(model, d, alpha, n, toll, param, seed, first, count, F, froot, viol):
    """Generate ``count`` trees (sample indices ``first ..``) and evaluate a toll.

    Writes the additive functional to ``F``, the root toll to ``froot`` and the
    bound-violation count to ``viol``.
    """
    logfact = np.empty(n + 2)
    logfact[0] = 0.0
    for i in range(1, n + 2):
        logfact[i] = logfact[i - 1] + math.log(i)
    for i in nb.prange(count):
        state = stream_seed(seed, first + i)
        parent = np.empty(n, dtype=np.int64)
        if model == MODEL_DARY:
            slot = np.empty(n, dtype=np.int64)
            free = np.empty((d - 1) * n + 2, dtype=np.int64)
            _grow_dary(d, n, state, parent, slot, free)
        elif model == MODEL_GPORT:
            _grow_gport(alpha, n, state, parent)
        else:
            _grow_recursive(n, state, parent)
        tolls = np.empty(n)
        viol[i] = _toll_pass(parent, n, toll, param, logfact, tolls)
        total = 0.0
        for v in range(n):
            total += tolls[v]
        F[i] = total
        froot[i] = tolls[0]


@nb.njit(parallel=True, cache=True)
def sample_dary_codes(d, n, seed, first, count, out):
    """Encode ``count`` random d-ary trees as mixed-radix integers.

    Vertex ``v`` contributes digit ``parent*d + slot`` in base ``n*d``; the
    encoding is injective on trees of size ``n``.
    """
    base = n * d
    for i in nb.prange(count):
        state = stream_seed(seed, first + i)
        parent = np.empty(n, dtype=np.int64)
        slot = np.empty(n, dtype=np.int64)
        free = np.empty((d - 1) * n + 2, dtype=np.int64)
        _grow_dary(d, n, state, parent, slot, free)
        code = 0
        for v in range(n - 1, 0, -1):
            code = code * base + parent[v] * d + slot[v]
        out[i] = code


@nb.njit(cache=True)
def grow_parents(model, d, alpha, n, seed, index):
    """One tree as ``(parent, slot)`` arrays; slot is all ``-1`` for plane models."""
    state = stream_seed(seed, index)
    parent = np.empty(n, dtype=np.int64)
    slot = np.full(n, -1, dtype=np.int64)
    if model == MODEL_DARY:
        free = np.empty((d - 1) * n + 2, dtype=np.int64)
        _grow_dary(d, n, state, parent, slot, free)
    elif model == MODEL_GPORT:
        _grow_gport(alpha, n, state, parent)
    else:
        _grow_recursive(n, state, parent)
    return parent, slot
