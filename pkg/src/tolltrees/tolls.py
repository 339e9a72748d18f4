"""
Toll functions and additive tree functionals.

An additive functional satisfies ``F(T) = sum_j F(B_j) + f(T)`` over the root
branches ``B_j``; equivalently ``F(T)`` is the sum of ``f`` over all fringe
subtrees of ``T``.  Tolls receive fringe subtrees with standardized labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from . import _kernels as K
from .trees import (
    LABELED,
    SHAPE,
    ModelParams,
    ParameterError,
    canonical_form,
    enumerate_model,
    parse_tree,
    shape_ids,
)

__all__ = [
    "TollSpec",
    "FunctionalValue",
    "TollEvaluationError",
    "evaluate_additive",
    "fringe_sum",
    "builtin_toll",
    "custom_toll",
    "parse_toll",
    "TOLL_REGISTRY",
    "subtree_count_root",
    "log_root_subtree_counts",
    "log_subtree_toll",
    "branch_symmetry",
    "orbit_count",
    "orbit_toll",
    "automorphism_group_order",
    "relabel_invariance_audit",
    "audit_toll_metadata",
]


class TollEvaluationError(RuntimeError):
    """A toll evaluator raised; the message names the offending vertex."""


@dataclass(frozen=True)
class TollSpec:
    """A named toll function with metadata.

    ``bound`` is ``sup |f|`` when known.  ``kernel`` names the compiled
    evaluator used by the Monte Carlo engine, ``None`` for Python-only tolls.
    """

    name: str
    evaluator: Callable
    params: Mapping = field(default_factory=dict)
    bounded: bool = True
    bound: float | None = None
    size_only: bool = False
    support_cutoff: int | None = None
    kernel: tuple | None = None
    description: str = ""

    def __call__(self, tree) -> float:
        return self.evaluator(tree)

    def sup(self, d: int | None = None) -> float | None:
        """``sup |f|`` over trees (of arity ``d`` when given), if finite and known."""
        if self.name == "log-branch-symmetry" and d is not None and self.bound is None:
            return math.lgamma(d + 1)
        return self.bound if self.bounded else None

    def label(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={_fmt_param(v)}" for k, v in sorted(self.params.items()))
        return f"{self.name}:{args}"


def _fmt_param(v):
    if hasattr(v, "to_text"):
        return v.to_text()
    return str(v)


@dataclass
class FunctionalValue:
    value: float
    per_vertex: dict | None = None


def evaluate_additive(toll: TollSpec, tree, per_vertex: bool = False) -> FunctionalValue:
    """Evaluate ``F(T)`` by one post-order pass of ``F(v) = sum F(children) + f(fringe(v))``."""
    n = tree.n
    F = [0.0] * n
    contrib = {} if per_vertex else None
    for v in range(n - 1, -1, -1):
        try:
            f = float(toll(tree.fringe(v)))
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise TollEvaluationError(
                f"toll {toll.name!r} failed at vertex with label {tree.labels[v]}: {exc}"
            ) from exc
        F[v] = math.fsum([F[c] for c in tree.children(v)] + [f])
        if per_vertex:
            contrib[tree.labels[v]] = f
    return FunctionalValue(F[0], contrib)


def fringe_sum(toll: TollSpec, tree) -> float:
    """``sum_{S in fringe(T)} f(S)`` computed directly from the definition."""
    return math.fsum(float(toll(tree.fringe(v))) for v in range(tree.n))


# ---------------------------------------------------------------------------
# subtrees, symmetries and orbits


def subtree_count_root(tree) -> int:
    """Number of subtrees containing the root: ``s(T) = prod_j (1 + s(B_j))``."""
    s = [1] * tree.n
    for v in range(tree.n - 1, 0, -1):
        s[tree.parent[v]] *= 1 + s[v]
    return s[0]


def log_root_subtree_counts(tree) -> list:
    """``log s`` at every vertex, in log space (no big integers)."""
    ls = [0.0] * tree.n
    for v in range(tree.n - 1, 0, -1):
        x = ls[v]
        ls[tree.parent[v]] += x + math.log1p(math.exp(-x))
    return ls


_EXACT_SUBTREE_LIMIT = 600


def log_subtree_toll(tree) -> float:
    """``log(1 + 1/s(T))``; exact integers for small trees, log space beyond."""
    if tree.n <= _EXACT_SUBTREE_LIMIT:
        s = subtree_count_root(tree)
        return math.log1p(1.0 / s)
    return math.log1p(math.exp(-log_root_subtree_counts(tree)[0]))


def _branch_classes(tree, equivalence):
    if equivalence == SHAPE:
        ids = shape_ids(tree)
        return [ids[c] for c in tree.children(0)]
    if equivalence == LABELED:
        return [canonical_form(tree.fringe(c), LABELED) for c in tree.children(0)]
    raise ParameterError(f"unknown equivalence {equivalence!r}")


def branch_symmetry(tree, equivalence: str = SHAPE) -> int:
    """``R(T)``: product of ``multiplicity!`` over isomorphism classes of root branches."""
    counts = {}
    for key in _branch_classes(tree, equivalence):
        counts[key] = counts.get(key, 0) + 1
    return math.prod(math.factorial(m) for m in counts.values())


def orbit_count(tree) -> int:
    """Number of vertex orbits under automorphisms of the (unlabelled) tree.

    ``orbits(T) = 1 + sum`` of ``orbits`` over one representative per shape
    class of root branches.
    """
    ids = shape_ids(tree)
    orbits = [1] * tree.n
    for v in range(tree.n - 1, -1, -1):
        seen = {}
        for c in tree.children(v):
            seen.setdefault(ids[c], c)
        orbits[v] = 1 + sum(orbits[c] for c in seen.values())
    return orbits[0]


def orbit_toll(tree, branch_orbits=None) -> int:
    """``f(T) = orbits(T) - sum_j orbits(B_j)``."""
    if branch_orbits is None:
        branch_orbits = [orbit_count(b) for b in tree.branches()]
    return orbit_count(tree) - sum(branch_orbits)


def automorphism_group_order(tree) -> int:
    """``|Aut(T)| = prod_v R(fringe(v))`` (shape automorphisms fixing the root)."""
    ids = shape_ids(tree)
    out = 1
    for v in range(tree.n):
        counts = {}
        for c in tree.children(v):
            counts[ids[c]] = counts.get(ids[c], 0) + 1
        for m in counts.values():
            out *= math.factorial(m)
    return out


# ---------------------------------------------------------------------------
# the toll catalogue


def _constant(c):
    c = float(c)
    return TollSpec("constant", lambda t: c, {"c": c}, bound=abs(c), size_only=True,
                    support_cutoff=0 if c == 0 else None,
                    kernel=(K.TOLL_CONSTANT, c), description="f(T) = c")


def _leaf():
    return TollSpec("leaf", lambda t: 1.0 if t.n == 1 else 0.0, bound=1.0, size_only=True,
                    support_cutoff=1, kernel=(K.TOLL_FRINGE_SIZE, 1.0),
                    description="1 iff |T| = 1 (number of leaves)")


def _fringe_size(k):
    k = int(k)
    if k < 1:
        raise ParameterError("fringe-size needs k >= 1")
    return TollSpec("fringe-size", lambda t: 1.0 if t.n == k else 0.0, {"k": k}, bound=1.0,
                    size_only=True, support_cutoff=k, kernel=(K.TOLL_FRINGE_SIZE, float(k)),
                    description="1 iff |T| = k (fringe subtrees of size k)")


def _outdegree(k):
    k = int(k)
    if k < 0:
        raise ParameterError("outdegree needs k >= 0")
    return TollSpec("outdegree", lambda t: 1.0 if t.outdegree(0) == k else 0.0, {"k": k},
                    bound=1.0, kernel=(K.TOLL_OUTDEGREE, float(k)),
                    description="1 iff the root has outdegree k")


def _path_length():
    return TollSpec("path-length", lambda t: float(t.n - 1), bounded=False, size_only=True,
                    kernel=(K.TOLL_PATH_LENGTH, 0.0),
                    description="|T| - 1 (internal path length); unbounded")


def _shape():
    return TollSpec("shape", lambda t: math.log(t.n), bounded=False, size_only=True,
                    kernel=(K.TOLL_LOG_SIZE, 0.0),
                    description="log |T| (shape functional); unbounded")


def _occurrence(tree):
    if isinstance(tree, str):
        tree = parse_tree(tree)
    target = canonical_form(tree, LABELED)
    k = tree.n
    cls = type(tree)

    def f(t):
        return 1.0 if t.n == k and isinstance(t, cls) and canonical_form(t, LABELED) == target else 0.0

    return TollSpec("fringe-occurrence", f, {"tree": tree.standardized()}, bound=1.0,
                    support_cutoff=k, description="1 iff T equals the reference tree S")


def _log_root_subtrees():
    return TollSpec("log-root-subtrees", log_subtree_toll, bound=math.log(2.0),
                    kernel=(K.TOLL_LOG_ROOT_SUBTREES, 0.0),
                    description="log(1 + 1/s(T)), s = subtrees containing the root")


def _log_branch_symmetry(equivalence=SHAPE):
    equivalence = str(equivalence).lower()
    if equivalence not in (SHAPE, LABELED):
        raise ParameterError(f"unknown equivalence {equivalence!r}")
    params = {} if equivalence == SHAPE else {"equivalence": equivalence}
    kernel = (K.TOLL_LOG_BRANCH_SYMMETRY, 0.0) if equivalence == SHAPE else None
    return TollSpec("log-branch-symmetry",
                    lambda t: math.log(branch_symmetry(t, equivalence)), params,
                    bounded=False, kernel=kernel,
                    description="log R(T), R = symmetries of the root branches; "
                                "bounded by log d! on d-ary trees")


def _orbits():
    return TollSpec("orbits", lambda t: float(orbit_toll(t)), bounded=False,
                    kernel=(K.TOLL_ORBITS, 0.0),
                    description="orbits(T) - sum orbits(B_j) (number of orbits); unbounded")


TOLL_REGISTRY = {
    "leaf": (_leaf, {}),
    "outdegree": (_outdegree, {"k": "int >= 0"}),
    "path-length": (_path_length, {}),
    "shape": (_shape, {}),
    "fringe-size": (_fringe_size, {"k": "int >= 1"}),
    "fringe-occurrence": (_occurrence, {"tree": "tree in textual format"}),
    "log-root-subtrees": (_log_root_subtrees, {}),
    "log-branch-symmetry": (_log_branch_symmetry, {"equivalence": "shape|labeled (default shape)"}),
    "orbits": (_orbits, {}),
    "constant": (_constant, {"c": "real"}),
}


def builtin_toll(name: str, params: Mapping | None = None) -> TollSpec:
    """Look up a catalogue toll by name (``leaf``, ``fringe-size`` with ``k`` ...).

    Names are case-insensitive and ``_`` is accepted for ``-``.
    """
    key = name.strip().lower().replace("_", "-")
    if key == "zero":
        return _constant(0.0)
    if key not in TOLL_REGISTRY:
        raise ParameterError(f"unknown toll {name!r}; known: {', '.join(TOLL_REGISTRY)}")
    factory, schema = TOLL_REGISTRY[key]
    params = dict(params or {})
    unknown = set(params) - set(schema)
    if unknown:
        raise ParameterError(f"toll {key!r} does not take parameters {sorted(unknown)}")
    required = {"outdegree": "k", "fringe-size": "k", "fringe-occurrence": "tree", "constant": "c"}
    if key in required and required[key] not in params:
        raise ParameterError(f"toll {key!r} needs parameter {required[key]!r}")
    try:
        return factory(**params)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"bad parameters for toll {key!r}: {exc}") from exc


def custom_toll(name: str, fn: Callable, *, bounded: bool = True, bound: float | None = None,
                size_only: bool = False, support_cutoff: int | None = None) -> TollSpec:
    """Wrap a user function ``tree -> float`` (evaluated in Python only)."""
    return TollSpec(name, fn, bounded=bounded, bound=bound, size_only=size_only,
                    support_cutoff=support_cutoff, description="user-supplied")


def parse_toll(text: str) -> TollSpec:
    """Parse ``name`` or ``name:key=value,key=value`` (e.g. ``fringe-size:k=1``)."""
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in _split_params(rest):
            key, eq, value = item.partition("=")
            if not eq:
                raise ParameterError(f"toll parameter {item!r} is not key=value")
            params[key.strip()] = value.strip()
    return builtin_toll(name, params)


def _split_params(text):
    # commas inside tree literals (d-ary format) must not split
    depth, cur, out = 0, [], []
    for ch in text:
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


# ---------------------------------------------------------------------------
# audits


def _audit_trees(d, size_cutoff, model):
    model = ModelParams.dary(d) if model is None else ModelParams.parse(model)
    for n in range(1, size_cutoff + 1):
        yield from enumerate_model(model, n)


def relabel_invariance_audit(toll: TollSpec, size_cutoff: int = 5, d: int = 2,
                             model=None, shift: int = 10) -> dict:
    """Check that ``toll`` only sees relative label order.

    Every tree up to ``size_cutoff`` is evaluated as is and with all labels
    shifted by ``shift``; the first mismatch is reported as a witness.
    """
    checked = 0
    for tree in _audit_trees(d, size_cutoff, model):
        shifted = tree.relabeled([x + shift for x in tree.labels])
        a, b = float(toll(tree)), float(toll(shifted))
        checked += 1
        if not math.isclose(a, b, rel_tol=0, abs_tol=1e-12):
            return {"check": "relabel-invariance", "toll": toll.label(), "passed": False,
                    "checked": checked, "witness": tree.to_text(), "values": [a, b]}
    return {"check": "relabel-invariance", "toll": toll.label(), "passed": True,
            "checked": checked, "witness": None}


def audit_toll_metadata(toll: TollSpec, size_cutoff: int = 6, d: int = 2, model=None) -> dict:
    """Brute-force check of ``bound``, ``size_only`` and ``support_cutoff``."""
    problems = []
    by_size = {}
    sup = toll.sup(d if model is None else None)
    for tree in _audit_trees(d, size_cutoff, model):
        f = float(toll(tree))
        if sup is not None and abs(f) > sup + 1e-12:
            problems.append(f"|f| = {abs(f)} exceeds bound {sup} on {tree.to_text()}")
        if toll.support_cutoff is not None and tree.n > toll.support_cutoff and f != 0:
            problems.append(f"nonzero beyond support cutoff on {tree.to_text()}")
        if toll.size_only:
            first = by_size.setdefault(tree.n, f)
            if not math.isclose(first, f, abs_tol=1e-12):
                problems.append(f"not size-only at size {tree.n}")
    return {"check": "toll-metadata", "toll": toll.label(), "passed": not problems,
            "problems": problems[:10]}
