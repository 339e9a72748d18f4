"""
Increasing trees: data structures, growth processes, enumeration and exact
model probabilities.

Two concrete tree types share one storage layout.  Vertices are indexed
``0 .. n-1`` in increasing label order, so a parent always has a smaller index
than its children and iterating indices in reverse is a valid post-order.

* :class:`DAryIncreasingTree` -- every vertex owns ``d`` distinguishable slots.
* :class:`PlaneIncreasingTree` -- ordered children (recursive trees, PORTs and
  GPORTs).

Counts and weights are exact (``int`` / :class:`fractions.Fraction`).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "ParameterError",
    "EnumerationLimitError",
    "ModelParams",
    "Node",
    "DAryIncreasingTree",
    "PlaneIncreasingTree",
    "LABELED",
    "SHAPE",
    "grow_dary",
    "grow_gport",
    "grow_port",
    "grow_recursive",
    "grow",
    "enumerate_dary",
    "enumerate_plane",
    "enumerate_recursive",
    "enumerate_model",
    "enumeration_cutoff",
    "count_dary",
    "count_plane",
    "count_model",
    "gport_total_weight",
    "weight_port",
    "tree_probability",
    "canonical_form",
    "shape_ids",
    "fringe_subtrees",
    "parse_tree",
    "path_tree",
    "star_tree",
]

LABELED = "labeled"
SHAPE = "shape"

# enumeration memory guard: largest size whose tree count stays below this
ENUMERATION_BUDGET = 250_000


class ParameterError(ValueError):
    """Invalid model or tree-size parameter."""


class EnumerationLimitError(RuntimeError):
    """Requested enumeration exceeds the configured cutoff."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class ModelParams:
    """Random tree model: ``dary`` (with ``d``), ``recursive`` or ``gport`` (with ``alpha``).

    PORTs are GPORTs with ``alpha = 1``.
    """

    variant: str
    d: int | None = None
    alpha: Fraction | None = None

    def __post_init__(self):
        if self.variant == "dary":
            if self.d is None or int(self.d) != self.d or self.d < 2:
                raise ParameterError(f"d-ary model needs integer d >= 2, got {self.d!r}")
        elif self.variant == "gport":
            if self.alpha is None:
                raise ParameterError("gport model needs alpha")
            object.__setattr__(self, "alpha", _as_fraction(self.alpha))
            if self.alpha <= 0:
                raise ParameterError(f"alpha must be positive, got {self.alpha}")
        elif self.variant != "recursive":
            raise ParameterError(f"unknown model variant {self.variant!r}")

    @classmethod
    def dary(cls, d: int) -> "ModelParams":
        return cls("dary", d=d)

    @classmethod
    def gport(cls, alpha) -> "ModelParams":
        return cls("gport", alpha=alpha)

    @classmethod
    def port(cls) -> "ModelParams":
        return cls("gport", alpha=Fraction(1))

    @classmethod
    def recursive(cls) -> "ModelParams":
        return cls("recursive")

    @classmethod
    def parse(cls, text: str) -> "ModelParams":
        """Parse ``dary:2``, ``gport:1/2``, ``gport:alpha=2``, ``port`` or ``recursive``."""
        if isinstance(text, ModelParams):
            return text
        name, _, arg = text.strip().lower().partition(":")
        arg = arg.split("=", 1)[-1]
        if name in ("dary", "d-ary"):
            if not arg:
                raise ParameterError("dary model needs d, e.g. dary:2")
            return cls.dary(int(arg))
        if name == "gport":
            if not arg:
                raise ParameterError("gport model needs alpha, e.g. gport:1/2")
            return cls.gport(Fraction(arg))
        if name == "port":
            return cls.port()
        if name == "recursive":
            return cls.recursive()
        raise ParameterError(f"unknown model {text!r}")

    @property
    def is_plane(self) -> bool:
        return self.variant != "dary"

    def __str__(self) -> str:
        if self.variant == "dary":
            return f"dary:{self.d}"
        if self.variant == "gport":
            return f"gport:{self.alpha}"
        return "recursive"


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise ParameterError(f"tree size must be a positive integer, got {n!r}")
    return int(n)


def _check_d(d) -> int:
    if int(d) != d or d < 2:
        raise ParameterError(f"arity d must be an integer >= 2, got {d!r}")
    return int(d)


class Node(NamedTuple):
    label: int
    parent: int | None
    slot: int | None
    children: tuple


class _IncreasingTree:
    """Storage and traversal shared by both tree types."""

    __slots__ = ("labels", "parent", "_kids", "_sizes", "_hash")

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def n(self) -> int:
        return len(self.parent)

    def children(self, v: int) -> tuple:
        """Occupied children of ``v`` in slot order (d-ary) or plane order."""
        return self._kids[v]

    def outdegree(self, v: int = 0) -> int:
        return len(self._kids[v])

    def outdegrees(self) -> list:
        return [len(k) for k in self._kids]

    def subtree_sizes(self) -> list:
        if self._sizes is None:
            sizes = [1] * self.n
            for v in range(self.n - 1, 0, -1):
                sizes[self.parent[v]] += sizes[v]
            self._sizes = sizes
        return self._sizes

    def depths(self) -> list:
        depth = [0] * self.n
        for v in range(1, self.n):
            depth[v] = depth[self.parent[v]] + 1
        return depth

    def descendants(self, v: int) -> list:
        """``v`` and all its descendants, in index (label) order."""
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self._kids[u])
        out.sort()
        return out

    def branches(self) -> list:
        """Fringe subtrees rooted at the children of the root."""
        return [self.fringe(c) for c in self._kids[0]]

    def is_standard(self) -> bool:
        return self.labels == tuple(range(1, self.n + 1))

    def _check_increasing(self):
        n = len(self.parent)
        if n == 0:
            raise ParameterError("empty tree")
        if len(self.labels) != n:
            raise ParameterError("labels and parent arrays differ in length")
        if self.parent[0] != -1:
            raise ParameterError("vertex 0 must be the root")
        if len(set(self.labels)) != n:
            raise ParameterError("labels must be distinct")
        for v in range(1, n):
            p = self.parent[v]
            if not 0 <= p < v:
                raise ParameterError(f"vertex {v} has invalid parent {p}")
            if self.labels[p] >= self.labels[v]:
                raise ParameterError(
                    f"labels must increase along root paths ({self.labels[p]} -> {self.labels[v]})"
                )
        for v in range(n - 1):
            if self.labels[v] >= self.labels[v + 1]:
                raise ParameterError("vertices must be stored in increasing label order")

    def nodes(self) -> list:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()


class DAryIncreasingTree(_IncreasingTree):
    """A d-ary increasing tree with explicit child slots.

    Parameters
    ----------
    d : int
        Number of slots per vertex.
    parent : sequence of int
        ``parent[v]`` is the index of the parent of vertex ``v``; ``-1`` for the root.
    slot : sequence of int
        Slot of ``v`` in its parent, in ``[0, d)``; ``-1`` for the root.
    labels : sequence of int, optional
        Increasing labels, defaults to ``1..n``.
    """

    __slots__ = ("d", "slot", "_slots")

    def __init__(self, d, parent, slot, labels=None, *, validate=True):
        self.d = _check_d(d) if validate else d
        self.parent = tuple(parent)
        self.slot = tuple(slot)
        self.labels = tuple(labels) if labels is not None else tuple(range(1, len(self.parent) + 1))
        self._sizes = None
        self._hash = None
        table = [[-1] * self.d for _ in range(len(self.parent))]
        for v in range(1, len(self.parent)):
            p, s = self.parent[v], self.slot[v]
            if validate:
                if not 0 <= s < self.d:
                    raise ParameterError(f"slot {s} out of range for d={self.d}")
                if not 0 <= p < v:
                    raise ParameterError(f"vertex {v} has invalid parent {p}")
                if table[p][s] != -1:
                    raise ParameterError(f"slot {s} of vertex {p} used twice")
            table[p][s] = v
        self._slots = tuple(tuple(row) for row in table)
        self._kids = tuple(tuple(c for c in row if c != -1) for row in table)
        if validate:
            if len(self.slot) != len(self.parent):
                raise ParameterError("slot and parent arrays differ in length")
            self._check_increasing()

    def slots(self, v: int) -> tuple:
        """The ``d`` slots of ``v``: child index or ``None``."""
        return tuple(None if c == -1 else c for c in self._slots[v])

    def free_slots(self) -> list:
        """Free ``(vertex, slot)`` pairs in insertion order."""
        return [(v, s) for v in range(self.n) for s in range(self.d) if self._slots[v][s] == -1]

    def nodes(self) -> list:
        return [
            Node(self.labels[v], None if v == 0 else self.parent[v],
                 None if v == 0 else self.slot[v], self.slots(v))
            for v in range(self.n)
        ]

    def fringe(self, v: int) -> "DAryIncreasingTree":
        """Subtree induced by ``v`` and its descendants, relabelled ``1..k``."""
        verts = self.descendants(v)
        index = {u: i for i, u in enumerate(verts)}
        parent = [-1] + [index[self.parent[u]] for u in verts[1:]]
        slot = [-1] + [self.slot[u] for u in verts[1:]]
        return DAryIncreasingTree(self.d, parent, slot, validate=False)

    def standardized(self) -> "DAryIncreasingTree":
        if self.is_standard():
            return self
        return DAryIncreasingTree(self.d, self.parent, self.slot, validate=False)

    def relabeled(self, labels) -> "DAryIncreasingTree":
        return DAryIncreasingTree(self.d, self.parent, self.slot, labels)

    def with_child(self, v: int, s: int) -> "DAryIncreasingTree":
        """Attach a new maximal-label vertex in slot ``s`` of ``v``."""
        if self._slots[v][s] != -1:
            raise ParameterError(f"slot {s} of vertex {v} is occupied")
        return DAryIncreasingTree(
            self.d, self.parent + (v,), self.slot + (s,),
            self.labels + (self.labels[-1] + 1,), validate=False,
        )

    def to_text(self) -> str:
        """``label[0:child|_, 1:child|_, ...]`` listing all ``d`` slots."""
        out, stack = [], [0]
        while stack:
            item = stack.pop()
            if isinstance(item, str):
                out.append(item)
                continue
            out.append(f"{self.labels[item]}[")
            parts = []
            for s in range(self.d):
                c = self._slots[item][s]
                parts.append(f"{s}:")
                parts.append("_" if c == -1 else c)
                parts.append(", " if s < self.d - 1 else "]")
            stack.extend(reversed(parts))
        return "".join(out)

    def _key(self):
        return (self.d, self.labels, self.parent, self.slot)

    def __eq__(self, other):
        return isinstance(other, DAryIncreasingTree) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("dary",) + self._key())
        return self._hash


class PlaneIncreasingTree(_IncreasingTree):
    """An increasing tree with ordered children.

    Parameters
    ----------
    children : sequence of sequence of int
        ``children[v]`` lists the child indices of ``v`` in plane order.
    labels : sequence of int, optional
        Increasing labels, defaults to ``1..n``.
    """

    __slots__ = ()

    def __init__(self, children, labels=None, *, validate=True):
        self._kids = tuple(tuple(c) for c in children)
        n = len(self._kids)
        parent = [-1] * n
        for v, kids in enumerate(self._kids):
            for c in kids:
                if validate and (not 0 < c < n or parent[c] != -1):
                    raise ParameterError(f"vertex {c} has an invalid or repeated parent")
                parent[c] = v
        self.parent = tuple(parent)
        self.labels = tuple(labels) if labels is not None else tuple(range(1, n + 1))
        self._sizes = None
        self._hash = None
        if validate:
            if any(p == -1 for p in parent[1:]):
                raise ParameterError("every non-root vertex needs a parent")
            self._check_increasing()

    @classmethod
    def from_parents(cls, parent, labels=None) -> "PlaneIncreasingTree":
        """Children ordered by increasing label (the recursive-tree convention)."""
        kids = [[] for _ in parent]
        for v in range(1, len(parent)):
            kids[parent[v]].append(v)
        return cls(kids, labels)

    def nodes(self) -> list:
        return [
            Node(self.labels[v], None if v == 0 else self.parent[v], None, self._kids[v])
            for v in range(self.n)
        ]

    def fringe(self, v: int) -> "PlaneIncreasingTree":
        verts = self.descendants(v)
        index = {u: i for i, u in enumerate(verts)}
        kids = [tuple(index[c] for c in self._kids[u]) for u in verts]
        return PlaneIncreasingTree(kids, validate=False)

    def standardized(self) -> "PlaneIncreasingTree":
        if self.is_standard():
            return self
        return PlaneIncreasingTree(self._kids, validate=False)

    def relabeled(self, labels) -> "PlaneIncreasingTree":
        return PlaneIncreasingTree(self._kids, labels)

    def with_child(self, v: int, position: int) -> "PlaneIncreasingTree":
        """Attach a new maximal-label vertex as child of ``v`` in gap ``position``."""
        kids = list(self._kids)
        row = list(kids[v])
        if not 0 <= position <= len(row):
            raise ParameterError(f"gap {position} out of range for vertex {v}")
        row.insert(position, self.n)
        kids[v] = tuple(row)
        kids.append(())
        return PlaneIncreasingTree(kids, self.labels + (self.labels[-1] + 1,), validate=False)

    def has_label_ordered_children(self) -> bool:
        return all(list(k) == sorted(k) for k in self._kids)

    def to_text(self) -> str:
        """``label(child child ...)``."""
        out, stack = [], [0]
        while stack:
            item = stack.pop()
            if isinstance(item, str):
                out.append(item)
                continue
            out.append(f"{self.labels[item]}(")
            parts = []
            for i, c in enumerate(self._kids[item]):
                if i:
                    parts.append(" ")
                parts.append(c)
            parts.append(")")
            stack.extend(reversed(parts))
        return "".join(out)

    def _key(self):
        return (self.labels, self._kids)

    def __eq__(self, other):
        return isinstance(other, PlaneIncreasingTree) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("plane",) + self._key())
        return self._hash


# ---------------------------------------------------------------------------
# textual format

_TOKEN = re.compile(r"\s*(\d+|[\[\]\(\):,_])")


def _tokens(text: str) -> list:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParameterError(f"unexpected character {text[pos]!r} at offset {pos}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _reorder(labels, parent, extra):
    """Sort pre-order nodes into label order, remapping parents."""
    order = sorted(range(len(labels)), key=labels.__getitem__)
    index = {old: new for new, old in enumerate(order)}
    new_parent = [-1 if parent[o] == -1 else index[parent[o]] for o in order]
    return [labels[o] for o in order], new_parent, [extra[o] for o in order], index, order


def _parse_dary(toks) -> DAryIncreasingTree:
    labels, parent, slot = [], [], []
    stack = []  # open node indices
    width = None
    i, pending = 0, (-1, -1)

    def expect(tok):
        nonlocal i
        if i >= len(toks) or toks[i] != tok:
            got = toks[i] if i < len(toks) else "end of input"
            raise ParameterError(f"expected {tok!r}, got {got!r}")
        i += 1

    counts = []
    while True:
        # a node starts here
        if i >= len(toks) or not toks[i].isdigit():
            raise ParameterError("expected a node label")
        labels.append(int(toks[i]))
        parent.append(pending[0])
        slot.append(pending[1])
        i += 1
        expect("[")
        stack.append(len(labels) - 1)
        counts.append(0)
        # read slot entries until a child node opens or the stack empties
        while stack:
            if i < len(toks) and toks[i] == "]":
                i += 1
                v = stack.pop()
                k = counts[v]
                if width is None:
                    width = k
                elif k != width:
                    raise ParameterError("every node must list the same number of slots")
                if stack:
                    if i < len(toks) and toks[i] == ",":
                        i += 1
                continue
            v = stack[-1]
            if not (i < len(toks) and toks[i].isdigit() and int(toks[i]) == counts[v]):
                raise ParameterError(f"expected slot index {counts[v]}")
            i += 1
            expect(":")
            s = counts[v]
            counts[v] += 1
            if i < len(toks) and toks[i] == "_":
                i += 1
                if i < len(toks) and toks[i] == ",":
                    i += 1
                continue
            pending = (v, s)
            break
        if not stack:
            break
    if i != len(toks):
        raise ParameterError("trailing input after tree")
    labels, parent, slot, _, _ = _reorder(labels, parent, slot)
    return DAryIncreasingTree(width, parent, [-1] + slot[1:], labels)


def _parse_plane(toks) -> PlaneIncreasingTree:
    labels, parent = [], []
    stack = []
    i = 0
    while True:
        if i >= len(toks) or not toks[i].isdigit():
            raise ParameterError("expected a node label")
        labels.append(int(toks[i]))
        parent.append(stack[-1] if stack else -1)
        i += 1
        if i >= len(toks) or toks[i] != "(":
            raise ParameterError("expected '('")
        i += 1
        stack.append(len(labels) - 1)
        while stack and i < len(toks) and toks[i] == ")":
            stack.pop()
            i += 1
        if not stack:
            break
    if i != len(toks):
        raise ParameterError("trailing input after tree")
    # plane order = pre-order order of siblings
    kids_pre = [[] for _ in labels]
    for v in range(1, len(labels)):
        kids_pre[parent[v]].append(v)
    labels, parent, _, index, order = _reorder(labels, parent, [None] * len(labels))
    kids = [tuple(index[c] for c in kids_pre[o]) for o in order]
    return PlaneIncreasingTree(kids, labels)


def parse_tree(text: str):
    """Parse one tree in the textual format (d-ary or plane, auto-detected)."""
    toks = _tokens(text)
    if len(toks) < 2:
        raise ParameterError("empty tree text")
    if toks[1] == "[":
        return _parse_dary(toks)
    if toks[1] == "(":
        return _parse_plane(toks)
    raise ParameterError("unrecognised tree format")


def path_tree(n: int, d: int | None = None):
    """Path on ``n`` vertices (slot 0 everywhere for d-ary)."""
    n = _check_n(n)
    if d is None:
        return PlaneIncreasingTree.from_parents([-1] + list(range(n - 1)))
    return DAryIncreasingTree(d, [-1] + list(range(n - 1)), [-1] + [0] * (n - 1))


def star_tree(k: int, d: int | None = None):
    """Root with ``k`` leaf children (slots ``0..k-1`` for d-ary)."""
    if d is None:
        return PlaneIncreasingTree.from_parents([-1] + [0] * k)
    return DAryIncreasingTree(d, [-1] + [0] * k, [-1] + list(range(k)))


# ---------------------------------------------------------------------------
# growth processes


def grow_dary(d: int, n: int, rng: np.random.Generator) -> DAryIncreasingTree:
    """Grow a uniformly random d-ary increasing tree of size ``n``.

    Vertex ``k`` is attached to one of the ``(d-1)(k-2)+1`` free slots chosen
    uniformly; the free slots are kept in a flat array with swap-removal.
    """
    d, n = _check_d(d), _check_n(n)
    parent, slot = [-1], [-1]
    free = list(range(d))  # codes v*d + s
    u = rng.random(n - 1)
    for v in range(1, n):
        r = min(int(u[v - 1] * len(free)), len(free) - 1)
        code = free[r]
        free[r] = free[-1]
        free.pop()
        p, s = divmod(code, d)
        parent.append(p)
        slot.append(s)
        free.extend(range(v * d, v * d + d))
    return DAryIncreasingTree(d, parent, slot, validate=False)


def grow_gport(alpha, n: int, rng: np.random.Generator) -> PlaneIncreasingTree:
    """Grow a random GPORT: vertex ``k`` picks parent ``v`` with probability
    proportional to ``alpha + outdeg(v)`` and lands in a uniform gap among
    ``v``'s current children.
    """
    n = _check_n(n)
    a = float(alpha)
    if not a > 0:
        raise ParameterError(f"alpha must be positive, got {alpha!r}")
    kids = [[]]
    parent = [-1]
    for v in range(1, n):
        # v existing vertices, v - 1 edges
        x = rng.random() * (a * v + (v - 1))
        if x < a * v:
            p = min(int(x / a), v - 1)
        else:
            e = min(int(x - a * v), v - 2)
            p = parent[e + 1]
        gap = int(rng.integers(len(kids[p]) + 1))
        kids[p].insert(gap, v)
        kids.append([])
        parent.append(p)
    return PlaneIncreasingTree(kids, validate=False)


def grow_port(n: int, rng: np.random.Generator) -> PlaneIncreasingTree:
    return grow_gport(1, n, rng)


def grow_recursive(n: int, rng: np.random.Generator) -> PlaneIncreasingTree:
    """Uniform parent choice; the new vertex becomes the rightmost child."""
    n = _check_n(n)
    parent = [-1] + [int(rng.integers(v)) for v in range(1, n)]
    return PlaneIncreasingTree.from_parents(parent)


def grow(model: ModelParams, n: int, rng: np.random.Generator):
    model = ModelParams.parse(model)
    if model.variant == "dary":
        return grow_dary(model.d, n, rng)
    if model.variant == "gport":
        return grow_gport(model.alpha, n, rng)
    return grow_recursive(n, rng)


# ---------------------------------------------------------------------------
# counting and weights


def count_dary(d: int, n: int) -> int:
    """Number of d-ary increasing trees of size ``n``: prod_{j<n} ((d-1)j + 1)."""
    d, n = _check_d(d), _check_n(n)
    return math.prod((d - 1) * j + 1 for j in range(1, n))


def count_plane(n: int) -> int:
    """Number of PORTs of size ``n``: (2n-3)!!."""
    n = _check_n(n)
    return math.prod(2 * j - 1 for j in range(1, n))


def gport_total_weight(alpha, n: int) -> Fraction:
    """Total weight of all PORTs of size ``n``: prod_{j<n} ((alpha+1)j - 1)."""
    a = _as_fraction(alpha)
    n = _check_n(n)
    out = Fraction(1)
    for j in range(1, n):
        out *= (a + 1) * j - 1
    return out


def _gbinom(alpha: Fraction, j: int) -> Fraction:
    # binomial(alpha + j - 1, j)
    out = Fraction(1)
    for i in range(j):
        out *= alpha + i
    return out / math.factorial(j)


def weight_port(alpha, tree: PlaneIncreasingTree) -> Fraction:
    """w(T) = prod_j binomial(alpha + j - 1, j)^{N_j(T)}."""
    a = _as_fraction(alpha)
    out = Fraction(1)
    for c in tree.outdegrees():
        if c:
            out *= _gbinom(a, c)
    return out


def count_model(model: ModelParams, n: int) -> int:
    model = ModelParams.parse(model)
    if model.variant == "dary":
        return count_dary(model.d, n)
    if model.variant == "gport":
        return count_plane(n)
    return math.factorial(_check_n(n) - 1)


def tree_probability(model: ModelParams, tree) -> Fraction:
    """Exact probability that the model's growth process produces ``tree``.

    The insertion history of an increasing tree is read off its labels, so the
    probability is a product of per-step attachment probabilities.
    """
    model = ModelParams.parse(model)
    n = tree.n
    if model.variant == "dary":
        if not isinstance(tree, DAryIncreasingTree) or tree.d != model.d:
            return Fraction(0)
        return Fraction(1, count_dary(model.d, n))
    if not isinstance(tree, PlaneIncreasingTree):
        return Fraction(0)
    if model.variant == "recursive":
        if not tree.has_label_ordered_children():
            return Fraction(0)
        return Fraction(1, math.factorial(n - 1))
    a = model.alpha
    prob = Fraction(1)
    outdeg = [0] * n
    for v in range(1, n):
        p = tree.parent[v]
        c = outdeg[p]
        prob *= (a + c) / ((a * v + (v - 1)) * (c + 1))
        outdeg[p] = c + 1
    return prob


# ---------------------------------------------------------------------------
# enumeration


def enumeration_cutoff(model: ModelParams) -> int:
    """Largest size whose full enumeration stays within the memory budget."""
    model = ModelParams.parse(model)
    n = 1
    while count_model(model, n + 1) <= ENUMERATION_BUDGET:
        n += 1
    return n


def _check_cutoff(model, n, cutoff):
    limit = enumeration_cutoff(model) if cutoff is None else cutoff
    if n > limit:
        raise EnumerationLimitError(
            f"enumerating size {n} for {model} exceeds cutoff {limit} "
            f"({count_model(model, n)} trees)"
        )


def enumerate_dary(d: int, n: int, cutoff: int | None = None) -> Iterator[DAryIncreasingTree]:
    """Every d-ary increasing tree of size ``n``, each exactly once.

    Trees of size ``k`` are extended by inserting label ``k + 1`` into each
    free slot, free slots taken in ``(vertex, slot)`` order.  The output order
    is lexicographic in that sequence of insertion choices.
    """
    d, n = _check_d(d), _check_n(n)
    _check_cutoff(ModelParams.dary(d), n, cutoff)

    def rec(tree):
        if tree.n == n:
            yield tree
            return
        for v, s in tree.free_slots():
            yield from rec(tree.with_child(v, s))

    yield from rec(DAryIncreasingTree(d, [-1], [-1], validate=False))


def enumerate_plane(n: int, cutoff: int | None = None) -> Iterator[PlaneIncreasingTree]:
    """Every PORT of size ``n`` (insertion into each gap of each vertex)."""
    n = _check_n(n)
    _check_cutoff(ModelParams.port(), n, cutoff)

    def rec(tree):
        if tree.n == n:
            yield tree
            return
        for v in range(tree.n):
            for g in range(tree.outdegree(v) + 1):
                yield from rec(tree.with_child(v, g))

    yield from rec(PlaneIncreasingTree([()], validate=False))


def enumerate_recursive(n: int, cutoff: int | None = None) -> Iterator[PlaneIncreasingTree]:
    """Every recursive tree of size ``n`` in the rightmost-child representation."""
    n = _check_n(n)
    _check_cutoff(ModelParams.recursive(), n, cutoff)

    def rec(tree):
        if tree.n == n:
            yield tree
            return
        for v in range(tree.n):
            yield from rec(tree.with_child(v, tree.outdegree(v)))

    yield from rec(PlaneIncreasingTree([()], validate=False))


def enumerate_model(model: ModelParams, n: int, cutoff: int | None = None):
    model = ModelParams.parse(model)
    if model.variant == "dary":
        return enumerate_dary(model.d, n, cutoff)
    if model.variant == "gport":
        return enumerate_plane(n, cutoff)
    return enumerate_recursive(n, cutoff)


# ---------------------------------------------------------------------------
# canonical forms and fringe subtrees


def shape_ids(tree, table: dict | None = None) -> list:
    """Integer shape class of every vertex's fringe subtree.

    Two vertices get the same id iff their fringe subtrees are isomorphic as
    unlabelled rooted trees with unordered children.  Ids are only comparable
    between trees that were processed with the same ``table``.
    """
    table = {} if table is None else table
    ids = [0] * tree.n
    for v in range(tree.n - 1, -1, -1):
        key = tuple(sorted(ids[c] for c in tree.children(v)))
        ids[v] = table.setdefault(key, len(table))
    return ids


def _shape_bytes(tree, root: int = 0) -> bytes:
    forms = {}
    for v in range(tree.n - 1, root - 1, -1):
        forms[v] = b"(" + b"".join(sorted(forms.pop(c) for c in tree.children(v))) + b")"
    return forms[root]


def canonical_form(tree, equivalence: str = LABELED) -> bytes:
    """Canonical bytes of ``tree`` under ``LABELED`` or ``SHAPE`` equivalence.

    ``LABELED`` keeps slots (d-ary), child order (plane) and the relative order
    of labels.  ``SHAPE`` drops labels, slots and order: each vertex becomes
    ``(`` + sorted child forms + ``)``.
    """
    if equivalence == LABELED:
        std = tree.standardized()
        prefix = f"D{tree.d}|" if isinstance(tree, DAryIncreasingTree) else "P|"
        return (prefix + std.to_text()).encode()
    if equivalence == SHAPE:
        return _shape_bytes(tree)
    raise ParameterError(f"unknown equivalence {equivalence!r}")


def tree_from_canonical(form: bytes):
    """Inverse of ``canonical_form(..., LABELED)``."""
    text = form.decode()
    _, _, body = text.partition("|")
    return parse_tree(body)


def fringe_subtrees(tree) -> list:
    """One fringe subtree per vertex (index order), labels standardized."""
    return [tree.fringe(v) for v in range(tree.n)]
