"""Random leafless trees truncated at a finite depth.

Process 1 cuts each edge of the binary tree with probability 1/3 and prunes
vertices with finitely many descendants. Process 2 builds the tree top down,
giving each vertex one of {left, right, both} children with probability 1/3.
Conditioned on being non-empty, the two agree in distribution; this module
computes both sides exactly plus an independent bracketing oracle.

Vertices are binary strings, the root is "". Vertex v_i of the tree code is
the i-th string in length-then-lexicographic order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ..measures import Explicit
from .survival import LIMIT, Q_KEEP, survival_prob


@dataclass(frozen=True)
class TreeShape:
    """Vertices of a leafless tree up to depth k (empty for the empty tree)."""

    depth: int
    nodes: frozenset

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if not nodes:
            return
        if "" not in nodes:
            raise ValueError("non-empty shapes contain the root")
        for v in nodes:
            if len(v) > self.depth:
                raise ValueError(f"vertex {v!r} deeper than {self.depth}")
            if v and v[:-1] not in nodes:
                raise ValueError(f"vertex {v!r} has no parent")
            if len(v) < self.depth and v + "0" not in nodes and v + "1" not in nodes:
                raise ValueError(f"vertex {v!r} is a leaf above the horizon")

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    @property
    def internal(self) -> int:
        """Number of vertices above the horizon."""
        return sum(1 for v in self.nodes if len(v) < self.depth)

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes, key=lambda v: (len(v), v))

    def label(self) -> str:
        if self.is_empty:
            return "empty"
        return "{" + ",".join(v or "ε" for v in self.sorted_nodes()) + "}"

    def code(self, n: int) -> str:
        """First n bits of the tree code (bit i = v_i present)."""
        return "".join("1" if vertex(i) in self.nodes else "0" for i in range(n))

    @classmethod
    def empty(cls, depth: int) -> "TreeShape":
        return cls(depth, frozenset())


def vertex(i: int) -> str:
    """The i-th binary string in length-lexicographic order."""
    if i < 0:
        raise ValueError("index must be non-negative")
    d = (i + 1).bit_length() - 1
    return format(i + 1 - (1 << d), f"0{d}b") if d else ""


def vertex_index(v: str) -> int:
    return (1 << len(v)) - 1 + (int(v, 2) if v else 0)


def all_shapes(k: int) -> list[TreeShape]:
    """Every non-empty leafless shape of depth k."""
    return list(tree_dist_direct(k))


def tree_dist_direct(k: int) -> dict[TreeShape, Fraction]:
    """Process 2: each vertex above depth k picks left, right or both."""
    if k < 1:
        raise ValueError("k must be at least 1")
    third = Fraction(1, 3)
    # dist over node sets of the subtree rooted at "", built level by level
    dist: dict[frozenset, Fraction] = {frozenset([""]): Fraction(1)}
    for level in range(k):
        nxt: dict[frozenset, Fraction] = {}
        for nodes, w in dist.items():
            frontier = [v for v in nodes if len(v) == level]
            options = []
            for v in frontier:
                options.append(((v + "0",), (v + "1",), (v + "0", v + "1")))
            for pick in itertools.product(*options):
                new = nodes.union(itertools.chain.from_iterable(pick))
                nxt[new] = nxt.get(new, Fraction(0)) + w * third ** len(frontier)
        dist = nxt
    return {TreeShape(k, nodes): w for nodes, w in dist.items()}


def tree_dist_percolation(k: int, conditioned: bool) -> dict[TreeShape, Fraction]:
    """Process 1, closed form.

    A child edge is "kept and leads to an infinite subtree" with probability
    q·p_∞ = (2/3)(3/4) = 1/2, independently for the two children. Given that a
    vertex survives, each of its three child patterns therefore has
    probability (1/4)/(3/4) = 1/3, so a shape with m vertices above the
    horizon has probability (3/4)(1/3)^m, and the empty tree 1/4.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    good = Q_KEEP * LIMIT  # 1/2
    pattern = good * good / LIMIT  # both children; one child alone is the same
    assert pattern == good * (1 - good) / LIMIT
    out: dict[TreeShape, Fraction] = {}
    for shape in tree_dist_direct(k):
        w = pattern ** shape.internal
        out[shape] = w if conditioned else LIMIT * w
    if not conditioned:
        out[TreeShape.empty(k)] = 1 - LIMIT
    return out


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


def _edge_configs(k: int):
    edges = [v for d in range(1, k + 1) for v in map("".join, itertools.product("01", repeat=d))]
    for kept_bits in itertools.product((False, True), repeat=len(edges)):
        kept = {e for e, b in zip(edges, kept_bits) if b}
        yield len(kept), len(edges) - len(kept), kept


def tree_dist_percolation_bracket(k: int, horizon: int, conditioned: bool = False) -> dict[TreeShape, Interval]:
    """Rigorous bounds from a finite horizon, without using the closed form.

    Edges down to depth k are enumerated. A depth-k vertex reached from the
    root carries an infinite subtree with probability s, where
    3/4 <= s <= p_{horizon-k}: the lower end because p_n >= 3/4 for all n
    (the recurrence map is increasing and fixes 3/4), the upper end because
    surviving forever implies surviving to the horizon. Each term
    s^a (1-s)^b is bounded by evaluating its two factors at opposite ends.

    With ``conditioned`` the bounds are divided by the bracket for the
    non-empty event.
    """
    if horizon < k:
        raise ValueError("horizon must be at least k")
    s_lo, s_hi = LIMIT, survival_prob(horizon - k)
    keep, cut = Q_KEEP, 1 - Q_KEEP
    lo: dict[frozenset, Fraction] = {}
    hi: dict[frozenset, Fraction] = {}
    for n_kept, n_cut, kept in _edge_configs(k):
        base = keep ** n_kept * cut ** n_cut
        reach = [""]
        for d in range(1, k + 1):
            reach += [v + b for v in reach if len(v) == d - 1 for b in "01" if v + b in kept]
        boundary = [v for v in reach if len(v) == k]
        for r in range(len(boundary) + 1):
            for alive in itertools.combinations(boundary, r):
                nodes = frozenset(v[:j] for v in alive for j in range(k + 1))
                a, b = r, len(boundary) - r
                lo[nodes] = lo.get(nodes, Fraction(0)) + base * s_lo ** a * (1 - s_hi) ** b
                hi[nodes] = hi.get(nodes, Fraction(0)) + base * s_hi ** a * (1 - s_lo) ** b
    out = {TreeShape(k, nodes): Interval(lo[nodes], hi[nodes]) for nodes in lo}
    if not conditioned:
        return out
    empty = out.pop(TreeShape.empty(k))
    ne_lo, ne_hi = 1 - empty.hi, 1 - empty.lo
    return {s: Interval(iv.lo / ne_hi, min(Fraction(1), iv.hi / ne_lo)) for s, iv in out.items()}


def tree_code_measure(n: int, conditioned: bool = True) -> Explicit:
    """Law of the first n tree-code bits of the pruned percolation tree."""
    if n < 1:
        raise ValueError("n must be at least 1")
    k = max(1, len(vertex(n - 1)))
    weights: dict[str, Fraction] = {}
    for shape, w in tree_dist_percolation(k, conditioned).items():
        code = shape.code(n)
        weights[code] = weights.get(code, Fraction(0)) + w
    return Explicit(n, weights)
