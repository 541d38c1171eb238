"""Closed relations on Ω×Ω given depth by depth, and exact coupling feasibility.

A relation F is presented by ``related(u, v)`` for strings of equal length n,
meaning that the product cylinder uΩ × vΩ meets F. Feasibility of a coupling
of P and Q supported on F is decided at each finite depth by an exact
max-flow; depth-n feasibility is necessary for a true coupling, and by
compactness feasibility at every depth is sufficient.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

from .clopen import ClopenSet
from .measures import MeasureSpec

__all__ = [
    "Relation",
    "RelationViolation",
    "ConditionReport",
    "CouplingMatrix",
    "CutCertificate",
    "TotalityViolation",
    "strings",
    "domination",
    "equality",
    "full",
    "empty",
    "load_relation",
    "check_conditions",
    "preimage_cylinder",
    "solve_coupling",
    "class_witness",
    "max_flow",
]


def strings(n: int) -> list[str]:
    return ["".join(b) for b in itertools.product("01", repeat=n)]


class TotalityViolation(ValueError):
    """Some u has no related v."""


class Relation:
    """Depth-indexed relation.

    ``related(u, v)`` decides a pair of equal-length strings. ``row(u)``, if
    given, lists the related v directly (faster than scanning). ``support``
    restricts the first coordinate: totality is only required there.
    """

    def __init__(
        self,
        name: str,
        related: Callable[[str, str], bool],
        row: Optional[Callable[[str], Iterable[str]]] = None,
        support: Optional[Callable[[str], bool]] = None,
        max_depth: Optional[int] = None,
    ):
        self.name = name
        self._related = related
        self._row = row
        self._support = support
        self.max_depth = max_depth

    def _check_depth(self, n: int) -> None:
        if self.max_depth is not None and n > self.max_depth:
            raise ValueError(f"relation {self.name!r} is only given to depth {self.max_depth}")

    def related(self, u: str, v: str) -> bool:
        if len(u) != len(v):
            raise ValueError("u and v must have the same length")
        self._check_depth(len(u))
        return bool(self._related(u, v))

    __call__ = related

    def rel(self, n: int) -> Callable[[str, str], bool]:
        self._check_depth(n)
        return self.related

    def row(self, u: str) -> list[str]:
        """Related v, lexicographically sorted."""
        self._check_depth(len(u))
        if self._row is not None:
            return sorted(self._row(u))
        return [v for v in strings(len(u)) if self._related(u, v)]

    def in_support(self, u: str) -> bool:
        return True if self._support is None else bool(self._support(u))

    def __repr__(self) -> str:
        return f"Relation({self.name!r})"


# built-in relations -----------------------------------------------------------

def domination() -> Relation:
    """β_i <= α_i for every i."""

    def related(u: str, v: str) -> bool:
        return all(b <= a for a, b in zip(u, v))

    def row(u: str) -> list[str]:
        opts = [("0", "1") if a == "1" else ("0",) for a in u]
        return ["".join(c) for c in itertools.product(*opts)]

    return Relation("domination", related, row)


def equality() -> Relation:
    return Relation("equality", lambda u, v: u == v, lambda u: [u])


def full() -> Relation:
    return Relation("full", lambda u, v: True)


def empty() -> Relation:
    return Relation("empty", lambda u, v: False, lambda u: [])


def load_relation(path: Union[str, Path]) -> Relation:
    """Read ``depth u v`` lines (``-`` is the empty string); ``#`` starts a comment.

    Pairs not listed are unrelated; depth 0 relates ("", "") unless the file
    says otherwise by listing some depth-0 line.
    """
    pairs: dict[int, set[tuple[str, str]]] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}: bad line {line!r}")
        n = int(parts[0])
        u, v = ("" if s == "-" else s for s in parts[1:])
        if len(u) != n or len(v) != n or any(c not in "01" for c in u + v):
            raise ValueError(f"{path}: pair {u!r} {v!r} does not have depth {n}")
        pairs.setdefault(n, set()).add((u, v))
    pairs.setdefault(0, {("", "")})
    top = max(pairs)
    return Relation(Path(path).stem, lambda u, v: (u, v) in pairs.get(len(u), ()), max_depth=top)


BUILTIN = {"domination": domination, "equality": equality, "full": full, "empty": empty}


# condition checks -----------------------------------------------------------

@dataclass(frozen=True)
class RelationViolation:
    kind: str  # "coherence" or "totality"
    depth: int
    u: str
    v: Optional[str] = None


@dataclass
class ConditionReport:
    max_depth: int
    violations: list[RelationViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_conditions(r: Relation, max_depth: int) -> ConditionReport:
    """Downward coherence and totality (on the support) up to max_depth."""
    rep = ConditionReport(max_depth)
    for n in range(max_depth + 1):
        for u in strings(n):
            row = r.row(u)
            if n >= 1 and not row and r.in_support(u):
                rep.violations.append(RelationViolation("totality", n, u))
            if n >= 1:
                for v in row:
                    if not r.related(u[:-1], v[:-1]):
                        rep.violations.append(RelationViolation("coherence", n, u, v))
    return rep


def preimage_cylinder(r: Relation, v: str, depth: Optional[int] = None) -> ClopenSet:
    """Depth-n strings u related to some v' of length n extending v.

    n defaults to |v|; the result depends on n, so it is a parameter.
    """
    n = len(v) if depth is None else depth
    if n < len(v):
        raise ValueError("depth must be at least |v|")
    hits = [u for u in strings(n) if any(w.startswith(v) for w in r.row(u))]
    return ClopenSet.from_strings(hits)


# exact max-flow -------------------------------------------------------------

class _FlowGraph:
    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, a: int, b: int, c: int) -> int:
        self.head[a].append(len(self.to))
        self.to.append(b)
        self.cap.append(c)
        self.head[b].append(len(self.to))
        self.to.append(a)
        self.cap.append(0)
        return len(self.to) - 2

    def _levels(self, s: int) -> list[int]:
        level = [-1] * self.n
        level[s] = 0
        dq = deque([s])
        while dq:
            a = dq.popleft()
            for e in self.head[a]:
                b = self.to[e]
                if self.cap[e] > 0 and level[b] < 0:
                    level[b] = level[a] + 1
                    dq.append(b)
        return level

    def max_flow(self, s: int, t: int) -> int:
        """Dinic's algorithm with an iterative blocking-flow search."""
        total = 0
        to, cap, head = self.to, self.cap, self.head
        while True:
            level = self._levels(s)
            if level[t] < 0:
                return total
            it = [0] * self.n
            while True:
                # find one augmenting path in the level graph
                path: list[int] = []
                a = s
                while a != t:
                    adv = False
                    while it[a] < len(head[a]):
                        e = head[a][it[a]]
                        b = to[e]
                        if cap[e] > 0 and level[b] == level[a] + 1:
                            path.append(e)
                            a = b
                            adv = True
                            break
                        it[a] += 1
                    if not adv:
                        if a == s:
                            break
                        level[a] = -1  # dead end
                        e = path.pop()
                        a = to[e ^ 1]
                        it[a] += 1
                if a != t:
                    break
                push = min(cap[e] for e in path)
                for e in path:
                    cap[e] -= push
                    cap[e ^ 1] += push
                total += push

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        dq = deque([s])
        while dq:
            a = dq.popleft()
            for e in self.head[a]:
                b = self.to[e]
                if self.cap[e] > 0 and b not in seen:
                    seen.add(b)
                    dq.append(b)
        return seen


def max_flow(capacity: dict[tuple, int], source, sink) -> tuple[int, dict[tuple, int]]:
    """Max-flow on a dict-of-arcs network with integer capacities."""
    nodes = sorted({a for a, _ in capacity} | {b for _, b in capacity} | {source, sink}, key=repr)
    idx = {v: i for i, v in enumerate(nodes)}
    g = _FlowGraph(len(nodes))
    arcs = {arc: g.add(idx[arc[0]], idx[arc[1]], c) for arc, c in capacity.items()}
    value = g.max_flow(idx[source], idx[sink])
    return value, {arc: g.cap[e ^ 1] for arc, e in arcs.items()}


# couplings --------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingMatrix:
    depth: int
    entries: dict  # (u, v) -> Fraction, zero entries omitted

    def row_sums(self) -> dict[str, Fraction]:
        out: dict[str, Fraction] = {}
        for (u, _), w in self.entries.items():
            out[u] = out.get(u, Fraction(0)) + w
        return out

    def col_sums(self) -> dict[str, Fraction]:
        out: dict[str, Fraction] = {}
        for (_, v), w in self.entries.items():
            out[v] = out.get(v, Fraction(0)) + w
        return out

    def project(self) -> "CouplingMatrix":
        """Sum out the last bit of u and of v."""
        if self.depth == 0:
            raise ValueError("cannot project below depth 0")
        out: dict[tuple[str, str], Fraction] = {}
        for (u, v), w in self.entries.items():
            key = (u[:-1], v[:-1])
            out[key] = out.get(key, Fraction(0)) + w
        return CouplingMatrix(self.depth - 1, out)

    def audit(self, p: MeasureSpec, q: Optional[MeasureSpec], r: Relation) -> list[str]:
        """Problems found when re-checking marginals and support exactly."""
        problems = []
        for (u, v), w in self.entries.items():
            if w < 0:
                problems.append(f"negative entry at ({u},{v})")
            if not r.related(u, v):
                problems.append(f"entry outside the relation at ({u},{v})")
        rows, cols = self.row_sums(), self.col_sums()
        for x in strings(self.depth):
            if rows.get(x, Fraction(0)) != p.mass(x):
                problems.append(f"row {x}: {rows.get(x, 0)} != {p.mass(x)}")
            if q is not None and cols.get(x, Fraction(0)) != q.mass(x):
                problems.append(f"column {x}: {cols.get(x, 0)} != {q.mass(x)}")
        return problems


@dataclass(frozen=True)
class CutCertificate:
    depth: int
    input_side: tuple[str, ...]
    related_side: tuple[str, ...]
    p_mass: Fraction
    q_mass: Fraction

    def verify(self, p: MeasureSpec, q: MeasureSpec, r: Relation) -> bool:
        """Recompute both sides from scratch: P(A) > Q(N(A))."""
        a = set(self.input_side)
        nbrs = {v for u in a for v in r.row(u)}
        pa = sum((p.mass(u) for u in a), Fraction(0))
        qn = sum((q.mass(v) for v in nbrs), Fraction(0))
        return pa == self.p_mass and qn == self.q_mass and pa > qn


def solve_coupling(p: MeasureSpec, q: MeasureSpec, r: Relation, n: int) -> Union[CouplingMatrix, CutCertificate]:
    """Exact depth-n transportation problem.

    Network: source -> u (capacity P(u)), u -> v when related (unbounded),
    v -> sink (capacity Q(v)); masses are scaled to integers by their common
    denominator. Feasible iff the max flow is 1. Otherwise the inputs still
    reachable from the source in the residual network form a set A with
    P(A) > Q(N(A)).
    """
    us = [(u, p.mass(u)) for u in strings(n)]
    vs = [(v, q.mass(v)) for v in strings(n)]
    us = [(u, w) for u, w in us if w]
    vs = [(v, w) for v, w in vs if w]
    scale = 1
    for _, w in us + vs:
        scale = scale * w.denominator // math.gcd(scale, w.denominator)
    big = scale + 1
    vid = {v: i for i, (v, _) in enumerate(vs)}
    src, sink = 0, 1
    uoff, voff = 2, 2 + len(us)
    g = _FlowGraph(voff + len(vs))
    for i, (u, w) in enumerate(us):
        g.add(src, uoff + i, int(w * scale))
    arcs = []
    for i, (u, _) in enumerate(us):
        for v in r.row(u):
            j = vid.get(v)
            if j is not None:
                arcs.append((u, v, g.add(uoff + i, voff + j, big)))
    for j, (v, w) in enumerate(vs):
        g.add(voff + j, sink, int(w * scale))
    value = g.max_flow(src, sink)
    if value == scale:
        entries = {}
        for u, v, e in arcs:
            f = g.cap[e ^ 1]
            if f:
                entries[(u, v)] = Fraction(f, scale)
        return CouplingMatrix(n, entries)
    seen = g.reachable(src)
    side = tuple(u for i, (u, _) in enumerate(us) if uoff + i in seen)
    nbrs = tuple(sorted({v for u in side for v in r.row(u) if q.mass(v)}))
    pa = sum((p.mass(u) for u in side), Fraction(0))
    qn = sum((q.mass(v) for v in nbrs), Fraction(0))
    return CutCertificate(n, side, nbrs, pa, qn)


def class_witness(p: MeasureSpec, r: Relation, n: int) -> CouplingMatrix:
    """Send each u's P-mass to its lexicographically least related v."""
    entries = {}
    for u in strings(n):
        w = p.mass(u)
        if not w:
            continue
        row = r.row(u)
        if not row:
            raise TotalityViolation(f"{r.name}: no v related to u={u!r} at depth {n}")
        entries[(u, row[0])] = w
    return CouplingMatrix(n, entries)
