"""Clopen subsets of Cantor space.

A clopen set is a finite union of cylinders ``xΩ``. Its canonical form is
the fully merged prefix-free antichain (never both ``x0`` and ``x1``), with
the empty antichain for ∅ and ``{""}`` for Ω; :meth:`ClopenSet.antichain`
returns it.

Internally a set is a node of a shared, reduced, ordered binary decision
diagram: node ``(p, lo, hi)`` reads input position p and continues in lo or
hi. Redundant tests are removed and nodes are hash-consed, so equal sets are
the same node and equality is an identity check. The antichain is derived on
demand; it can be exponentially larger than the diagram (``{ω : ω_200 = 1}``
is one node but 2**200 strings).

Diagram variables are ordered by table address (row, then column, see
:mod:`cantorlab.pairing`), not by position. Under that order conditions on
different table rows stack instead of multiplying, which keeps the
threshold-map sets linear in the number of rows.

All traversals are iterative: CPython overflows the C stack at recursion
depths that the tree-pruning sets reach.
"""

from __future__ import annotations

import enum
import math
import threading
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .pairing import table_address

__all__ = [
    "ClopenSet",
    "Membership",
    "DepthTooSmall",
    "canonicalize",
    "boolean_op",
    "refine_to_depth",
    "contains",
    "compose",
    "product_mass",
]

FALSE = 0
TRUE = 1
_INF = math.inf

# node table; index = node id
_VAR: list = [_INF, _INF]  # input position
_KEY: list = [_INF, _INF]  # order key of that position
_LO: list[int] = [FALSE, TRUE]
_HI: list[int] = [FALSE, TRUE]
_UNIQUE: dict[tuple[int, int, int], int] = {}
_LOCK = threading.Lock()

_CACHE_LIMIT = 1 << 21
_OP_CACHE: dict[tuple[int, int, int], int] = {}
_NOT_CACHE: dict[int, int] = {}
_DEPTH_CACHE: dict[int, int] = {}
_POS_KEY: dict[int, int] = {}

_AND, _OR, _XOR = 0, 1, 2


def position_key(p: int) -> int:
    """Order key of input position p: row-major over the bit table."""
    k = _POS_KEY.get(p)
    if k is None:
        row, col = table_address(p)
        k = _POS_KEY[p] = (row << 64) | col
    return k


class DepthTooSmall(ValueError):
    """Raised when a set cannot be written with strings of the requested length."""


class Membership(enum.Enum):
    """Three-valued answer of :func:`contains`."""

    INSIDE = "inside"
    OUTSIDE = "outside"
    UNDETERMINED = "undetermined"

    @property
    def determined(self) -> bool:
        return self is not Membership.UNDETERMINED


def _mk(var: int, lo: int, hi: int) -> int:
    if lo == hi:
        return lo
    key = (var, lo, hi)
    node = _UNIQUE.get(key)
    if node is not None:
        return node
    with _LOCK:
        node = _UNIQUE.get(key)
        if node is None:
            node = len(_VAR)
            _VAR.append(var)
            _KEY.append(position_key(var))
            _LO.append(lo)
            _HI.append(hi)
            _UNIQUE[key] = node
    return node


def _terminal_case(op: int, x: int, y: int) -> int | None:
    if op == _AND:
        if x == FALSE or y == FALSE:
            return FALSE
        if x == TRUE:
            return y
        if y == TRUE or x == y:
            return x
    elif op == _OR:
        if x == TRUE or y == TRUE:
            return TRUE
        if x == FALSE:
            return y
        if y == FALSE or x == y:
            return x
    else:
        if x == FALSE:
            return y
        if y == FALSE:
            return x
        if x == y:
            return FALSE
        if x == TRUE:
            return _not(y)
        if y == TRUE:
            return _not(x)
    return None


def _trim_caches() -> None:
    if len(_OP_CACHE) > _CACHE_LIMIT:
        _OP_CACHE.clear()
    if len(_NOT_CACHE) > _CACHE_LIMIT:
        _NOT_CACHE.clear()


def _apply(op: int, a: int, b: int) -> int:
    quick = _terminal_case(op, a, b)
    if quick is not None:
        return quick
    cache = _OP_CACHE
    stack = [(a, b)]
    while stack:
        x, y = stack[-1]
        if x > y:  # all three ops are symmetric
            x, y = y, x
        key = (op, x, y)
        if key in cache:
            stack.pop()
            continue
        res = _terminal_case(op, x, y)
        if res is not None:
            cache[key] = res
            stack.pop()
            continue
        kx, ky = _KEY[x], _KEY[y]
        if kx <= ky:
            v = _VAR[x]
            x0, x1 = _LO[x], _HI[x]
        else:
            v = _VAR[y]
            x0 = x1 = x
        if ky <= kx:
            y0, y1 = _LO[y], _HI[y]
        else:
            y0 = y1 = y
        k0 = (op, x0, y0) if x0 <= y0 else (op, y0, x0)
        k1 = (op, x1, y1) if x1 <= y1 else (op, y1, x1)
        r0 = cache.get(k0)
        if r0 is None:
            r0 = _terminal_case(op, x0, y0)
            if r0 is not None:
                cache[k0] = r0
        r1 = cache.get(k1)
        if r1 is None:
            r1 = _terminal_case(op, x1, y1)
            if r1 is not None:
                cache[k1] = r1
        if r0 is not None and r1 is not None:
            cache[key] = _mk(v, r0, r1)
            stack.pop()
        else:
            if r0 is None:
                stack.append((x0, y0))
            if r1 is None:
                stack.append((x1, y1))
    key = (op, a, b) if a <= b else (op, b, a)
    result = cache[key]
    _trim_caches()
    return result


def _not(a: int) -> int:
    if a <= TRUE:
        return TRUE - a
    cache = _NOT_CACHE
    if a in cache:
        return cache[a]
    stack = [a]
    while stack:
        x = stack[-1]
        if x in cache:
            stack.pop()
            continue
        lo, hi = _LO[x], _HI[x]
        r0 = TRUE - lo if lo <= TRUE else cache.get(lo)
        r1 = TRUE - hi if hi <= TRUE else cache.get(hi)
        if r0 is not None and r1 is not None:
            cache[x] = _mk(_VAR[x], r0, r1)
            stack.pop()
        else:
            if r0 is None:
                stack.append(lo)
            if r1 is None:
                stack.append(hi)
    return cache[a]


def _ite_var(p: int, lo: int, hi: int) -> int:
    """``{ω_p = 0} ∩ lo  ∪  {ω_p = 1} ∩ hi`` for arbitrary lo, hi."""
    kp = position_key(p)
    if _KEY[lo] > kp and _KEY[hi] > kp:
        return _mk(p, lo, hi)
    one = _mk(p, FALSE, TRUE)
    zero = _mk(p, TRUE, FALSE)
    return _apply(_OR, _apply(_AND, zero, lo), _apply(_AND, one, hi))


def _postorder(root: int) -> list[int]:
    """Reachable internal nodes, children before parents."""
    if root <= TRUE:
        return []
    order: list[int] = []
    seen: set[int] = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for child in (_HI[node], _LO[node]):
            if child > TRUE and child not in seen:
                stack.append((child, False))
    return order


def _depth(root: int) -> int:
    if root <= TRUE:
        return 0
    cached = _DEPTH_CACHE.get(root)
    if cached is not None:
        return cached
    best = 0
    for node in _postorder(root):
        best = max(best, _VAR[node] + 1)
    _DEPTH_CACHE[root] = best
    return best


def _reachable_terminals(root: int, x: str) -> tuple[bool, bool]:
    """Which terminals are reachable once positions < |x| are fixed by x."""
    n = len(x)
    found_false = found_true = False
    seen: set[int] = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if node == FALSE:
            found_false = True
        elif node == TRUE:
            found_true = True
        elif node not in seen:
            seen.add(node)
            v = _VAR[node]
            if v < n:
                stack.append(_HI[node] if x[v] == "1" else _LO[node])
            else:
                stack.append(_LO[node])
                stack.append(_HI[node])
        if found_false and found_true:
            break
    return found_false, found_true


def _cofactor(root: int, fixed: dict[int, str]) -> int:
    """The set with the given positions fixed (those positions drop out)."""
    if root <= TRUE or not fixed:
        return root
    vals: dict[int, int] = {FALSE: FALSE, TRUE: TRUE}
    for node in _postorder(root):
        v = _VAR[node]
        bit = fixed.get(v)
        if bit is None:
            vals[node] = _mk(v, vals[_LO[node]], vals[_HI[node]])
        else:
            vals[node] = vals[_HI[node]] if bit == "1" else vals[_LO[node]]
    return vals[root]


def _cylinder(x: str) -> int:
    node = TRUE
    for pos in sorted(range(len(x)), key=position_key, reverse=True):
        node = _mk(pos, FALSE, node) if x[pos] == "1" else _mk(pos, node, FALSE)
    return node


def _from_strings(strings: Iterable[str]) -> int:
    # trie of the strings, converted bottom-up; absorption and merging fall
    # out of the reductions
    trie: dict = {}
    marked = object()
    for s in strings:
        if any(c not in "01" for c in s):
            raise ValueError(f"not a binary string: {s!r}")
        node = trie
        for c in s:
            if marked in node:
                break
            node = node.setdefault(c, {})
        else:
            node.clear()
            node[marked] = True
    result: dict[int, int] = {}
    stack = [(trie, 0, False)]
    while stack:
        node, depth, expanded = stack.pop()
        if marked in node:
            result[id(node)] = TRUE
            continue
        if not expanded:
            stack.append((node, depth, True))
            for c in ("0", "1"):
                if c in node:
                    stack.append((node[c], depth + 1, False))
            continue
        lo = result[id(node["0"])] if "0" in node else FALSE
        hi = result[id(node["1"])] if "1" in node else FALSE
        result[id(node)] = _ite_var(depth, lo, hi)
    return result[id(trie)]


class ClopenSet:
    """Immutable clopen subset of Cantor space in canonical form.

    Equality is structural (node identity), so ``a == b`` iff the two sets
    are equal. Use the operators ``| & ^ - ~`` or the named methods.
    """

    __slots__ = ("_node",)

    def __init__(self, node: int = FALSE):
        self._node = node

    # construction -------------------------------------------------------
    @classmethod
    def empty(cls) -> "ClopenSet":
        return cls(FALSE)

    @classmethod
    def full(cls) -> "ClopenSet":
        return cls(TRUE)

    @classmethod
    def cylinder(cls, x: str) -> "ClopenSet":
        if any(c not in "01" for c in x):
            raise ValueError(f"not a binary string: {x!r}")
        return cls(_cylinder(x))

    @classmethod
    def from_strings(cls, strings: Iterable[str]) -> "ClopenSet":
        return cls(_from_strings(list(strings)))

    @classmethod
    def coordinate(cls, position: int, bit: int = 1) -> "ClopenSet":
        """The set ``{ω : ω[position] == bit}``."""
        if position < 0:
            raise ValueError("position must be non-negative")
        return cls(_mk(position, FALSE, TRUE) if bit else _mk(position, TRUE, FALSE))

    @classmethod
    def branch(cls, position: int, if0: "ClopenSet", if1: "ClopenSet") -> "ClopenSet":
        """``{ω : ω[position]=0, ω ∈ if0} ∪ {ω : ω[position]=1, ω ∈ if1}``."""
        if position < 0:
            raise ValueError("position must be non-negative")
        return cls(_ite_var(position, if0._node, if1._node))

    # inspection ---------------------------------------------------------
    @property
    def is_empty(self) -> bool:
        return self._node == FALSE

    @property
    def is_full(self) -> bool:
        return self._node == TRUE

    @property
    def depth(self) -> int:
        """Length of the longest string in the canonical antichain."""
        return _depth(self._node)

    @property
    def node_count(self) -> int:
        return len(_postorder(self._node))

    def positions(self) -> list[int]:
        """Input positions the set actually depends on, ascending."""
        return sorted({_VAR[n] for n in _postorder(self._node)})

    def antichain(self, limit: int | None = None) -> tuple[str, ...]:
        """The canonical antichain, lexicographically sorted.

        Can be exponentially larger than the diagram; ``limit`` guards
        against accidental blow-ups.
        """
        out: list[str] = []
        for s in self._iter_antichain():
            out.append(s)
            if limit is not None and len(out) > limit:
                raise ValueError(f"antichain has more than {limit} strings")
        return tuple(out)

    def _iter_antichain(self) -> Iterator[str]:
        stack = [(self._node, "")]
        while stack:
            node, prefix = stack.pop()
            if node == FALSE:
                continue
            if node == TRUE:
                yield prefix
                continue
            p = len(prefix)
            stack.append((_cofactor(node, {p: "1"}), prefix + "1"))
            stack.append((_cofactor(node, {p: "0"}), prefix + "0"))

    def contains(self, x: str) -> Membership:
        if any(c not in "01" for c in x):
            raise ValueError(f"not a binary string: {x!r}")
        if self._node <= TRUE:
            return Membership.INSIDE if self._node == TRUE else Membership.OUTSIDE
        found_false, found_true = _reachable_terminals(self._node, x)
        if found_true and not found_false:
            return Membership.INSIDE
        if found_false and not found_true:
            return Membership.OUTSIDE
        return Membership.UNDETERMINED

    def cofactor(self, x: str) -> "ClopenSet":
        """``{ω : ω with its first |x| bits replaced by x lies in self}``."""
        return ClopenSet(_cofactor(self._node, dict(enumerate(x))))

    def refine(self, n: int) -> list[str]:
        """All length-n strings whose cylinders lie inside the set."""
        if n < 0:
            raise ValueError("depth must be non-negative")
        if self.depth > n:
            raise DepthTooSmall(f"set needs strings of length {self.depth} > {n}")
        out: list[str] = []
        for x in self._iter_antichain():
            rest = n - len(x)
            if rest == 0:
                out.append(x)
            else:
                out.extend(x + format(k, f"0{rest}b") for k in range(1 << rest))
        out.sort()
        return out

    def issubset(self, other: "ClopenSet") -> bool:
        return _apply(_AND, self._node, _not(other._node)) == FALSE

    def isdisjoint(self, other: "ClopenSet") -> bool:
        return _apply(_AND, self._node, other._node) == FALSE

    # algebra ------------------------------------------------------------
    def union(self, other: "ClopenSet") -> "ClopenSet":
        return ClopenSet(_apply(_OR, self._node, other._node))

    def intersection(self, other: "ClopenSet") -> "ClopenSet":
        return ClopenSet(_apply(_AND, self._node, other._node))

    def symmetric_difference(self, other: "ClopenSet") -> "ClopenSet":
        return ClopenSet(_apply(_XOR, self._node, other._node))

    def complement(self) -> "ClopenSet":
        return ClopenSet(_not(self._node))

    def difference(self, other: "ClopenSet") -> "ClopenSet":
        return ClopenSet(_apply(_AND, self._node, _not(other._node)))

    __or__ = union
    __and__ = intersection
    __xor__ = symmetric_difference
    __sub__ = difference

    def __invert__(self) -> "ClopenSet":
        return self.complement()

    def __le__(self, other: "ClopenSet") -> bool:
        return self.issubset(other)

    def __ge__(self, other: "ClopenSet") -> bool:
        return other.issubset(self)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ClopenSet) and other._node == self._node

    def __hash__(self) -> int:
        return hash(("ClopenSet", self._node))

    def __bool__(self) -> bool:
        return self._node != FALSE

    def __repr__(self) -> str:
        if self.is_empty:
            return "ClopenSet({})"
        if self.is_full:
            return "ClopenSet({''})"
        try:
            items = self.antichain(limit=16)
        except ValueError:
            return f"ClopenSet(<{self.node_count} nodes, depth {self.depth}>)"
        return "ClopenSet({" + ", ".join(repr(s) for s in items) + "})"


def compose(c: ClopenSet, substitute: Callable[[int], ClopenSet]) -> ClopenSet:
    """Preimage of c under ω ↦ (1[ω ∈ S_0], 1[ω ∈ S_1], ...) with S_k = substitute(k).

    Each node ``(k, lo, hi)`` becomes ``(S_k ∩ hi') ∪ (S_k^c ∩ lo')``.
    """
    vals: dict[int, int] = {FALSE: FALSE, TRUE: TRUE}
    subs: dict[int, int] = {}
    for node in _postorder(c._node):
        k = _VAR[node]
        s = subs.get(k)
        if s is None:
            s = subs[k] = substitute(k)._node
        hi = _apply(_AND, s, vals[_HI[node]])
        lo = _apply(_AND, _not(s), vals[_LO[node]])
        vals[node] = _apply(_OR, hi, lo)
    return ClopenSet(vals[c._node])


def product_mass(c: ClopenSet, p_one: Fraction) -> Fraction:
    """Mass of ``c`` under the i.i.d. measure with P(bit = 1) = p_one.

    Skipped positions integrate out, so each node's mass is
    ``(1-p)·mass(lo) + p·mass(hi)``. Values are kept as integers over a
    common power of the denominator (indexed by the rank of the variable
    among those used) to avoid a gcd per node.
    """
    root = c._node
    if root <= TRUE:
        return Fraction(root)
    p_one = Fraction(p_one)
    a, b = p_one.numerator, p_one.denominator
    nodes = _postorder(root)
    ranks = {k: r for r, k in enumerate(sorted({_KEY[n] for n in nodes}))}
    total = len(ranks)

    def rank(node: int) -> int:
        return total if node <= TRUE else ranks[_KEY[node]]

    scaled: dict[int, int] = {FALSE: 0, TRUE: 1}
    pw = [1]
    for _ in range(total):
        pw.append(pw[-1] * b)
    for node in nodes:
        r = ranks[_KEY[node]]
        lo, hi = _LO[node], _HI[node]
        scaled[node] = (b - a) * scaled[lo] * pw[rank(lo) - r - 1] + a * scaled[hi] * pw[rank(hi) - r - 1]
    return Fraction(scaled[root], pw[total - rank(root)])


# module-level operations ----------------------------------------------------

def canonicalize(strings: Iterable[str]) -> ClopenSet:
    """The canonical clopen set denoting the union of the given cylinders."""
    return ClopenSet.from_strings(strings)


def boolean_op(kind: str, a: ClopenSet, b: ClopenSet | None = None) -> ClopenSet:
    """Apply ``union``, ``intersection``, ``complement`` or ``symmetric-difference``."""
    kind = kind.replace("_", "-")
    if kind == "complement":
        if b is not None:
            raise ValueError("complement takes a single operand")
        return a.complement()
    if b is None:
        raise ValueError(f"{kind} needs two operands")
    if kind == "union":
        return a | b
    if kind == "intersection":
        return a & b
    if kind == "symmetric-difference":
        return a ^ b
    if kind == "difference":
        return a - b
    raise ValueError(f"unknown set operation: {kind!r}")


def refine_to_depth(c: ClopenSet, n: int) -> list[str]:
    return c.refine(n)


def contains(c: ClopenSet, x: str) -> Membership:
    return c.contains(x)
