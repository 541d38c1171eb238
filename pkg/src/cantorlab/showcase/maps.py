"""Example maps: thresholds of table reals, even/odd splitting, tree pruning."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from ..clopen import ClopenSet
from ..exact import RationalLike, as_rational
from ..layerwise import CauchyBitApprox, TotalMonotoneMap
from ..measures import InterleavedTable, MeasureSpec, bernoulli, table, table_position, uniform
from .trees import vertex


# thresholds -------------------------------------------------------------------

def _below(row: int, j: int, count: int) -> ClopenSet:
    """Inputs whose first j bits of table row ``row``, read as an integer,
    are < count."""
    @lru_cache(maxsize=None)
    def node(l: int, n: int) -> ClopenSet:
        if n <= 0:
            return ClopenSet.empty()
        if n >= 1 << (j - l):
            return ClopenSet.full()
        half = 1 << (j - l - 1)
        return ClopenSet.branch(table_position(row, l), node(l + 1, n), node(l + 1, n - half))

    return node(0, count)  # recursion depth j, small in practice


def threshold_stage(theta: Fraction, row: int, j: int) -> ClopenSet:
    """``{ξ_row : a < floor(θ·2^j)}`` where a is the first j bits of the row."""
    return _below(row, j, (theta.numerator << j) // theta.denominator)


def threshold_map(theta: RationalLike) -> CauchyBitApprox:
    """Bit k is 1 iff the k-th table real is below θ.

    Stage j compares the first j bits of row k with θ. Consecutive stages
    differ only on one cell of width 2^-(j+1).
    """
    theta = as_rational(theta)
    if not 0 < theta < 1:
        raise ValueError("threshold must lie strictly between 0 and 1")
    return CauchyBitApprox(lambda k, j: threshold_stage(theta, k, j), table(), None, name=f"threshold({theta})")


def threshold_total(theta: RationalLike) -> TotalMonotoneMap:
    """The same comparison as a monotone map: bits are emitted in order, each
    once the revealed part of its row decides it."""
    theta = as_rational(theta)
    if not 0 < theta < 1:
        raise ValueError("threshold must lie strictly between 0 and 1")
    tb = InterleavedTable()

    def emit(x: str) -> str:
        out = []
        k = 0
        while True:
            r = tb.row_prefix(x, k)
            a = int(r, 2) if r else 0
            scaled = theta * (1 << len(r))
            if a + 1 <= scaled:
                out.append("1")
            elif a >= scaled:
                out.append("0")
            else:
                return "".join(out)
            k += 1

    return TotalMonotoneMap(emit, name=f"threshold-total({theta})")


# splitting and identity -------------------------------------------------------

def evenodd_split() -> TotalMonotoneMap:
    """α ↦ α_0 α_2 α_4 ..."""
    return TotalMonotoneMap(lambda x: x[0::2], name="split")


def evenodd_cauchy(base: MeasureSpec | None = None) -> CauchyBitApprox:
    return CauchyBitApprox(lambda k, i: ClopenSet.coordinate(2 * k), base or uniform(), None, name="split")


def identity_map(base: MeasureSpec | None = None) -> CauchyBitApprox:
    return CauchyBitApprox(lambda k, i: ClopenSet.coordinate(k), base or uniform(), None, name="identity")


# tree pruning -----------------------------------------------------------------

BAND = 32
CUT_PROB = Fraction(1, 3)


def _preorder(rel: str, depth: int) -> int:
    # position of the edge into ``rel`` in a DFS preorder of the edges of a
    # complete tree of the given depth
    idx = len(rel) - 1
    for j, s in enumerate(rel, start=1):
        if s == "1":
            idx += (1 << (depth - j + 1)) - 1
    return idx


def edge_index(w: str) -> int:
    """Index of the edge into vertex w (w non-empty) in the edge order.

    Edges are cut into bands of BAND levels. Bands come in order of depth;
    inside a band every subtree (one per vertex at the band's top) takes a
    contiguous block, listed in DFS preorder. So ancestors always precede
    descendants and a subtree's edges form few intervals.
    """
    if not w:
        raise ValueError("the root has no incoming edge")
    band = (len(w) - 1) // BAND
    top = band * BAND
    before = (1 << (top + 1)) - 2
    block = (1 << (BAND + 1)) - 2
    head = int(w[:top], 2) if top else 0
    return before + head * block + _preorder(w[top:], BAND)


def edge_position(w: str) -> int:
    """Input position of the edge into w: cell ``edge_index(w)`` of table row 0.

    Keeping all edges on one row makes the variable order follow the edge
    order; other positions are ignored by the map.
    """
    return table_position(0, edge_index(w))


def _uncut(w: str, rest: ClopenSet) -> ClopenSet:
    return ClopenSet.branch(edge_position(w), rest, ClopenSet.empty())


def _survives(w: str, h: int) -> ClopenSet:
    """w keeps a descending path of length h."""
    if h == 0:
        return ClopenSet.full()
    level = {w + format(b, f"0{h}b"): ClopenSet.full() for b in range(1 << h)}
    for _ in range(h):
        nxt = {}
        for v in {u[:-1] for u in level}:
            nxt[v] = _uncut(v + "0", level[v + "0"]) | _uncut(v + "1", level[v + "1"])
        level = nxt
    return level[w]


def tree_horizon(level: int, depth: int) -> int:
    """Least H >= depth with (1/4)(2/3)^H <= 2^-level.

    p_h - 3/4 <= (1/4)(2/3)^h, so a vertex at any depth d that survives to
    height H - d is wrong with probability at most (2/3)^d (1/4)(2/3)^(H-d).
    """
    h = depth
    while (1 << (h + level)) > 4 * 3 ** h:
        h += 1
    return h


@lru_cache(maxsize=4096)
def tree_stage(w: str, height: int) -> ClopenSet:
    """Path to w uncut and w survives to absolute depth ``height``."""
    out = _survives(w, height - len(w))
    for j in range(len(w), 0, -1):
        out = _uncut(w[:j], out)
    return out


def tree_pruning_map() -> CauchyBitApprox:
    """Output bit i is 1 iff vertex v_i lies in the pruned percolation tree.

    Input bit at edge_position(w) is 1 when the edge into w is cut (base
    measure Bernoulli(1/3)). Stage j asks for survival to the horizon
    H(j, |v_i|); the stages decrease to the limit, within 2^-j of it.
    """
    base = bernoulli(CUT_PROB)

    def approx(i: int, j: int) -> ClopenSet:
        w = vertex(i)
        return tree_stage(w, tree_horizon(j, len(w)))

    return CauchyBitApprox(approx, base, None, name="tree")
