import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorlab.clopen import (
    ClopenSet,
    DepthTooSmall,
    Membership,
    boolean_op,
    canonicalize,
    compose,
    contains,
    product_mass,
    refine_to_depth,
)
from cantorlab.exact import pow2


def strings(n):
    return ["".join(b) for b in itertools.product("01", repeat=n)]


def S(*xs):
    return canonicalize(xs)


# every clopen set expressible at depth 3, as a set of depth-3 strings
DEPTH3 = strings(3)
ALL3 = [frozenset(c) for r in range(9) for c in itertools.combinations(DEPTH3, r)]
CLOPEN3 = {s: canonicalize(s) for s in ALL3}

bits = st.text(alphabet="01", max_size=7)
string_lists = st.lists(bits, max_size=8)


def brute(c, n):
    """Oracle: membership of every depth-n cylinder, via refine."""
    return frozenset(c.refine(n))


# worked examples --------------------------------------------------------------

def test_canonicalize_examples():
    assert S("0", "1").antichain() == ("",)
    assert canonicalize([]).antichain() == ()
    assert S("0", "01").antichain() == ("0",)


def test_boolean_op_examples():
    assert boolean_op("symmetric-difference", S("0"), S("0")).is_empty
    assert boolean_op("complement", S("00")).antichain() == ("01", "1")
    assert boolean_op("intersection", S("0"), S("01")).antichain() == ("01",)


def test_boolean_op_arity():
    with pytest.raises(ValueError):
        boolean_op("complement", S("0"), S("1"))
    with pytest.raises(ValueError):
        boolean_op("union", S("0"))
    with pytest.raises(ValueError):
        boolean_op("xor", S("0"), S("1"))


def test_refine_examples():
    assert refine_to_depth(S("0"), 2) == ["00", "01"]
    assert refine_to_depth(S(""), 1) == ["0", "1"]
    assert refine_to_depth(S(), 3) == []


def test_refine_too_shallow():
    with pytest.raises(DepthTooSmall):
        refine_to_depth(S("010"), 2)
    with pytest.raises(ValueError):
        S("0").refine(-1)


def test_contains_examples():
    assert contains(S("0"), "01") is Membership.INSIDE
    assert contains(S("01"), "0") is Membership.UNDETERMINED
    assert contains(S(), "1") is Membership.OUTSIDE
    assert not Membership.UNDETERMINED.determined


def test_rejects_non_binary():
    with pytest.raises(ValueError):
        S("012")
    with pytest.raises(ValueError):
        S("0").contains("2")


# exhaustive laws at depth 3 ---------------------------------------------------------

def test_depth3_sets_are_distinct_and_faithful():
    seen = set()
    for s, c in CLOPEN3.items():
        assert brute(c, 3) == s
        seen.add(c)
    assert len(seen) == 256


def test_canonicalize_idempotent_depth3():
    for c in CLOPEN3.values():
        assert canonicalize(c.antichain()) == c
        assert canonicalize(c.antichain()).antichain() == c.antichain()


def test_antichain_is_prefix_free_and_merged():
    for c in CLOPEN3.values():
        ac = c.antichain()
        assert list(ac) == sorted(ac)
        for a, b in itertools.permutations(ac, 2):
            assert not b.startswith(a)
        members = set(ac)
        for x in ac:
            if x:
                sibling = x[:-1] + ("1" if x[-1] == "0" else "0")
                assert sibling not in members  # siblings would have been merged


def test_boolean_laws_exhaustive_depth3():
    full = ClopenSet.full()
    for sa, a in CLOPEN3.items():
        assert ~~a == a
        assert a ^ a == ClopenSet.empty()
        assert a | ~a == full
        assert brute(~a, 3) == frozenset(DEPTH3) - sa
        for sb, b in CLOPEN3.items():
            assert ~(a | b) == (~a & ~b)
            assert ~(a & b) == (~a | ~b)
            assert brute(a ^ b, 3) == sa ^ sb
            assert (a <= b) == (sa <= sb)


def test_refine_counts_depth3():
    for c in CLOPEN3.values():
        for n in range(3, 6):
            assert len(c.refine(n)) == sum(2 ** (n - len(x)) for x in c.antichain())


# randomized checks at larger depth ----------------------------------------------

@given(string_lists, string_lists)
def test_ops_match_set_semantics(xs, ys):
    a, b = canonicalize(xs), canonicalize(ys)
    da, db = brute(a, 7), brute(b, 7)
    assert brute(a | b, 7) == da | db
    assert brute(a & b, 7) == da & db
    assert brute(a - b, 7) == da - db
    assert a.isdisjoint(b) == (not (da & db))


@given(string_lists)
def test_canonical_form_is_unique(xs):
    a = canonicalize(xs)
    assert canonicalize(a.refine(7)) == a
    assert canonicalize(reversed(xs)) == a
    assert hash(canonicalize(xs)) == hash(a)


@given(string_lists, bits)
def test_contains_matches_refinement(xs, x):
    a = canonicalize(xs)
    cyl = brute(ClopenSet.cylinder(x), 7)
    inside = brute(a, 7)
    mem = a.contains(x)
    if mem is Membership.INSIDE:
        assert cyl <= inside
    elif mem is Membership.OUTSIDE:
        assert not cyl & inside
    else:
        assert cyl & inside and not cyl <= inside


@given(string_lists, st.fractions(min_value=0, max_value=1, max_denominator=12))
def test_product_mass_matches_enumeration(xs, p):
    a = canonicalize(xs)
    expected = sum(p ** x.count("1") * (1 - p) ** x.count("0") for x in a.antichain())
    assert product_mass(a, p) == expected


# structure -----------------------------------------------------------------------

def test_coordinate_and_branch():
    c = ClopenSet.coordinate(2)
    assert c == S("001", "011", "101", "111")
    assert ClopenSet.coordinate(0, bit=0) == S("0")
    assert ClopenSet.branch(1, S("0"), S("1")) == S("00", "11")
    assert c.positions() == [2]
    assert c.depth == 3


def test_compose_substitutes_positions():
    # output bit k is input bit 2k
    sub = lambda k: ClopenSet.coordinate(2 * k)
    assert compose(S("1"), sub) == ClopenSet.coordinate(0)
    assert compose(S("01"), sub) == S("0") & ClopenSet.coordinate(2)


def test_cofactor():
    c = S("01", "1")
    assert c.cofactor("0") == S("01", "11")  # positions are kept, not shifted
    assert c.cofactor("1").is_full
    assert c.cofactor("00").is_empty


def test_large_union_stays_small():
    # unions along one coordinate per row stay linear in size
    c = ClopenSet.empty()
    for k in range(200):
        c = c | ClopenSet.coordinate(3 * k)
    assert c.node_count <= 200
    assert product_mass(c, pow2(-1)) == 1 - pow2(-200)


@settings(max_examples=50)
@given(string_lists)
def test_antichain_limit(xs):
    a = canonicalize(xs)
    n = len(a.antichain())
    if n:
        with pytest.raises(ValueError):
            a.antichain(limit=n - 1)
