import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantorlab.clopen import ClopenSet, canonicalize
from cantorlab.exact import as_rational, format_rational, parse_rational, pow2
from cantorlab.measures import (
    DepthExceeded,
    bernoulli,
    clopen_mass,
    distance,
    explicit,
    load_explicit,
    mass,
    table,
    uniform,
)
from cantorlab.pairing import table_address, table_position


def strings(n):
    return ["".join(b) for b in itertools.product("01", repeat=n)]


def upto(n):
    return [x for k in range(n + 1) for x in strings(k)]


fractions01 = st.fractions(min_value=0, max_value=1, max_denominator=20)
bits = st.text(alphabet="01", max_size=6)


@st.composite
def explicit_measures(draw):
    depth = draw(st.integers(0, 4))
    raw = draw(st.lists(st.integers(0, 5), min_size=2**depth, max_size=2**depth))
    if sum(raw) == 0:
        raw[0] = 1
    total = sum(raw)
    weights = {x: Fraction(w, total) for x, w in zip(strings(depth), raw)}
    return explicit(depth, weights, extend_uniform=draw(st.booleans()))


def test_mass_examples():
    assert mass(bernoulli("1/3"), "11") == Fraction(1, 9)
    assert mass(uniform(), "010") == Fraction(1, 8)
    for m in (bernoulli("1/3"), uniform(), table(), explicit(1, {"0": "1/4", "1": "3/4"})):
        assert mass(m, "") == 1


def test_clopen_mass_examples():
    assert clopen_mass(bernoulli("1/2"), canonicalize(["0", "11"])) == Fraction(3, 4)
    assert clopen_mass(uniform(), ClopenSet.empty()) == 0
    assert clopen_mass(bernoulli("1/3"), canonicalize(["1"])) == Fraction(1, 3)


def test_distance_examples():
    x = canonicalize(["01", "1"])
    assert distance(bernoulli("1/3"), x, x) == 0
    assert distance(uniform(), canonicalize(["0"]), canonicalize(["1"])) == 1
    assert distance(uniform(), canonicalize(["0"]), canonicalize(["00"])) == Fraction(1, 4)


@given(fractions01)
def test_bernoulli_kolmogorov_consistency(p):
    m = bernoulli(p)
    for x in upto(5):
        assert m.mass(x) == m.mass(x + "0") + m.mass(x + "1")
        assert 0 <= m.mass(x) <= 1


@given(explicit_measures())
def test_explicit_kolmogorov_consistency(m):
    top = 6 if m.extend_uniform else m.depth - 1
    assert m.mass("") == 1
    for x in upto(top):
        assert m.mass(x) == m.mass(x + "0") + m.mass(x + "1")


@given(explicit_measures(), st.lists(bits, max_size=6))
def test_clopen_mass_matches_antichain_sum(m, xs):
    c = canonicalize(xs)
    if c.depth > m.depth and not m.extend_uniform:
        with pytest.raises(DepthExceeded):
            m.clopen_mass(c)
        return
    assert m.clopen_mass(c) == sum(m.mass(x) for x in c.antichain())
    assert m.clopen_mass(~c) == 1 - m.clopen_mass(c)


@given(fractions01, st.lists(bits, max_size=6), st.lists(bits, max_size=6))
def test_distance_is_mass_of_symmetric_difference(p, xs, ys):
    m = bernoulli(p)
    a, b = canonicalize(xs), canonicalize(ys)
    assert m.distance(a, b) == m.clopen_mass(a ^ b) == m.distance(b, a)
    assert m.clopen_mass(~a) == 1 - m.clopen_mass(a)


def test_table_is_uniform_with_addresses():
    t = table()
    for x in upto(5):
        assert t.mass(x) == uniform().mass(x)
    for pos in range(500):
        assert table_position(*table_address(pos)) == pos
    assert [table_address(p) for p in range(6)] == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    # positions 0, 1, 3 belong to row 0 and positions 2, 4 to row 1
    assert t.row_prefix("101100", 0) == "101"
    assert t.row_prefix("101100", 1) == "10"


def test_explicit_depth_limit():
    m = explicit(2, {"00": "1/2", "11": "1/2"})
    assert m.mass("0") == Fraction(1, 2)
    assert m.mass("01") == 0
    with pytest.raises(DepthExceeded):
        m.mass("000")
    ext = explicit(2, {"00": "1/2", "11": "1/2"}, extend_uniform=True)
    assert ext.mass("000") == Fraction(1, 4)


def test_invalid_measures():
    with pytest.raises(ValueError):
        bernoulli("3/2")
    with pytest.raises(TypeError):
        bernoulli(0.5)
    with pytest.raises(ValueError):
        explicit(1, {"0": "1/2"})
    with pytest.raises(ValueError):
        explicit(1, {"0": "3/2", "1": "-1/2"})
    with pytest.raises(ValueError):
        explicit(1, {"00": 1})


def test_load_explicit(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("depth 2\n# comment\n00 1/3\n01 1/6\n11 1/2\n")
    m = load_explicit(path)
    assert m.mass("0") == Fraction(1, 2)
    assert m.mass("10") == 0
    (tmp_path / "e.txt").write_text("0\n- 1\n")
    assert load_explicit(tmp_path / "e.txt").mass("") == 1
    (tmp_path / "bad.txt").write_text("1\n0 1/2\n0 1/2\n")
    with pytest.raises(ValueError):
        load_explicit(tmp_path / "bad.txt")


@given(st.fractions())
def test_rational_text_roundtrip(q):
    assert parse_rational(format_rational(q)) == q
    assert as_rational(format_rational(q)) == q


def test_parse_rational_rejects():
    for text in ("0.5", "1/0", "", "a/b"):
        with pytest.raises(ValueError):
            parse_rational(text)
    assert pow2(-3) == Fraction(1, 8) and pow2(2) == 4
