import itertools
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorlab.clopen import canonicalize
from cantorlab.couplings import (
    BUILTIN,
    CouplingMatrix,
    CutCertificate,
    Relation,
    TotalityViolation,
    check_conditions,
    class_witness,
    domination,
    empty,
    equality,
    full,
    load_relation,
    max_flow,
    preimage_cylinder,
    solve_coupling,
    strings,
)
from cantorlab.measures import bernoulli, explicit, uniform
from cantorlab.showcase import paths_relation, tree_code_measure

HALF = bernoulli(Fraction(1, 2))


def hall_feasible(p, q, r, n):
    """Brute-force oracle: P(A) <= Q(N(A)) for every set A of inputs."""
    us = strings(n)
    for k in range(1, len(us) + 1):
        for a in itertools.combinations(us, k):
            nbrs = {v for u in a for v in r.row(u)}
            if sum(p.mass(u) for u in a) > sum(q.mass(v) for v in nbrs):
                return False
    return True


@st.composite
def depth_measures(draw, n):
    raw = draw(st.lists(st.integers(0, 4), min_size=2**n, max_size=2**n))
    if not any(raw):
        raw[-1] = 1
    return explicit(n, {x: Fraction(w, sum(raw)) for x, w in zip(strings(n), raw)})


@st.composite
def small_relations(draw):
    """Random relation at depth 2 that is coherent with the full relation at depth 1."""
    pairs = draw(st.sets(st.tuples(st.sampled_from(strings(2)), st.sampled_from(strings(2)))))
    return Relation("random", lambda u, v: len(u) < 2 or (u, v) in pairs, max_depth=2)


# conditions -------------------------------------------------------------------------

def test_condition_examples():
    assert check_conditions(full(), 4).ok
    rep = check_conditions(empty(), 3)
    assert not rep.ok
    first = rep.violations[0]
    assert (first.kind, first.depth) == ("totality", 1)
    assert check_conditions(domination(), 6).ok
    assert check_conditions(equality(), 6).ok


def test_coherence_violation_detected():
    # related at depth 2 while the parents are unrelated at depth 1
    r = Relation("odd", lambda u, v: u == v if len(u) < 2 else True)
    kinds = {v.kind for v in check_conditions(r, 2).violations}
    assert kinds == {"coherence"}


def test_preimage_examples():
    assert preimage_cylinder(full(), "01") == canonicalize([""])
    assert preimage_cylinder(domination(), "1") == canonicalize(["1"])
    assert preimage_cylinder(domination(), "1", depth=3) == canonicalize(["1"])
    with pytest.raises(ValueError):
        preimage_cylinder(domination(), "11", depth=1)


def test_domination_rows():
    r = domination()
    assert [(u, v) for u in "01" for v in "01" if r(u, v)] == [("0", "0"), ("1", "0"), ("1", "1")]
    for n in range(5):
        for u in strings(n):
            assert r.row(u) == [v for v in strings(n) if r(u, v)]
            assert "0" * n in r.row(u)


# solving --------------------------------------------------------------------------------

def test_equality_coupling_is_diagonal():
    m = solve_coupling(uniform(), uniform(), equality(), 2)
    assert isinstance(m, CouplingMatrix)
    assert m.entries == {(u, u): Fraction(1, 4) for u in strings(2)}


def test_domination_half_third_depth1():
    p, q = HALF, bernoulli(Fraction(1, 3))
    m = solve_coupling(p, q, domination(), 1)
    assert isinstance(m, CouplingMatrix)
    assert m.audit(p, q, domination()) == []
    # the worked example is one valid answer
    example = CouplingMatrix(1, {("1", "1"): Fraction(1, 3), ("1", "0"): Fraction(1, 6), ("0", "0"): Fraction(1, 2)})
    assert example.audit(p, q, domination()) == []


def test_domination_cut_certificate():
    p, q = HALF, bernoulli(Fraction(2, 3))
    cut = solve_coupling(p, q, domination(), 1)
    assert isinstance(cut, CutCertificate)
    assert cut.input_side == ("0",) and cut.related_side == ("0",)
    assert (cut.p_mass, cut.q_mass) == (Fraction(1, 2), Fraction(1, 3))
    assert cut.verify(p, q, domination())
    forged = CutCertificate(1, ("1",), ("0", "1"), Fraction(1, 2), Fraction(1, 3))
    assert not forged.verify(p, q, domination())


@pytest.mark.parametrize("theta", [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)])
def test_domination_feasible_iff_theta_at_most_half(theta):
    q = bernoulli(theta)
    for n in range(7):
        out = solve_coupling(HALF, q, domination(), n)
        if n == 0 or theta <= Fraction(1, 2):
            assert isinstance(out, CouplingMatrix)
            assert out.audit(HALF, q, domination()) == []
        else:
            assert isinstance(out, CutCertificate)
            assert out.verify(HALF, q, domination())


def test_projection_consistency():
    q = bernoulli(Fraction(1, 3))
    for n in range(1, 6):
        m = solve_coupling(HALF, q, domination(), n + 1)
        proj = m.project()
        assert proj.depth == n
        assert proj.audit(HALF, q, domination()) == []
    with pytest.raises(ValueError):
        CouplingMatrix(0, {("", ""): Fraction(1)}).project()


def test_audit_reports_problems():
    bad = CouplingMatrix(1, {("0", "1"): Fraction(1, 2), ("1", "1"): Fraction(1, 4)})
    problems = bad.audit(HALF, HALF, domination())
    assert any("outside the relation" in x for x in problems)
    assert any(x.startswith("row 1") for x in problems)


@settings(max_examples=60, deadline=None)
@given(depth_measures(2), depth_measures(2), small_relations())
def test_feasibility_matches_hall(p, q, r):
    out = solve_coupling(p, q, r, 2)
    assert isinstance(out, CouplingMatrix) == hall_feasible(p, q, r, 2)
    if isinstance(out, CouplingMatrix):
        assert out.audit(p, q, r) == []
    else:
        assert out.verify(p, q, r)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)), st.integers(0, 20), max_size=25))
def test_max_flow_matches_networkx(arcs):
    arcs = {(a, b): c for (a, b), c in arcs.items() if a != b}
    value, flow = max_flow(arcs, 0, 6)
    g = nx.DiGraph()
    g.add_nodes_from([0, 6])
    for (a, b), c in arcs.items():
        g.add_edge(a, b, capacity=c)
    assert value == nx.maximum_flow_value(g, 0, 6)
    for arc, f in flow.items():
        assert 0 <= f <= arcs[arc]
    for node in range(1, 6):
        inflow = sum(f for (a, b), f in flow.items() if b == node)
        outflow = sum(f for (a, b), f in flow.items() if a == node)
        assert inflow == outflow


def test_solver_at_depth_six_is_fast():
    import time

    start = time.perf_counter()
    m = solve_coupling(HALF, bernoulli(Fraction(1, 3)), domination(), 6)
    assert time.perf_counter() - start < 60
    assert m.audit(HALF, bernoulli(Fraction(1, 3)), domination()) == []


# class witnesses -----------------------------------------------------------------------

def test_class_witness_examples():
    w = class_witness(uniform(), full(), 1)
    assert w.entries == {("0", "0"): Fraction(1, 2), ("1", "0"): Fraction(1, 2)}
    p = bernoulli(Fraction(1, 3))
    w = class_witness(p, equality(), 2)
    assert w.entries == {(u, u): p.mass(u) for u in strings(2)}
    with pytest.raises(TotalityViolation):
        class_witness(uniform(), empty(), 1)


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_class_witness_rows_when_total(name):
    r = BUILTIN[name]()
    p = bernoulli(Fraction(2, 5))
    for n in range(1, 6):  # totality is a condition from depth 1 on
        if not check_conditions(r, n).ok:
            with pytest.raises(TotalityViolation):
                class_witness(p, r, n)
            continue
        w = class_witness(p, r, n)
        assert w.audit(p, None, r) == []


def test_paths_witness_on_tree_measure():
    p = tree_code_measure(3)
    r = paths_relation()
    w = class_witness(p, r, 3)
    assert w.audit(p, None, r) == []
    cols = w.col_sums()
    assert sum(cols.values()) == 1


# relation files ------------------------------------------------------------------------

def test_load_relation(tmp_path):
    path = tmp_path / "rel.txt"
    path.write_text("# tiny\n0 - -\n1 0 0\n1 1 0\n1 1 1\n")
    r = load_relation(path)
    assert r.name == "rel"
    assert r("1", "1") and not r("0", "1")
    assert check_conditions(r, 1).ok
    with pytest.raises(ValueError):
        r("00", "00")
    path.write_text("1 0 00\n")
    with pytest.raises(ValueError):
        load_relation(path)
