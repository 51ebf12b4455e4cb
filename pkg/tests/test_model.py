import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clustergibbs import graphkit, lattice
from clustergibbs.errors import InvalidInputError
from clustergibbs.model import (
    CylinderEvent,
    SiteDistribution,
    build_custom,
    build_ising,
    build_potts,
    event_from_config,
    event_probability_p0,
    model_from_config,
)


def test_site_distribution_validation():
    SiteDistribution.make([1, 2], [0.25, 0.75])
    with pytest.raises(InvalidInputError):
        SiteDistribution.make([1, 1], [0.5, 0.5])
    with pytest.raises(InvalidInputError):
        SiteDistribution.make([1, 2], [0.5, 0.6])
    with pytest.raises(InvalidInputError):
        SiteDistribution.make([1, 2], [-0.1, 1.1])


def test_potts_builder():
    m = build_potts(1, 0.0, 2, 1.0)
    assert all(not term.table.any() for term in m.terms_within(lattice.cube(2, 1)))
    m = build_potts(2, 0.3, 3, [1.0, -0.5])
    assert m.site((0, 0)).prob_of([2]) == pytest.approx(1 / 3)
    horiz = m.term([(0, 0), (1, 0)]).table
    vert = m.term([(0, 0), (0, 1)]).table
    assert horiz[1, 1] == pytest.approx(0.3) and horiz[0, 2] == 0
    assert vert[2, 2] == pytest.approx(-0.15) and vert[2, 0] == 0
    with pytest.raises(InvalidInputError):
        build_potts(1, 0.1, 3, 1.5)


def test_ising_builder():
    assert build_ising(1, 0.1, 1.0, 0.0).site((0,)).prob_of([1]) == 0.5
    p_plus = build_ising(1, 0.1, 1.0, 1.0).site((0,)).prob_of([1])
    assert p_plus == pytest.approx(math.exp(-1) / (math.e + math.exp(-1)))
    assert p_plus == pytest.approx(0.11920292202211755)
    m = build_ising(2, 0.2, [1.0, 0.5], {(0, 0): 0.3})
    assert np.max(np.abs(m.term([(0, 0), (1, 0)]).table)) == pytest.approx(0.2)
    assert np.max(np.abs(m.term([(0, 0), (0, 1)]).table)) == pytest.approx(0.1)
    assert m.site((0, 0)).prob_of([1]) < 0.5 and m.site((5, 5)).prob_of([1]) == 0.5
    with pytest.raises(InvalidInputError):
        build_ising(1, 0.1, -1.01)


def test_custom_builder_validation():
    site = SiteDistribution.make([0, 1], [0.5, 0.5])
    with pytest.raises(InvalidInputError):
        build_custom(1, 1, 0.1, site, [([(0,), (2,)], np.zeros((2, 2)), False)])
    free = build_custom(1, 1, 0.0, site, [])
    assert free.terms_within(lattice.cube(3, 1)) == []
    with pytest.raises(InvalidInputError):
        build_custom(1, 1, 0.1, site, [([(0,), (1,)], np.full((2, 2), 0.1 + 1e-9), False)])
    with pytest.raises(InvalidInputError):
        build_custom(1, 1, 0.1, site, [([(0,), (1,)], np.zeros((2, 3)), False)])


@pytest.mark.parametrize("builder", [
    lambda: build_ising(2, 0.07, [1.0, -1.0], 0.4),
    lambda: build_potts(2, 0.05, 4, [0.3, -1.0]),
    lambda: model_from_config({"nu": 1, "r": 2, "lambda": 1e-6, "model": "custom",
                               "sites": {"support": [0, 1], "probs": [0.5, 0.5]},
                               "terms": [{"points": [[0], [2]], "translate": True,
                                          "table": [[[0, 0], 1e-6], [[0, 1], 0], [[1, 0], 0],
                                                    [[1, 1], -1e-6]]}]}),
])
def test_potential_bound_on_window(builder):
    m = builder()
    window = lattice.cube(3, m.nu)
    for term in m.terms_within(window):
        assert np.max(np.abs(term.table)) <= m.lam
        assert 1 <= graphkit.size_of(term.support) <= m.r


def test_event_probability_examples():
    A = CylinderEvent.make([(0,)], [{(0,): [1]}])
    assert event_probability_p0(build_ising(1, 0.1), A) == 0.5
    B = CylinderEvent.make([(0,)], [{(0,): [1, 2]}])
    assert event_probability_p0(build_potts(1, 0.1, 4), B) == 0.5
    whole = CylinderEvent.make([(0,), (1,)], [{}])
    assert event_probability_p0(build_potts(1, 0.1, 4), whole) == 1.0
    empty = CylinderEvent.make([(0,)], [])
    assert event_probability_p0(build_potts(1, 0.1, 4), empty) == 0.0


def _indicator_mean(model, A):
    ind = A.indicator(model).table
    probs = [model.site(t).weights for t in A.base]
    return float(np.einsum(ind, list(range(len(probs))),
                           *[x for i, p in enumerate(probs) for x in (p, [i])], []))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_inclusion_exclusion_matches_indicator(data):
    q = data.draw(st.integers(2, 4))
    model = build_potts(1, 0.1, q)
    base = [(0,), (1,), (2,)]
    clause = st.dictionaries(st.sampled_from(base),
                             st.sets(st.integers(1, q), min_size=1), max_size=3)
    clauses = data.draw(st.lists(clause, max_size=4))
    A = CylinderEvent.make(base, clauses)
    assert event_probability_p0(model, A) == pytest.approx(_indicator_mean(model, A), abs=1e-14)


def test_disjoint_additivity_and_independence():
    m = build_ising(1, 0.1, 1.0, 0.3)
    a = CylinderEvent.make([(0,), (1,)], [{(0,): [1], (1,): [1]}])
    b = CylinderEvent.make([(0,), (1,)], [{(0,): [-1]}])
    ab = CylinderEvent.make([(0,), (1,)], [{(0,): [1], (1,): [1]}, {(0,): [-1]}])
    p = event_probability_p0
    assert p(m, ab) == pytest.approx(p(m, a) + p(m, b), abs=1e-15)
    s = CylinderEvent.make([(0,)], [{(0,): [1]}])
    t = CylinderEvent.make([(1,)], [{(1,): [1]}])
    assert p(m, a) == pytest.approx(p(m, s) * p(m, t), abs=1e-15)


def test_event_config_parsing():
    A = event_from_config({"base": [[0], [1]], "clauses": [
        [{"site": [0], "allowed": [1]}, {"site": [1], "allowed": [1]}],
        {"site": [0], "allowed": [-1]},
        [{"site": [1], "allowed": [1]}, {"site": [1], "allowed": [-1]}],
    ]})
    assert len(A.clauses) == 2  # contradictory conjunction dropped
    with pytest.raises(InvalidInputError):
        event_from_config({"base": [[0]], "clauses": [{"site": [3], "allowed": [1]}]})
    with pytest.raises(InvalidInputError):
        event_from_config({"clauses": []})


def test_model_config_kinds():
    m = model_from_config({"nu": 1, "lambda": 0.01, "model": "ising", "fields": [{"site": [0], "h": 1.0}]})
    assert m.site((0,)).prob_of([1]) == pytest.approx(0.11920292202211755)
    assert m.site((1,)).prob_of([1]) == 0.5
    m = model_from_config({"nu": 2, "lambda": 0.01, "model": "potts", "q": 3, "couplings": [1, 0]})
    assert m.term([(0, 0), (0, 1)]).table.sum() == 0
    with pytest.raises(InvalidInputError):
        model_from_config({"nu": 1, "lambda": 0.01, "model": "xy"})
    with pytest.raises(InvalidInputError):
        model_from_config({"nu": 1, "r": 1, "lambda": 0.1, "model": "custom",
                           "sites": {"support": [0, 1], "probs": [0.5, 0.5]},
                           "terms": [{"points": [[0], [1]], "table": [[[0, 0], 0.1]]}]})
