import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import EXAMPLE1_SETS, example1_labels
from tabshapley.errors import TooManyPlayers
from tabshapley.shapley import (
    GameOracle,
    attribute_game,
    build_evidence_sets,
    characteristic_attributes,
    compute_scores,
    find_superadditivity_violation,
    rank_ascending,
    record_game,
    shapley_attributes,
    shapley_attributes_weighted,
    shapley_brute_force,
    shapley_records,
    shapley_records_weighted,
    verify_superadditive,
    weighted_attribute_game,
)
from tabshapley.table import ErrorMatrix, LabelMatrix


def permutation_shapley(n, v):
    """Average marginal contribution over all n! orders, in exact rationals."""
    totals = [Fraction(0)] * n
    for order in itertools.permutations(range(n)):
        before = frozenset()
        for p in order:
            totals[p] += Fraction(v(before | {p})) - Fraction(v(before))
            before = before | {p}
    return [t / math.factorial(n) for t in totals]


def union_size(sets):
    return lambda s: len(set().union(*(sets[j] for j in s))) if s else 0


EX1_ATTR = [Fraction(4, 3), Fraction(1), Fraction(5, 3), Fraction(7, 6), Fraction(5, 6)]
EX1_REC = [Fraction(31, 30), Fraction(5, 6), Fraction(13, 15), Fraction(9, 20), Fraction(31, 30), Fraction(47, 60)]


def test_oracle_frozen_values_for_example1():
    # the frozen expectations below come from this enumeration
    assert permutation_shapley(5, union_size(EXAMPLE1_SETS)) == EX1_ATTR
    record_sets = {i: {j for j, recs in EXAMPLE1_SETS.items() if i in recs} for i in range(6)}
    assert permutation_shapley(6, union_size(record_sets)) == EX1_REC


def test_evidence_sets_example1(ex1):
    ev = build_evidence_sets(ex1)
    assert [set(s) for s in ev.attribute_sets] == [EXAMPLE1_SETS[j] for j in range(5)]
    assert ev.record_na_count.tolist() == [4, 3, 3, 2, 4, 3]
    assert ev.attribute_na_count.tolist() == [4, 3, 5, 4, 3]


def test_evidence_sets_extremes():
    ev = build_evidence_sets(LabelMatrix(np.ones((3, 2), bool)))
    assert all(not s for s in ev.attribute_sets)
    ev = build_evidence_sets(LabelMatrix(np.zeros((3, 2), bool)))
    assert all(s == {0, 1, 2} for s in ev.attribute_sets)


def test_characteristic(ex1):
    ev = build_evidence_sets(ex1)
    assert characteristic_attributes({1}, ev) == 3
    assert characteristic_attributes({0, 2}, ev) == 6
    assert characteristic_attributes(set(), ev) == 0


def test_closed_form_example1(ex1):
    ev = build_evidence_sets(ex1)
    phi = shapley_attributes(ev)
    np.testing.assert_allclose(phi, [float(x) for x in EX1_ATTR], atol=1e-9, rtol=0)
    # two-decimal values for C1, C2, C3, C5, rounded or truncated
    for j, expected in [(0, 1.33), (1, 1.0), (2, 1.66), (4, 0.83)]:
        two_decimals = (round(phi[j], 2), math.floor(phi[j] * 100) / 100)
        assert min(abs(x - expected) for x in two_decimals) <= 0.005
    assert abs(phi[3] - 1.33) > 0.1  # 1.33 for C4 would break efficiency
    assert phi.sum() == pytest.approx(6, abs=1e-9)
    np.testing.assert_allclose(shapley_records(ev), [float(x) for x in EX1_REC], atol=1e-9, rtol=0)


def test_null_players_and_single_cell():
    ev = build_evidence_sets(LabelMatrix(np.ones((4, 3), bool)))
    assert shapley_attributes(ev).tolist() == [0, 0, 0]
    pa = np.ones((4, 3), bool)
    pa[2, 1] = False
    assert shapley_records(build_evidence_sets(LabelMatrix(pa))).tolist() == [0, 0, 1, 0]


def test_all_na_records_share_evenly():
    ev = build_evidence_sets(LabelMatrix(np.zeros((4, 6), bool)))
    np.testing.assert_allclose(shapley_records(ev), [6 / 4] * 4)


def test_weighted_reduces_to_unweighted(ex1):
    ev = build_evidence_sets(ex1)
    e = ErrorMatrix(np.full(ex1.shape, 2.5))
    np.testing.assert_allclose(shapley_attributes_weighted(ev, e), shapley_attributes(ev), atol=1e-12, rtol=0)
    np.testing.assert_allclose(shapley_records_weighted(ev, e), shapley_records(ev), atol=1e-12, rtol=0)


def test_weighted_two_attribute_example():
    ev = build_evidence_sets(LabelMatrix([[False, False]]))
    e = ErrorMatrix([[1.0, 3.0]])
    np.testing.assert_allclose(shapley_attributes_weighted(ev, e), [0.25, 0.75])
    exact = shapley_brute_force(weighted_attribute_game(ev, e), exact=True)
    assert exact == [Fraction(1, 4), Fraction(3, 4)]


def test_weighted_zero_error_record_contributes_nothing():
    ev = build_evidence_sets(LabelMatrix([[False, False], [False, True]]))
    e = ErrorMatrix([[0.0, 0.0], [2.0, 5.0]])
    np.testing.assert_allclose(shapley_attributes_weighted(ev, e), [1.0, 0.0])


def test_brute_force_small_games():
    assert shapley_brute_force(GameOracle(1, lambda s: 5)).tolist() == [5]
    two = {frozenset({0}): 1, frozenset({1}): 1, frozenset({0, 1}): 3}
    g = GameOracle(2, lambda s: two[s])
    assert shapley_brute_force(g).tolist() == [1.5, 1.5]
    assert shapley_brute_force(g, exact=True) == [Fraction(3, 2), Fraction(3, 2)]


def test_brute_force_player_cap():
    with pytest.raises(TooManyPlayers):
        shapley_brute_force(GameOracle(13, lambda s: len(s)))
    with pytest.raises(TooManyPlayers):
        verify_superadditive(GameOracle(13, lambda s: len(s)))


def test_brute_force_matches_closed_form_example1(ex1):
    ev = build_evidence_sets(ex1)
    np.testing.assert_allclose(shapley_brute_force(attribute_game(ev)), shapley_attributes(ev), atol=1e-9, rtol=0)
    assert shapley_brute_force(attribute_game(ev), exact=True) == EX1_ATTR
    assert shapley_brute_force(record_game(ev), exact=True) == EX1_REC


def test_superadditivity_check():
    bad = {frozenset({0}): 2, frozenset({1}): 2, frozenset({0, 1}): 1}
    assert not verify_superadditive(GameOracle(2, lambda s: bad[s]))
    assert verify_superadditive(GameOracle(3, lambda s: 0))
    assert verify_superadditive(GameOracle(3, lambda s: len(s) ** 2))


def test_union_game_of_example1_is_not_superadditive(ex1):
    # |A u B| <= |A| + |B|: overlapping evidence sets make the union game subadditive
    g = attribute_game(build_evidence_sets(ex1))
    assert not verify_superadditive(g)
    s, r = find_superadditivity_violation(g)
    assert not s & r
    assert g.value(s | r) < g.value(s) + g.value(r)
    assert g.value({0, 2}) == 6 < g.value({0}) + g.value({2}) == 9


def test_union_game_superadditive_only_with_disjoint_sets():
    # every record has at most one NA cell, so evidence sets are disjoint
    pa = np.ones((5, 3), bool)
    for i, j in [(0, 0), (1, 0), (2, 1), (4, 2)]:
        pa[i, j] = False
    assert verify_superadditive(attribute_game(build_evidence_sets(LabelMatrix(pa))))


def test_rank_ascending():
    assert rank_ascending([2, 1, 1]).tolist() == [1, 2, 0]
    assert rank_ascending([]).tolist() == []
    assert rank_ascending([float(x) for x in EX1_ATTR]).tolist() == [4, 1, 3, 0, 2]


label_matrices = st.tuples(st.integers(1, 12), st.integers(1, 8), st.integers(0, 2**32 - 1)).map(
    lambda t: LabelMatrix(np.random.default_rng(t[2]).random((t[0], t[1])) < np.random.default_rng(t[2] + 1).random())
)


@settings(max_examples=60, deadline=None)
@given(label_matrices)
def test_axioms(labels):
    ev = build_evidence_sets(labels)
    phi = shapley_attributes(ev)
    psi = shapley_records(ev)
    assert phi.sum() == pytest.approx(ev.na.any(axis=1).sum(), abs=1e-9)
    assert psi.sum() == pytest.approx(ev.na.any(axis=0).sum(), abs=1e-9)
    assert np.all(phi >= 0) and np.all(phi <= ev.attribute_na_count + 1e-12)
    for j in range(labels.shape[1]):
        if not ev.attribute_sets[j]:
            assert phi[j] == 0
        for k in range(j + 1, labels.shape[1]):
            if ev.attribute_sets[j] == ev.attribute_sets[k]:
                assert phi[j] == phi[k]


@settings(max_examples=40, deadline=None)
@given(label_matrices, st.data())
def test_adding_single_na_record_adds_one(labels, data):
    j = data.draw(st.integers(0, labels.shape[1] - 1))
    row = np.ones((1, labels.shape[1]), bool)
    row[0, j] = False
    before = shapley_attributes(build_evidence_sets(labels))
    after = shapley_attributes(build_evidence_sets(LabelMatrix(np.vstack([labels.pa, row]))))
    delta = after - before
    assert delta[j] == pytest.approx(1, abs=1e-9)
    assert np.allclose(np.delete(delta, j), 0, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(label_matrices, st.integers(-20, 20), st.integers(0, 2**32 - 1))
def test_weighted_ranking_scale_invariant(labels, exponent, seed):
    ev = build_evidence_sets(labels)
    e = np.random.default_rng(seed).exponential(size=labels.shape)
    base = rank_ascending(shapley_attributes_weighted(ev, ErrorMatrix(e)))
    scaled = rank_ascending(shapley_attributes_weighted(ev, ErrorMatrix(e * 2.0**exponent)))
    assert np.array_equal(base, scaled)


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.integers(1, 6), st.integers(1, 5), st.integers(0, 2**32 - 1)))
def test_weighted_matches_brute_force(t):
    n, m, seed = t
    rng = np.random.default_rng(seed)
    labels = LabelMatrix(rng.random((n, m)) < 0.4)
    ev = build_evidence_sets(labels)
    e = ErrorMatrix(rng.exponential(size=(n, m)))
    np.testing.assert_allclose(
        shapley_brute_force(weighted_attribute_game(ev, e)), shapley_attributes_weighted(ev, e), atol=1e-9, rtol=0
    )


def test_compute_scores_flags(ex1):
    ev = build_evidence_sets(ex1)
    assert not compute_scores(ev).weighted
    assert compute_scores(ev, ErrorMatrix(np.ones(ex1.shape)), weighted=True).weighted
    with pytest.raises(ValueError):
        compute_scores(ev, None, weighted=True)
