from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdm.core import all_slots, class_of
from bdm.gamma import (
    GammaQuery,
    drain_slack,
    epsilon,
    gamma_closed,
    gamma_closed_normalized,
    gamma_closed_total,
    gamma_enumerated,
    gamma_enumerated_slot,
    mean_deviation,
    mean_of_means,
    theta_floor,
    theta_lower_check,
    witness_check,
)
from bdm.mass import enumerate_states
from bdm.partitions import partition_gf


def test_epsilon_examples():
    assert epsilon(-1, 1, 1, 1) == 1
    assert epsilon(1, 1, 1, 1) == 0
    for M in range(1, 5):
        for h in range(1, M + 1):
            for delta in range(-M, M + 2):
                assert epsilon(0, delta, h, M) == min(epsilon(1, delta, h, M), epsilon(-1, delta, h, M))
    with pytest.raises(ValueError):
        epsilon(1, 1, 3, 2)


def test_query_validation():
    assert GammaQuery(2, 2, 1, 3, -2).delta == 2
    with pytest.raises(ValueError):
        GammaQuery(2, 2, 3, 1, 0)
    with pytest.raises(ValueError):
        GammaQuery(1, 2, 0, 1, 0)


def test_closed_examples():
    assert gamma_closed(GammaQuery(2, 1, 1, 2, 0)) == Fraction(1, 2)
    assert gamma_closed(GammaQuery(2, 1, 1, 2, -1)) == Fraction(1, 4)
    assert gamma_closed(GammaQuery(2, 1, 1, 2, 1)) == Fraction(1, 8)


def test_enumerated_examples():
    lower, tail = gamma_enumerated(GammaQuery(2, 1, 1, 2, 0), 10)
    assert lower == Fraction(1, 2)
    assert 0 < tail < Fraction(1, 2**8)
    enum = gamma_enumerated_slot(2, 2, 0, 1, 20)
    assert sum(enum.values()) <= 1


@pytest.mark.parametrize("M", [1, 2, 3, 4])
@pytest.mark.parametrize("q", [2, 3, 5])
def test_normalization_exact(M, q):
    for T, t in all_slots(M):
        assert gamma_closed_total(q, M, T, t) == 1


@pytest.mark.parametrize("M", [1, 2, 3, 4])
def test_layouts_agree(M):
    for q in (2, 3, 7):
        for T, t in all_slots(M):
            for d in range(-3, 4):
                gq = GammaQuery(q, M, T, t, d)
                assert gamma_closed(gq) == gamma_closed_normalized(gq)


@pytest.mark.parametrize("M", [1, 2, 3, 4, 5])
def test_closed_antisymmetry(M):
    for q in (2, 3):
        for T in range(M + 1):
            for d in range(-4, 5):
                assert gamma_closed(GammaQuery(q, M, T, M + 1, d)) == gamma_closed(GammaQuery(q, M, M - T, M + 1, -d))


@pytest.mark.parametrize("M,K", [(1, 30), (2, 24), (3, 18)])
def test_enumerated_antisymmetry_termwise(M, K):
    for q in (2, 3):
        for T in range(M + 1):
            a = gamma_enumerated_slot(q, M, T, M + 1, K)
            b = gamma_enumerated_slot(q, M, M - T, M + 1, K)
            assert a == {-d: v for d, v in b.items()}


def _char_poly(roots):
    coeffs = [Fraction(1)]
    for r in roots:
        coeffs = [a - r * b for a, b in zip(coeffs + [0], [0] + coeffs)]
    return coeffs  # coeffs[j] multiplies x^(len(roots) - j)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.sampled_from([2, 3, 4, 5]), st.data())
def test_closed_depends_on_sign_and_size_only(M, q, data):
    # for fixed sign, k -> gamma(sign * k) is a sum of M geometric sequences with
    # ratios q^(-h(M+1)), so it satisfies the matching order-M recurrence
    T = data.draw(st.integers(0, M))
    t = data.draw(st.integers(1, M + 1))
    sign = data.draw(st.sampled_from([1, -1]))
    poly = _char_poly([Fraction(1, q ** (h * (M + 1))) for h in range(1, M + 1)])
    vals = [gamma_closed(GammaQuery(q, M, T, t, sign * k)) for k in range(1, 2 * M + 3)]
    for start in range(len(vals) - M):
        window = vals[start : start + M + 1]
        assert sum(c * v for c, v in zip(poly, reversed(window))) == 0
    assert all(v > 0 for v in vals)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.data())
def test_closed_depends_on_slot_through_delta(M, data):
    # slots with the same t - T give the same value
    T1, T2 = data.draw(st.integers(0, M)), data.draw(st.integers(0, M))
    delta = data.draw(st.integers(max(1 - T1, 1 - T2), min(M + 1 - T1, M + 1 - T2)))
    d = data.draw(st.integers(-4, 4))
    assert gamma_closed(GammaQuery(2, M, T1, T1 + delta, d)) == gamma_closed(GammaQuery(2, M, T2, T2 + delta, d))


@pytest.mark.parametrize("M,q,K", [(1, 5, 30), (2, 5, 24), (4, 2, 20), (4, 3, 16)])
def test_closed_inside_enumeration_bracket_outside_acceptance_range(M, q, K):
    for T, t in all_slots(M):
        enum = gamma_enumerated_slot(q, M, T, t, K)
        _, tail = gamma_enumerated(GammaQuery(q, M, T, t, 0), K)
        for d in range(-3, 4):
            lower = enum.get(d, Fraction(0))
            assert lower <= gamma_closed(GammaQuery(q, M, T, t, d)) <= lower + tail


@pytest.mark.parametrize("M,K", [(1, 30), (2, 24), (3, 18), (4, 14)])
def test_drain_slack_holds_on_census(M, K):
    c = drain_slack(M)
    for T, t in all_slots(M):
        for s in enumerate_states(M, T, t, K).states:
            assert class_of(s) >= abs(s.d) * (M + 1) - c


def test_mean_deviation_examples():
    value, bound = mean_deviation(2, 2, 1, 30)
    assert value == 0 and bound > 0
    for M in (1, 2, 3):
        for T in range(M + 1):
            a, _ = mean_deviation(3, M, T, 20)
            b, _ = mean_deviation(3, M, M - T, 20)
            assert a + b == 0
        mm, bound = mean_of_means(2, M, 20)
        assert abs(mm) <= bound


def test_mean_deviation_bound_covers_deeper_census():
    shallow, bound = mean_deviation(2, 2, 0, 16)
    deep, _ = mean_deviation(2, 2, 0, 40)
    assert abs(deep - shallow) <= bound


def test_mean_deviation_requires_valid_T():
    with pytest.raises(ValueError):
        mean_deviation(2, 2, 3, 10)


def test_theta_examples():
    gq = GammaQuery(2, 1, 1, 2, -1)
    assert theta_floor(gq) == Fraction(1, 8)
    assert theta_lower_check(gq, 10)
    assert theta_lower_check(GammaQuery(2, 1, 1, 2, 0), 10)


def test_theta_floor_fails_where_class_zero_state_has_negative_drain():
    # at (T, t) = (1, 1) the class-0 state has d = -1, so gamma(0) is a quarter, not a half
    gq = GammaQuery(2, 1, 1, 1, 0)
    assert gamma_enumerated(gq, 20)[0] == Fraction(1, 4)
    assert not theta_lower_check(gq, 20)


def test_witness_check_reports_both_routes():
    w = witness_check(GammaQuery(2, 1, 1, 2, -1))
    assert w.formula_holds and w.certifies_floor
    w = witness_check(GammaQuery(2, 1, 1, 1, 1))
    assert w.actual_class == 3 and w.claimed_class == 1
    assert not w.formula_holds and not w.certifies_floor


def test_closed_sums_match_stationary_normalization():
    # closed form at d, summed, equals 1; the enumerated sum approaches it from below
    M, q, K = 2, 3, 30
    for T, t in all_slots(M):
        total_enum = sum(gamma_enumerated_slot(q, M, T, t, K).values())
        assert total_enum <= 1
        assert 1 - total_enum <= gamma_enumerated(GammaQuery(q, M, T, t, 0), K)[1]
    assert partition_gf(M, q) > 1
