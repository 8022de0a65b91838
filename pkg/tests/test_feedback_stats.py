"""Conditional statistics, cross probabilities, and the objective forms."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onebit import (
    ConditionalStats,
    OrderingError,
    ThresholdAssignment,
    UserProfile,
    conditional_means,
    expected_user_rate,
    make_rayleigh_rate,
    omega,
    phi_ordered,
    phi_region,
    scheduling_probabilities,
    weighted_sum_rate,
)
from onebit.feedback_stats import check_interleaved_ordering


def stats_at(profiles, thresholds):
    return [conditional_means(p.dist, r) for p, r in zip(profiles, thresholds)]


# ---------------------------------------------------------------------------
# conditional_means
# ---------------------------------------------------------------------------


def test_zero_threshold_conventions():
    d = make_rayleigh_rate(0.0)
    s = conditional_means(d, 0.0)
    assert s.cdf_at_threshold == 0.0
    assert s.below_mean == 0.0
    assert s.above_mean == pytest.approx(d.mean(), abs=1e-9)


def test_saturated_threshold_convention():
    d = make_rayleigh_rate(0.0)
    r = d.tail_rate(1e-15)
    s = conditional_means(d, r)
    assert 1.0 - s.cdf_at_threshold < 1e-14
    assert s.above_mean == r


def test_total_expectation_identity_at_unit_snr():
    d = make_rayleigh_rate(0.0)
    s = conditional_means(d, 1.0)
    assert s.cdf_at_threshold == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
    total = s.cdf_at_threshold * s.below_mean + (1.0 - s.cdf_at_threshold) * s.above_mean
    assert total == pytest.approx(0.8603473822708868, abs=1e-8)


@pytest.mark.parametrize("snr_db", [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0])
@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0, 4.0])
def test_total_expectation_identity_grid(snr_db, r):
    d = make_rayleigh_rate(snr_db)
    s = conditional_means(d, r)
    total = s.cdf_at_threshold * s.below_mean + (1.0 - s.cdf_at_threshold) * s.above_mean
    assert total == pytest.approx(d.mean(), abs=1e-8)


def test_conditional_means_bracket_threshold():
    d = make_rayleigh_rate(10.0)
    for r in (0.3, 1.0, 2.5, 6.0):
        s = conditional_means(d, r)
        assert s.below_mean < r < s.above_mean


def test_negative_threshold_rejected():
    with pytest.raises(ValueError):
        conditional_means(make_rayleigh_rate(0.0), -0.1)


# ---------------------------------------------------------------------------
# omega
# ---------------------------------------------------------------------------


S_J = ConditionalStats(threshold=1.0, cdf_at_threshold=0.4, below_mean=1.0, above_mean=2.0)
S_I = ConditionalStats(threshold=1.0, cdf_at_threshold=0.5, below_mean=3.0, above_mean=4.0)


def test_omega_dominant_branch():
    # mu_i R_i^- = 6 beats mu_j R_j^+ = 2
    assert omega(S_I, S_J, "below", 2.0, 1.0) == 1.0


def test_omega_middle_branch_returns_cdf():
    # mu_j R_j^- = 1 < mu_i R_i^+ = 1.6 < mu_j R_j^+ = 2
    assert omega(S_I, S_J, "above", 0.4, 1.0) == 0.4


def test_omega_dominated_branch():
    # mu_i R_i^+ = 0.8 < mu_j R_j^- = 1
    assert omega(S_I, S_J, "above", 0.2, 1.0) == 0.0


def test_omega_tie_resolution():
    # equal upper values: lower index wins the tie
    tied = ConditionalStats(threshold=1.0, cdf_at_threshold=0.4, below_mean=1.0, above_mean=4.0)
    assert omega(S_I, tied, "above", 1.0, 1.0, i_wins_ties=True) == 1.0
    assert omega(S_I, tied, "above", 1.0, 1.0, i_wins_ties=False) == 0.4


def test_omega_invalid_side():
    with pytest.raises(ValueError):
        omega(S_I, S_J, "sideways", 1.0, 1.0)


# ---------------------------------------------------------------------------
# expected_user_rate / weighted_sum_rate
# ---------------------------------------------------------------------------


def test_single_user_rate_is_the_mean():
    d = make_rayleigh_rate(7.0)
    s = [conditional_means(d, 1.7)]
    assert expected_user_rate(0, s, [1.3]) == pytest.approx(d.mean(), abs=1e-8)
    assert weighted_sum_rate(s, [1.3]) == pytest.approx(1.3 * d.mean(), abs=1e-8)


def test_never_scheduled_user_has_zero_rate():
    # user 0 dominates user 1 in both bit states
    s0 = ConditionalStats(threshold=2.0, cdf_at_threshold=0.5, below_mean=5.0, above_mean=9.0)
    s1 = ConditionalStats(threshold=0.5, cdf_at_threshold=0.5, below_mean=0.1, above_mean=0.2)
    assert expected_user_rate(1, [s0, s1], [1.0, 1.0]) == 0.0


def test_two_user_closed_form_cross_check():
    """Cross probabilities vs the rewritten closed form on the first region:

    Phi = mu_1 m_1 + (mu_2 R_2^+ - mu_1 R_1^-) F_1 (1 - F_2).
    """
    profiles = (UserProfile(1.1, make_rayleigh_rate(10.0)), UserProfile(1.05, make_rayleigh_rate(10.0)))
    thresholds = (3.4, 2.2)  # interior of the first region
    stats = stats_at(profiles, thresholds)
    check_interleaved_ordering(stats, [1.1, 1.05])
    f1, f2 = stats[0].cdf_at_threshold, stats[1].cdf_at_threshold
    closed = 1.1 * profiles[0].dist.mean() + (
        1.05 * stats[1].above_mean - 1.1 * stats[0].below_mean
    ) * f1 * (1.0 - f2)
    assert weighted_sum_rate(stats, [1.1, 1.05]) == pytest.approx(closed, abs=1e-10)


def test_scheduling_probabilities_sum_to_one():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = int(rng.integers(2, 6))
        profiles = [
            UserProfile(float(rng.uniform(0.5, 2.0)), make_rayleigh_rate(float(rng.uniform(-5, 20))))
            for _ in range(m)
        ]
        thr = [float(rng.uniform(0.1, 4.0)) for _ in range(m)]
        probs = scheduling_probabilities(stats_at(profiles, thr), [p.weight for p in profiles])
        assert math.fsum(probs) == pytest.approx(1.0, abs=1e-10)
        assert all(p >= 0.0 for p in probs)


@given(scale=st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=50, deadline=None)
def test_weighted_sum_rate_homogeneity(scale):
    profiles = (UserProfile(1.1, make_rayleigh_rate(10.0)), UserProfile(1.05, make_rayleigh_rate(6.0)))
    stats = stats_at(profiles, (2.0, 1.5))
    base_w = [1.1, 1.05]
    phi = weighted_sum_rate(stats, base_w)
    scaled = weighted_sum_rate(stats, [scale * w for w in base_w])
    assert scaled == pytest.approx(scale * phi, rel=1e-12)


def test_length_mismatch_rejected():
    s = [conditional_means(make_rayleigh_rate(0.0), 1.0)]
    with pytest.raises(ValueError):
        weighted_sum_rate(s, [1.0, 2.0])
    with pytest.raises(IndexError):
        expected_user_rate(3, s, [1.0])


# ---------------------------------------------------------------------------
# phi_ordered / phi_region
# ---------------------------------------------------------------------------


def interleaved_instance(rng, m):
    """Random instance satisfying the interleaved chain: shared rate law,
    gently descending weights, common threshold."""
    snr_db = float(rng.uniform(0.0, 15.0))
    weights = sorted((float(rng.uniform(1.0, 1.25)) for _ in range(m)), reverse=True)
    profiles = [UserProfile(w, make_rayleigh_rate(snr_db)) for w in weights]
    thr = [float(rng.uniform(0.8, 2.0))] * m
    return profiles, thr


@pytest.mark.parametrize("m", [2, 3, 4])
def test_phi_ordered_equals_weighted_sum_rate(m):
    rng = np.random.default_rng(m)
    hits = 0
    while hits < 10:
        profiles, thr = interleaved_instance(rng, m)
        stats = stats_at(profiles, thr)
        w = [p.weight for p in profiles]
        try:
            check_interleaved_ordering(stats, w)
        except OrderingError:
            continue
        hits += 1
        assert phi_ordered(stats, w) == pytest.approx(weighted_sum_rate(stats, w), abs=1e-10)


def test_phi_ordered_names_first_violation():
    profiles = [UserProfile(w, make_rayleigh_rate(8.0)) for w in (1.1, 1.05)]
    stats = stats_at(profiles, (0.2, 3.0))
    with pytest.raises(OrderingError, match=r"mu_1\*R_1"):
        phi_ordered(stats, [1.1, 1.05])


def test_phi_region_identity_matches_phi_ordered():
    profiles = [UserProfile(w, make_rayleigh_rate(8.0)) for w in (1.1, 1.05, 1.0)]
    thr = [2.0, 2.0, 2.0]
    stats = stats_at(profiles, thr)
    w = [p.weight for p in profiles]
    assert phi_region(profiles, thr, (0, 1, 2)) == pytest.approx(phi_ordered(stats, w), abs=1e-14)


def test_phi_region_swapped_two_user_closed_form():
    """Second-region closed form with roles swapped."""
    profiles = (UserProfile(1.1, make_rayleigh_rate(10.0)), UserProfile(1.05, make_rayleigh_rate(10.0)))
    thr = (2.2, 3.76)  # interior of the swapped region
    stats = stats_at(profiles, thr)
    check_interleaved_ordering([stats[1], stats[0]], [1.05, 1.1])
    f1, f2 = stats[0].cdf_at_threshold, stats[1].cdf_at_threshold
    closed = (
        1.05 * stats[1].above_mean * (1.0 - f2)
        + 1.1 * stats[0].above_mean * f2 * (1.0 - f1)
        + 1.05 * stats[1].below_mean * f1 * f2
    )
    assert phi_region(profiles, thr, (1, 0)) == pytest.approx(closed, abs=1e-10)
    assert phi_region(profiles, thr, (1, 0)) == pytest.approx(
        weighted_sum_rate(stats, [1.1, 1.05]), abs=1e-10
    )


@pytest.mark.parametrize("m", [2, 3, 4])
def test_matching_permutation_recovers_the_objective(m):
    rng = np.random.default_rng(100 + m)
    profiles, thr = interleaved_instance(rng, m)
    stats = stats_at(profiles, thr)
    w = [p.weight for p in profiles]
    check_interleaved_ordering(stats, w)
    phi_true = weighted_sum_rate(stats, w)
    values = {perm: phi_region(profiles, thr, perm) for perm in itertools.permutations(range(m))}
    assert values[tuple(range(m))] == pytest.approx(phi_true, abs=1e-10)


def test_phi_region_rejects_bad_permutation():
    profiles = [UserProfile(1.0, make_rayleigh_rate(5.0))] * 2
    with pytest.raises(ValueError):
        phi_region(profiles, [1.0, 1.0], (0, 0))


def test_threshold_assignment_validation():
    with pytest.raises(ValueError):
        ThresholdAssignment(thresholds=(-1.0,), ordering=(0,), phi=0.0)
    with pytest.raises(ValueError):
        ThresholdAssignment(thresholds=(1.0, 2.0), ordering=(0, 0), phi=0.0)
