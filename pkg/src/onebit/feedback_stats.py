"""Conditional-rate statistics and the weighted-sum-rate objective.

Given a threshold r_i per user, the base station only learns whether each
user's rate landed above or below its threshold.  Everything the scheduler
can do with that bit is captured by four numbers per user: F_i(r_i) and the
conditional means R_i^- (below) and R_i^+ (above).  This module computes
those statistics and evaluates the objective

    Phi = sum_i mu_i * E[rate of user i under the one-bit scheduler]

in three equivalent formulations: the general cross-probability product
form, the closed form valid on an interleaved priority ordering, and the
per-region relabeled variant of the latter.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

from .distributions import RateDistribution, UserProfile, partial_first_moment

__all__ = [
    "ConditionalStats",
    "OrderingError",
    "ThresholdAssignment",
    "TIE_TOL",
    "conditional_means",
    "expected_user_rate",
    "omega",
    "phi_ordered",
    "phi_region",
    "scheduling_probabilities",
    "weighted_sum_rate",
]

#: two weighted conditional values closer than this are treated as tied and
#: resolved in favor of the lower user index (matches the simulator argmax)
TIE_TOL = 1e-12

#: CDF values closer than this to 0 or 1 trigger the degenerate-threshold
#: conventions R^- := 0 and R^+ := r
DEGENERATE_CDF = 1e-14


class OrderingError(ValueError):
    """An interleaved-priority precondition does not hold."""


@dataclass(frozen=True)
class ConditionalStats:
    """Feedback statistics of one user at one threshold."""

    threshold: float
    cdf_at_threshold: float
    below_mean: float  # E[rate | rate < threshold]
    above_mean: float  # E[rate | rate > threshold]


@dataclass(frozen=True)
class ThresholdAssignment:
    """A threshold vector with the priority region it was optimized in.

    ``ordering[k]`` is the (0-based) user index holding priority rank k.
    When produced by the recursive fixed-point solver, ``raw_thresholds``
    and ``raw_phi`` record the unpolished fixed point.
    """

    thresholds: tuple[float, ...]
    ordering: tuple[int, ...]
    phi: float
    raw_thresholds: tuple[float, ...] | None = None
    raw_phi: float | None = None
    region_ok: bool = True
    max_residual: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if any(r < 0.0 or not math.isfinite(r) for r in self.thresholds):
            raise ValueError(f"thresholds must be finite and >= 0: {self.thresholds}")
        if sorted(self.ordering) != list(range(len(self.thresholds))):
            raise ValueError(f"ordering {self.ordering} is not a permutation")


def conditional_means(dist: RateDistribution, r: float) -> ConditionalStats:
    """Statistics (F(r), R^-, R^+) of one user at threshold r.

    Degenerate conventions: F(r) ~ 0 gives R^- := 0 and F(r) ~ 1 gives
    R^+ := r, which keep the objective continuous at the boundary of the
    threshold domain.
    """
    r = float(r)
    if r < 0.0:
        raise ValueError(f"threshold must be >= 0, got {r}")
    return _conditional_means_cached(dist, r)


@functools.lru_cache(maxsize=1 << 18)
def _conditional_means_cached(dist: RateDistribution, r: float) -> ConditionalStats:
    cdf = float(dist.cdf(r))
    if cdf < DEGENERATE_CDF:
        below = 0.0
    else:
        below = min(partial_first_moment(dist, 0.0, r) / cdf, r)
    if 1.0 - cdf < DEGENERATE_CDF:
        above = r
    else:
        above = max(partial_first_moment(dist, r, math.inf) / (1.0 - cdf), r)
    return ConditionalStats(threshold=r, cdf_at_threshold=cdf, below_mean=below, above_mean=above)


def omega(
    stats_i: ConditionalStats,
    stats_j: ConditionalStats,
    side: Literal["above", "below"],
    mu_i: float,
    mu_j: float,
    *,
    i_wins_ties: bool = True,
) -> float:
    """Probability that user i's weighted conditional value beats user j's.

    ``side`` selects whether user i reported above or below its threshold.
    Branches: 1 when i's value clears even mu_j * R_j^+, F_j(r_j) when it
    only clears mu_j * R_j^-, else 0.  Values within TIE_TOL are tied and go
    to the lower user index; ``i_wins_ties`` says whether that is i.
    """
    if side == "above":
        v_i = mu_i * stats_i.above_mean
    elif side == "below":
        v_i = mu_i * stats_i.below_mean
    else:
        raise ValueError(f"side must be 'above' or 'below', got {side!r}")
    beats_hi = _beats(v_i, mu_j * stats_j.above_mean, i_wins_ties)
    beats_lo = _beats(v_i, mu_j * stats_j.below_mean, i_wins_ties)
    if beats_hi and beats_lo:
        return 1.0
    if beats_lo:
        return stats_j.cdf_at_threshold
    return 0.0


def _beats(v_i: float, v_j: float, i_wins_ties: bool) -> bool:
    if abs(v_i - v_j) <= TIE_TOL:
        return i_wins_ties
    return v_i > v_j


def expected_user_rate(
    i: int, stats: Sequence[ConditionalStats], weights: Sequence[float]
) -> float:
    """Expected scheduled rate of user i under the one-bit scheduler.

    R~_i = R_i^+ (1 - F_i) prod_j omega_ij^+  +  R_i^- F_i prod_j omega_ij^-.
    """
    _check_lengths(stats, weights)
    if not 0 <= i < len(stats):
        raise IndexError(f"user index {i} out of range for {len(stats)} users")
    s_i = stats[i]
    up = s_i.above_mean * (1.0 - s_i.cdf_at_threshold)
    down = s_i.below_mean * s_i.cdf_at_threshold
    for j, s_j in enumerate(stats):
        if j == i:
            continue
        tie = i < j
        if up != 0.0:
            up *= omega(s_i, s_j, "above", weights[i], weights[j], i_wins_ties=tie)
        if down != 0.0:
            down *= omega(s_i, s_j, "below", weights[i], weights[j], i_wins_ties=tie)
    return up + down


def scheduling_probabilities(
    stats: Sequence[ConditionalStats], weights: Sequence[float]
) -> list[float]:
    """Per-user probability of being scheduled, from the omega products.

    Sums to 1 under the deterministic tie rule: every block schedules
    exactly one user.
    """
    _check_lengths(stats, weights)
    probs = []
    for i, s_i in enumerate(stats):
        up = 1.0 - s_i.cdf_at_threshold
        down = s_i.cdf_at_threshold
        for j, s_j in enumerate(stats):
            if j == i:
                continue
            tie = i < j
            if up != 0.0:
                up *= omega(s_i, s_j, "above", weights[i], weights[j], i_wins_ties=tie)
            if down != 0.0:
                down *= omega(s_i, s_j, "below", weights[i], weights[j], i_wins_ties=tie)
        probs.append(up + down)
    return probs


def weighted_sum_rate(stats: Sequence[ConditionalStats], weights: Sequence[float]) -> float:
    """Phi = sum_i mu_i * R~_i, the scheduler objective."""
    _check_lengths(stats, weights)
    return math.fsum(
        weights[i] * expected_user_rate(i, stats, weights) for i in range(len(stats))
    )


def _check_lengths(stats, weights):
    if len(stats) != len(weights):
        raise ValueError(f"{len(stats)} stats vs {len(weights)} weights")


def _interleaved_chain(stats, weights):
    """Labelled chain mu_1 R_1^+ > ... > mu_M R_M^+ > mu_1 R_1^- > ... > mu_M R_M^-."""
    chain = [
        (w * s.above_mean, f"mu_{k + 1}*R_{k + 1}^+") for k, (s, w) in enumerate(zip(stats, weights))
    ]
    chain += [
        (w * s.below_mean, f"mu_{k + 1}*R_{k + 1}^-") for k, (s, w) in enumerate(zip(stats, weights))
    ]
    return chain


def check_interleaved_ordering(
    stats: Sequence[ConditionalStats], weights: Sequence[float]
) -> None:
    """Raise OrderingError naming the first violated inequality of the chain."""
    chain = _interleaved_chain(stats, weights)
    for (v_hi, n_hi), (v_lo, n_lo) in zip(chain, chain[1:]):
        if not v_hi > v_lo:
            raise OrderingError(
                f"interleaved ordering violated: {n_hi} = {v_hi:.12g} is not > {n_lo} = {v_lo:.12g}"
            )


def _phi_interleaved(stats: Sequence[ConditionalStats], weights: Sequence[float]) -> float:
    """Closed form of Phi on the interleaved region.

    Phi = sum_j mu_j R_j^+ (1 - F_j) prod_{n<j} F_n  +  mu_1 R_1^- prod_n F_n,
    with the empty product equal to 1.
    """
    prod_f = 1.0
    terms = []
    for s, w in zip(stats, weights):
        terms.append(w * s.above_mean * (1.0 - s.cdf_at_threshold) * prod_f)
        prod_f *= s.cdf_at_threshold
    terms.append(weights[0] * stats[0].below_mean * prod_f)
    return math.fsum(terms)


def phi_ordered(stats: Sequence[ConditionalStats], weights: Sequence[float]) -> float:
    """Phi in the closed form valid on the interleaved priority region.

    Requires mu_1 R_1^+ > ... > mu_M R_M^+ > mu_1 R_1^- > ... > mu_M R_M^-
    for the supplied stats (user 1 = index 0 has highest priority); raises
    OrderingError naming the first violated inequality otherwise.
    """
    _check_lengths(stats, weights)
    check_interleaved_ordering(stats, weights)
    return _phi_interleaved(stats, weights)


def phi_region(
    profiles: Sequence[UserProfile],
    thresholds: Sequence[float],
    ordering: Sequence[int],
) -> float:
    """Phi of one priority region: relabel users by the permutation and
    evaluate the interleaved closed form.

    ``ordering[k]`` is the user holding priority rank k.  The value agrees
    with ``weighted_sum_rate`` whenever the relabeled stats actually satisfy
    the interleaved ordering; no precondition is enforced here.
    """
    if any(r < 0.0 for r in thresholds):
        raise ValueError("thresholds must be >= 0")
    if len(profiles) != len(thresholds):
        raise ValueError(f"{len(profiles)} profiles vs {len(thresholds)} thresholds")
    if sorted(ordering) != list(range(len(profiles))):
        raise ValueError(f"ordering {tuple(ordering)} is not a permutation")
    stats = [conditional_means(profiles[k].dist, thresholds[k]) for k in ordering]
    weights = [profiles[k].weight for k in ordering]
    return _phi_interleaved(stats, weights)
