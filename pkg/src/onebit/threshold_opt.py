"""Threshold solvers: coupled fixed points, region selection, and an
independent derivative-free maximizer used to validate them.

The 2-user peaks solve the closed-form coupled fixed points

    peak a:  r_1 = (mu_2/mu_1) R_2^+(r_2),  r_2 = (mu_1/mu_2) R_1^-(r_1)
    peak b:  r_1 = (mu_2/mu_1) R_2^-(r_2),  r_2 = (mu_1/mu_2) R_1^+(r_1)

by damped iteration with a bisection fallback on the composed scalar
residual.  The M-user recursion is implemented exactly as printed (with its
suspect "(1 + F)" factors; the conditional-expectation structure suggests
"(1 - F)") and every solution is polished by an accept-only-improvement
pattern search, with both the raw and polished points reported so the
discrepancy is measurable rather than silently corrected.
"""

from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .distributions import UserProfile, partial_first_moment
from .feedback_stats import (
    OrderingError,
    ThresholdAssignment,
    check_interleaved_ordering,
    conditional_means,
    weighted_sum_rate,
)

__all__ = [
    "BruteForce",
    "Heuristic",
    "Random",
    "RegionStrategy",
    "SolverConfig",
    "SolverError",
    "TwoUserConstraintReport",
    "TwoUserPeaks",
    "direct_maximize",
    "optimize",
    "optimize_m_user_region",
    "optimize_two_user",
    "select_regions",
    "stationarity_residual",
    "two_user_derivative_r1",
    "verify_two_user_constraints",
]

#: tail mass bounding every threshold search box: F(r_max) > 1 - BRACKET_TAIL
BRACKET_TAIL = 1e-10

#: |dPhi/dr_i| below which a point counts as stationary in that coordinate
STATIONARITY_TOL = 1e-4

#: pattern search: initial step fraction of r_max, shrink factor, final step
PATTERN_INIT_FRAC = 0.25
PATTERN_SHRINK = 0.5
PATTERN_STEP_TOL = 1e-6

#: largest user count for which brute-force region enumeration is allowed
BRUTE_FORCE_MAX_USERS = 8


class SolverError(RuntimeError):
    """A threshold solver failed to converge or to verify its solution."""

    def __init__(self, message: str, *, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = None if last_iterate is None else tuple(last_iterate)
        self.residual = residual


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters of the fixed-point and search routines."""

    fixed_point_tol: float = 1e-8
    max_iters: int = 1000
    damping: float = 0.5
    bisection_tol: float = 1e-9
    fd_step: float = 1e-5

    def __post_init__(self):
        if not self.fixed_point_tol > 0.0:
            raise ValueError("fixed_point_tol must be > 0")
        if not self.max_iters >= 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if not self.bisection_tol > 0.0:
            raise ValueError("bisection_tol must be > 0")
        if not self.fd_step > 0.0:
            raise ValueError("fd_step must be > 0")


@dataclass(frozen=True)
class BruteForce:
    """Enumerate every priority region."""


@dataclass(frozen=True)
class Random:
    """Pick one priority region uniformly at random (deterministic per seed)."""

    seed: int


@dataclass(frozen=True)
class Heuristic:
    """Order users by the threshold-independent score mu_i * E[R_i]."""


RegionStrategy = Union[BruteForce, Random, Heuristic]


@dataclass(frozen=True)
class TwoUserPeaks:
    """Both 2-user fixed-point peaks and the better of the two."""

    peak_a: ThresholdAssignment
    peak_b: ThresholdAssignment
    best: ThresholdAssignment


@dataclass(frozen=True)
class TwoUserConstraintReport:
    """Diagnostic evaluation of the 2-user optimality constraints.

    ``upper_gap`` is mu_2 R_2^+ - mu_1 R_1^-, ``mid_gap`` is
    mu_1 R_1^- - mu_2 R_2^- (with ``gamma2`` its cross-moment rewrite),
    ``top_gap`` is mu_1 R_1^+ - mu_2 R_2^+, and ``concavity_term`` is
    (K_2 - K_1 r_1) * f_1'(r_1), nonpositive where the objective is concave
    in r_1.
    """

    upper_gap: float
    upper_gap_ok: bool
    mid_gap: float
    mid_gap_ok: bool
    gamma2: float
    gamma2_ok: bool
    top_gap: float
    top_gap_ok: bool
    concavity_term: float
    concave_ok: bool

    def all_ok(self) -> bool:
        return self.upper_gap_ok and self.mid_gap_ok and self.gamma2_ok and self.top_gap_ok


def _weights(profiles: Sequence[UserProfile]) -> list[float]:
    return [p.weight for p in profiles]


def _stats_at(profiles: Sequence[UserProfile], thresholds) -> list:
    return [conditional_means(p.dist, r) for p, r in zip(profiles, thresholds)]


def _phi_at(profiles: Sequence[UserProfile], thresholds) -> float:
    return weighted_sum_rate(_stats_at(profiles, thresholds), _weights(profiles))


def _box_upper(profiles: Sequence[UserProfile]) -> np.ndarray:
    return np.array([p.dist.tail_rate(BRACKET_TAIL) for p in profiles])


def _check_permutation(ordering, m: int) -> tuple[int, ...]:
    ordering = tuple(int(k) for k in ordering)
    if sorted(ordering) != list(range(m)):
        raise ValueError(f"ordering {ordering} is not a permutation of 0..{m - 1}")
    return ordering


# ---------------------------------------------------------------------------
# 2-user closed-form peaks
# ---------------------------------------------------------------------------


def optimize_two_user(profiles: Sequence[UserProfile], cfg: SolverConfig | None = None) -> TwoUserPeaks:
    """Solve both coupled 2-user fixed points and return the better peak.

    Each converged point is checked against its region's interleaved
    ordering (a violation is flagged on the assignment, not hidden) and must
    pass a finite-difference stationarity check.
    """
    if len(profiles) != 2:
        raise ValueError(f"optimize_two_user needs exactly 2 profiles, got {len(profiles)}")
    cfg = cfg or SolverConfig()
    peak_a = _solve_two_user_peak(profiles, cfg, swapped=False)
    peak_b = _solve_two_user_peak(profiles, cfg, swapped=True)
    best = peak_b if peak_b.phi > peak_a.phi else peak_a
    return TwoUserPeaks(peak_a=peak_a, peak_b=peak_b, best=best)


def _solve_two_user_peak(profiles, cfg: SolverConfig, swapped: bool) -> ThresholdAssignment:
    (p0, p1) = profiles
    mu0, mu1 = p0.weight, p1.weight
    box = _box_upper(profiles)

    if swapped:
        # r_1 = (mu_2/mu_1) R_2^-(r_2), r_2 = (mu_1/mu_2) R_1^+(r_1)
        def update(r0, r1):
            s0 = conditional_means(p0.dist, r0)
            s1 = conditional_means(p1.dist, r1)
            return (mu1 / mu0) * s1.below_mean, (mu0 / mu1) * s0.above_mean

        ordering = (1, 0)
    else:
        # r_1 = (mu_2/mu_1) R_2^+(r_2), r_2 = (mu_1/mu_2) R_1^-(r_1)
        def update(r0, r1):
            s0 = conditional_means(p0.dist, r0)
            s1 = conditional_means(p1.dist, r1)
            return (mu1 / mu0) * s1.above_mean, (mu0 / mu1) * s0.below_mean

        ordering = (0, 1)

    r = np.array([p0.dist.median(), p1.dist.median()])
    r, residual = _damped_fixed_point(
        lambda v: np.clip(update(v[0], v[1]), 0.0, box), r, cfg
    )
    if residual >= cfg.fixed_point_tol:
        # compose on r0: r1 follows from r0, then the r0 equation closes the loop
        def compose(r0):
            _, r1 = update(r0, 0.0)  # r1 depends only on r0
            r1 = min(max(r1, 0.0), box[1])
            new_r0, _ = update(0.0, r1)  # r0 depends only on r1
            return min(max(new_r0, 0.0), box[0]) - r0

        r0 = _bisect_scalar(compose, 0.0, box[0], cfg)
        _, r1 = update(r0, 0.0)
        r = np.array([r0, min(max(r1, 0.0), box[1])])
        residual = float(np.max(np.abs(np.asarray(update(r[0], r[1])) - r)))
        if residual >= cfg.fixed_point_tol:
            raise SolverError(
                f"2-user fixed point did not converge: residual {residual:.3e} "
                f"after bisection fallback",
                last_iterate=r,
                residual=residual,
            )

    phi = _phi_at(profiles, r)
    region_ok = True
    stats = _stats_at(profiles, r)
    ranked_stats = [stats[k] for k in ordering]
    ranked_w = [profiles[k].weight for k in ordering]
    try:
        check_interleaved_ordering(ranked_stats, ranked_w)
    except OrderingError as exc:
        region_ok = False
        warnings.warn(f"converged 2-user peak violates its region ordering: {exc}")

    grad = stationarity_residual(profiles, r, cfg)
    max_resid = float(np.max(np.abs(grad)))
    if max_resid >= STATIONARITY_TOL:
        raise SolverError(
            f"2-user peak failed the stationarity check: |dPhi/dr| = {max_resid:.3e}",
            last_iterate=r,
            residual=max_resid,
        )
    return ThresholdAssignment(
        thresholds=tuple(float(v) for v in r),
        ordering=ordering,
        phi=phi,
        region_ok=region_ok,
        max_residual=max_resid,
    )


def _damped_fixed_point(mapping, r0: np.ndarray, cfg: SolverConfig):
    """Iterate r <- r + damping (T(r) - r); returns (point, residual)."""
    r = np.asarray(r0, dtype=float)
    residual = math.inf
    for _ in range(cfg.max_iters):
        target = np.asarray(mapping(r), dtype=float)
        residual = float(np.max(np.abs(target - r)))
        if residual < cfg.fixed_point_tol:
            return r, residual
        r = r + cfg.damping * (target - r)
    return r, residual


def _bisect_scalar(fn, lo: float, hi: float, cfg: SolverConfig) -> float:
    """Bisect fn on [lo, hi]; falls back to the better endpoint when the
    residual does not change sign (projected boundary fixed point)."""
    f_lo = fn(lo)
    f_hi = fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        return lo if abs(f_lo) < abs(f_hi) else hi
    for _ in range(cfg.max_iters):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0 or hi - lo < cfg.bisection_tol:
            return mid
        if f_lo * f_mid < 0.0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    if hi - lo < cfg.bisection_tol:
        return 0.5 * (lo + hi)
    raise SolverError(
        f"bisection did not reach tol {cfg.bisection_tol} within {cfg.max_iters} iterations",
        last_iterate=(0.5 * (lo + hi),),
        residual=hi - lo,
    )


# ---------------------------------------------------------------------------
# M-user recursion (as printed) + polish
# ---------------------------------------------------------------------------


def optimize_m_user_region(
    profiles: Sequence[UserProfile],
    ordering: Sequence[int],
    cfg: SolverConfig | None = None,
) -> ThresholdAssignment:
    """Optimize thresholds inside one priority region.

    Solves the printed recursive fixed point for the region (users relabeled
    so ``ordering[0]`` has highest priority), then polishes with the pattern
    search.  The returned assignment carries the polished point; the raw
    fixed point and its objective are kept in ``raw_thresholds``/``raw_phi``.
    """
    cfg = cfg or SolverConfig()
    m = len(profiles)
    if m < 1:
        raise ValueError("need at least one profile")
    ordering = _check_permutation(ordering, m)

    if m == 1:
        # a single user is always scheduled; the threshold is irrelevant
        r0 = profiles[0].dist.median()
        phi = _phi_at(profiles, [r0])
        return ThresholdAssignment(
            thresholds=(r0,),
            ordering=ordering,
            phi=phi,
            raw_thresholds=(r0,),
            raw_phi=phi,
            max_residual=0.0,
        )

    ranked = [profiles[k] for k in ordering]
    mus = [p.weight for p in ranked]
    dists = [p.dist for p in ranked]
    box = _box_upper(ranked)

    def recursion(r_cur: np.ndarray) -> np.ndarray:
        stats = [conditional_means(d, float(v)) for d, v in zip(dists, r_cur)]
        f = [s.cdf_at_threshold for s in stats]
        r_plus = [s.above_mean for s in stats]
        new = np.empty(m)
        new[m - 1] = (mus[0] / mus[m - 1]) * stats[0].below_mean
        for i in range(m - 2, 0, -1):
            new[i] = (mus[i + 1] / mus[i]) * (
                r_cur[i + 1] * f[i + 1] + r_plus[i + 1] * (1.0 + f[i + 1])
            )
        prod_f = math.prod(f[1:])
        numer = mus[1] * (r_cur[1] * f[1] + r_plus[1] * (1.0 + f[1]))
        numer -= mus[m - 1] * r_cur[m - 1] * prod_f
        new[0] = numer / (mus[0] * (1.0 + prod_f))
        return np.clip(new, 0.0, box)

    r = np.array([d.median() for d in dists])
    r, residual = _damped_fixed_point(recursion, r, cfg)
    if residual >= cfg.fixed_point_tol:
        r = _compose_and_bisect(recursion, box, cfg, m)
        residual = float(np.max(np.abs(recursion(r) - r)))
        if residual >= cfg.fixed_point_tol:
            raise SolverError(
                f"region {ordering}: recursion residual {residual:.3e} after fallback",
                last_iterate=r,
                residual=residual,
            )

    raw = np.empty(m)
    for rank, user in enumerate(ordering):
        raw[user] = r[rank]
    raw_phi = _phi_at(profiles, raw)

    polished = direct_maximize(profiles, raw, cfg)
    grad = stationarity_residual(profiles, polished.thresholds, cfg)
    max_resid = _interior_residual(polished.thresholds, grad, _box_upper(profiles), cfg)
    if max_resid >= STATIONARITY_TOL:
        # one more sweep from the polished point before giving up
        polished = direct_maximize(profiles, polished.thresholds, cfg)
        grad = stationarity_residual(profiles, polished.thresholds, cfg)
        max_resid = _interior_residual(polished.thresholds, grad, _box_upper(profiles), cfg)
        if max_resid >= STATIONARITY_TOL:
            raise SolverError(
                f"region {ordering}: polished point is not stationary "
                f"(|dPhi/dr| = {max_resid:.3e})",
                last_iterate=polished.thresholds,
                residual=max_resid,
            )
    return ThresholdAssignment(
        thresholds=polished.thresholds,
        ordering=ordering,
        phi=polished.phi,
        raw_thresholds=tuple(float(v) for v in raw),
        raw_phi=raw_phi,
        max_residual=max_resid,
    )


def _compose_and_bisect(recursion, box, cfg: SolverConfig, m: int) -> np.ndarray:
    """Reduce the recursion to a scalar residual in the top threshold.

    Given r_1, the last threshold follows from r_1, the middle ones chain
    down from their successors, and the r_1 formula closes the loop.
    """

    def chain(r_top: float) -> np.ndarray:
        r_vec = np.zeros(m)
        r_vec[0] = r_top
        for _ in range(m):
            r_vec = recursion(np.concatenate([[r_top], r_vec[1:]]))
            r_vec[0] = r_top
        return r_vec

    def residual(r_top: float) -> float:
        r_vec = chain(r_top)
        return float(recursion(r_vec)[0]) - r_top

    r_top = _bisect_scalar(residual, 0.0, float(box[0]), cfg)
    out = chain(r_top)
    out[0] = r_top
    return out


def _interior_residual(thresholds, grad, box, cfg: SolverConfig) -> float:
    """Largest gradient magnitude after discounting active box constraints.

    At r_i = 0 a negative derivative is optimal (and at the tail cap a
    positive one); only interior coordinates must be stationary.
    """
    worst = 0.0
    for x, g, hi in zip(thresholds, grad, box):
        if x <= cfg.fd_step and g < 0.0:
            continue
        if x >= hi - cfg.fd_step and g > 0.0:
            continue
        worst = max(worst, abs(float(g)))
    return worst


# ---------------------------------------------------------------------------
# region selection and the overall optimizer
# ---------------------------------------------------------------------------


def select_regions(
    profiles: Sequence[UserProfile], strategy: RegionStrategy
) -> list[tuple[int, ...]]:
    """Candidate priority orderings per the chosen strategy."""
    m = len(profiles)
    if isinstance(strategy, BruteForce):
        if m > BRUTE_FORCE_MAX_USERS:
            raise ValueError(
                f"brute-force region enumeration refused for M = {m} > {BRUTE_FORCE_MAX_USERS}"
            )
        return [tuple(p) for p in itertools.permutations(range(m))]
    if isinstance(strategy, Random):
        rng = random.Random(strategy.seed)
        perm = list(range(m))
        rng.shuffle(perm)
        return [tuple(perm)]
    if isinstance(strategy, Heuristic):
        score = [p.weight * p.dist.mean() for p in profiles]
        return [tuple(sorted(range(m), key=lambda i: (-score[i], i)))]
    raise TypeError(f"unknown region strategy: {strategy!r}")


def optimize(
    profiles: Sequence[UserProfile],
    strategy: RegionStrategy,
    cfg: SolverConfig | None = None,
) -> ThresholdAssignment:
    """Optimize every candidate region and return the best assignment.

    A region whose solver fails is skipped with a warning as long as at
    least one region converges.  Objective ties keep the lexicographically
    smallest permutation.
    """
    cfg = cfg or SolverConfig()
    best: ThresholdAssignment | None = None
    failures: list[str] = []
    for perm in select_regions(profiles, strategy):
        try:
            result = optimize_m_user_region(profiles, perm, cfg)
        except SolverError as exc:
            failures.append(f"{perm}: {exc}")
            warnings.warn(f"region {perm} skipped: {exc}")
            continue
        if best is None or result.phi > best.phi:
            best = result
    if best is None:
        raise SolverError("every candidate region failed: " + "; ".join(failures))
    return best


# ---------------------------------------------------------------------------
# verification operations
# ---------------------------------------------------------------------------


def stationarity_residual(
    profiles: Sequence[UserProfile],
    thresholds: Sequence[float],
    cfg: SolverConfig | None = None,
) -> np.ndarray:
    """Central finite differences of the objective in each threshold.

    For two users the analytic derivative (K_2 - K_1 r_1) f_1(r_1) is also
    evaluated whenever the point sits safely inside the first priority
    region, and a disagreement beyond 1e-5 raises, since it means the
    quadrature and the objective disagree about the same quantity.
    """
    cfg = cfg or SolverConfig()
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(thresholds < 0.0):
        raise ValueError("thresholds must be >= 0")
    h = cfg.fd_step
    grad = np.empty(len(thresholds))
    for i in range(len(thresholds)):
        hi = thresholds.copy()
        lo = thresholds.copy()
        hi[i] += h
        if thresholds[i] >= h:
            lo[i] -= h
            grad[i] = (_phi_at(profiles, hi) - _phi_at(profiles, lo)) / (2.0 * h)
        else:
            grad[i] = (_phi_at(profiles, hi) - _phi_at(profiles, thresholds)) / h

    if len(profiles) == 2 and _safely_inside_first_region(profiles, thresholds, margin=1e-3):
        analytic = two_user_derivative_r1(profiles, thresholds)
        if abs(analytic - grad[0]) > 1e-5:
            raise SolverError(
                f"analytic derivative {analytic:.9g} and finite difference "
                f"{grad[0]:.9g} disagree at thresholds {tuple(thresholds)}"
            )
    return grad


def _safely_inside_first_region(profiles, thresholds, margin: float) -> bool:
    stats = _stats_at(profiles, thresholds)
    w = _weights(profiles)
    chain = [
        w[0] * stats[0].above_mean,
        w[1] * stats[1].above_mean,
        w[0] * stats[0].below_mean,
        w[1] * stats[1].below_mean,
    ]
    return all(a - b > margin for a, b in zip(chain, chain[1:]))


def two_user_derivative_r1(
    profiles: Sequence[UserProfile], thresholds: Sequence[float]
) -> float:
    """Analytic dPhi/dr_1 = (K_2 - K_1 r_1) f_1(r_1) on the first region,

    with K_2 = mu_2 int_{r_2}^inf r f_2(r) dr and K_1 = mu_1 (1 - F_2(r_2)).
    """
    (p0, p1) = profiles
    r0, r1 = float(thresholds[0]), float(thresholds[1])
    k2 = p1.weight * partial_first_moment(p1.dist, r1, math.inf)
    k1 = p0.weight * float(p1.dist.sf(r1))
    return (k2 - k1 * r0) * float(p0.dist.pdf(r0))


def verify_two_user_constraints(
    profiles: Sequence[UserProfile], thresholds: Sequence[float]
) -> TwoUserConstraintReport:
    """Evaluate the three 2-user region constraints and the concavity term."""
    if len(profiles) != 2:
        raise ValueError("verify_two_user_constraints needs exactly 2 profiles")
    (p0, p1) = profiles
    r0, r1 = float(thresholds[0]), float(thresholds[1])
    s0 = conditional_means(p0.dist, r0)
    s1 = conditional_means(p1.dist, r1)
    mu0, mu1 = p0.weight, p1.weight

    upper_gap = mu1 * s1.above_mean - mu0 * s0.below_mean
    mid_gap = mu0 * s0.below_mean - mu1 * s1.below_mean
    gamma2 = mu0 * float(p1.dist.cdf(r1)) * partial_first_moment(p0.dist, 0.0, r0)
    gamma2 -= mu1 * float(p0.dist.cdf(r0)) * partial_first_moment(p1.dist, 0.0, r1)
    top_gap = mu0 * s0.above_mean - mu1 * s1.above_mean

    k2 = mu1 * partial_first_moment(p1.dist, r1, math.inf)
    k1 = mu0 * float(p1.dist.sf(r1))
    h = 1e-6
    dpdf = (float(p0.dist.pdf(r0 + h)) - float(p0.dist.pdf(max(r0 - h, 0.0)))) / (
        2.0 * h if r0 >= h else h
    )
    concavity_term = (k2 - k1 * r0) * dpdf

    return TwoUserConstraintReport(
        upper_gap=upper_gap,
        upper_gap_ok=upper_gap > 0.0,
        mid_gap=mid_gap,
        mid_gap_ok=mid_gap > 0.0,
        gamma2=gamma2,
        gamma2_ok=gamma2 > 0.0,
        top_gap=top_gap,
        top_gap_ok=top_gap > 0.0,
        concavity_term=concavity_term,
        # exactly zero at a stationary point; allow quadrature noise
        concave_ok=concavity_term <= 1e-8,
    )


# ---------------------------------------------------------------------------
# independent derivative-free maximizer
# ---------------------------------------------------------------------------


def direct_maximize(
    profiles: Sequence[UserProfile],
    init: Sequence[float],
    cfg: SolverConfig | None = None,
) -> ThresholdAssignment:
    """Pattern search on the objective: coordinate moves, shrinking steps.

    Steps start at 0.25 r_max per coordinate, halve whenever a full sweep
    yields no improvement, and stop below 1e-6.  Only improvements are
    accepted, so the returned objective never falls below the initial one.
    """
    del cfg  # search constants are part of the contract, not tunables
    m = len(profiles)
    weights = _weights(profiles)
    box = _box_upper(profiles)
    x = np.clip(np.asarray(init, dtype=float), 0.0, box)
    if x.shape != (m,):
        raise ValueError(f"init has shape {x.shape}, expected ({m},)")

    stats = [conditional_means(p.dist, float(v)) for p, v in zip(profiles, x)]
    phi = weighted_sum_rate(stats, weights)
    steps = PATTERN_INIT_FRAC * box
    while float(np.max(steps)) >= PATTERN_STEP_TOL:
        improved = False
        for i in range(m):
            for cand in (x[i] + steps[i], x[i] - steps[i]):
                cand = min(max(float(cand), 0.0), float(box[i]))
                if cand == x[i]:
                    continue
                trial = stats.copy()
                trial[i] = conditional_means(profiles[i].dist, cand)
                trial_phi = weighted_sum_rate(trial, weights)
                if trial_phi > phi:
                    x[i] = cand
                    stats = trial
                    phi = trial_phi
                    improved = True
        if not improved:
            steps = steps * PATTERN_SHRINK

    ranked = sorted(range(m), key=lambda i: (-weights[i] * stats[i].above_mean, i))
    return ThresholdAssignment(
        thresholds=tuple(float(v) for v in x),
        ordering=tuple(ranked),
        phi=phi,
    )
