"""Per-user achievable-rate distributions and their integral primitives.

Every quantity the scheduler analysis needs reduces to four primitives on
the rate law of a user: the PDF, the CDF, partial first moments
``int_a^b r f(r) dr``, and inverse-transform sampling.  The concrete law
used throughout is the Rayleigh-fading Shannon rate
``r = log2(1 + snr * X)`` with ``X ~ Exp(1)``, but the base class accepts
any nonnegative law, so synthetic distributions can be plugged in by tests.
"""

from __future__ import annotations

import functools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RateDistribution",
    "RayleighRateLaw",
    "UserProfile",
    "make_rayleigh_rate",
    "partial_first_moment",
    "sample_rate",
]

_LN2 = math.log(2.0)

#: tail mass below which an infinite integration limit is truncated
TAIL_MASS = 1e-12

#: absolute tolerance of the adaptive quadrature
QUAD_ABS_TOL = 1e-9

# Gauss-Legendre pair used by the adaptive integrator: the 15-point rule
# supplies the value, the embedded 7-point rule the error estimate.
_GL7_X, _GL7_W = np.polynomial.legendre.leggauss(7)
_GL15_X, _GL15_W = np.polynomial.legendre.leggauss(15)


def _adaptive_quadrature(f, a: float, b: float, tol: float) -> float:
    """Integrate a vectorized ``f`` over [a, b] by adaptive bisection.

    Each interval is evaluated with a 15-point Gauss-Legendre rule; the
    discrepancy against the 7-point rule drives subdivision.  All node
    evaluations of one refinement round are batched into a single call.
    """
    if b <= a:
        return 0.0
    lo = np.array([a])
    hi = np.array([b])
    span = b - a
    done: list[float] = []
    for _ in range(64):
        c = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        x7 = c[:, None] + h[:, None] * _GL7_X
        x15 = c[:, None] + h[:, None] * _GL15_X
        y = f(np.concatenate([x7, x15], axis=1))
        i7 = h * (y[:, :7] @ _GL7_W)
        i15 = h * (y[:, 7:] @ _GL15_W)
        err = np.abs(i15 - i7)
        budget = tol * (hi - lo) / span
        ok = (err <= budget) | (err <= 1e-16 * np.abs(i15)) | (hi - lo <= 1e-14 * span)
        done.extend(i15[ok].tolist())
        if ok.all():
            return math.fsum(done)
        lo, hi, c = lo[~ok], hi[~ok], c[~ok]
        lo = np.concatenate([lo, c])
        hi = np.concatenate([c, hi])
    raise ArithmeticError(
        f"adaptive quadrature failed to reach tol={tol} on [{a}, {b}]"
    )


class RateDistribution(ABC):
    """Law of a user's achievable rate, supported on r >= 0.

    Implementations must be immutable and hashable; module-level caches key
    integral results on the instance.
    """

    @abstractmethod
    def pdf(self, r):
        """Density f(r); accepts scalars or arrays, zero for r < 0."""

    @abstractmethod
    def cdf(self, r):
        """Distribution function F(r); accepts scalars or arrays."""

    def sf(self, r):
        """Survival function 1 - F(r)."""
        return 1.0 - self.cdf(r)

    def ppf(self, q):
        """Quantile function F^-1(q), vectorized.

        Generic implementation brackets by doubling and bisects on the CDF;
        subclasses with a closed form should override.
        """
        q_arr = np.asarray(q, dtype=float)
        hi = 1.0
        for _ in range(200):
            if np.all(self.cdf(hi) >= q_arr.max()):
                break
            hi *= 2.0
        lo_v = np.zeros_like(q_arr)
        hi_v = np.full_like(q_arr, hi)
        for _ in range(100):
            mid = 0.5 * (lo_v + hi_v)
            below = self.cdf(mid) < q_arr
            lo_v = np.where(below, mid, lo_v)
            hi_v = np.where(below, hi_v, mid)
        out = 0.5 * (lo_v + hi_v)
        return float(out) if np.isscalar(q) or out.ndim == 0 else out

    def tail_rate(self, eps: float = TAIL_MASS) -> float:
        """Smallest r (up to bisection tolerance) with 1 - F(r) < eps."""
        return _tail_rate_cached(self, eps)

    def median(self) -> float:
        return float(self.ppf(0.5))

    def mean(self) -> float:
        """E[r], computed from the survival function: int_0^inf (1-F) dr.

        Deliberately a different route than the pdf-weighted partial first
        moment, so the two can cross-check each other.
        """
        return _mean_cached(self)


@functools.lru_cache(maxsize=4096)
def _tail_rate_cached(dist: RateDistribution, eps: float) -> float:
    hi = 1.0
    for _ in range(200):
        if dist.sf(hi) < eps:
            break
        hi *= 2.0
    else:
        raise ArithmeticError("could not bracket the distribution tail")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if dist.sf(mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi


@functools.lru_cache(maxsize=4096)
def _mean_cached(dist: RateDistribution) -> float:
    upper = dist.tail_rate(TAIL_MASS)
    return _adaptive_quadrature(lambda r: dist.sf(r), 0.0, upper, QUAD_ABS_TOL)


@dataclass(frozen=True)
class RayleighRateLaw(RateDistribution):
    """Rate law r = log2(1 + avg_snr * X) with X ~ Exp(1).

    ``avg_snr`` is the linear average SNR (|h|^2 has unit mean, so avg_snr
    is both the mean channel power gain times transmit SNR and the mean of
    avg_snr * X).  Closed forms:

        F(r) = 1 - exp(-(2^r - 1) / avg_snr)
        f(r) = (ln 2 * 2^r / avg_snr) * exp(-(2^r - 1) / avg_snr)
    """

    avg_snr: float

    def __post_init__(self):
        if not (self.avg_snr > 0.0 and math.isfinite(self.avg_snr)):
            raise ValueError(f"avg_snr must be finite and > 0, got {self.avg_snr}")

    def _gain(self, r):
        # (2^r - 1)/avg_snr via expm1 to keep precision near r = 0
        return np.expm1(np.asarray(r, dtype=float) * _LN2) / self.avg_snr

    def pdf(self, r):
        r_arr = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            val = (_LN2 / self.avg_snr) * np.exp(r_arr * _LN2 - self._gain(r_arr))
        out = np.where(r_arr < 0.0, 0.0, val)
        return float(out) if out.ndim == 0 else out

    def cdf(self, r):
        r_arr = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            val = -np.expm1(-self._gain(r_arr))
        out = np.where(r_arr < 0.0, 0.0, val)
        return float(out) if out.ndim == 0 else out

    def sf(self, r):
        r_arr = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            val = np.exp(-self._gain(r_arr))
        out = np.where(r_arr < 0.0, 1.0, val)
        return float(out) if out.ndim == 0 else out

    def ppf(self, q):
        q_arr = np.asarray(q, dtype=float)
        x = -np.log1p(-q_arr)  # Exp(1) quantile
        out = np.log1p(self.avg_snr * x) / _LN2
        return float(out) if np.isscalar(q) or out.ndim == 0 else out

    def tail_rate(self, eps: float = TAIL_MASS) -> float:
        return float(np.log1p(self.avg_snr * (-math.log(eps))) / _LN2)


@dataclass(frozen=True)
class UserProfile:
    """QoS weight plus the rate law of one user."""

    weight: float
    dist: RateDistribution

    def __post_init__(self):
        if not (self.weight > 0.0 and math.isfinite(self.weight)):
            raise ValueError(f"weight must be finite and > 0, got {self.weight}")


def make_rayleigh_rate(avg_snr_db: float) -> RayleighRateLaw:
    """Rate law for a Rayleigh channel with the given average SNR in dB."""
    if not math.isfinite(avg_snr_db):
        raise ValueError(f"avg_snr_db must be finite, got {avg_snr_db}")
    return RayleighRateLaw(avg_snr=10.0 ** (avg_snr_db / 10.0))


def partial_first_moment(dist: RateDistribution, a: float, b: float) -> float:
    """int_a^b r f(r) dr to absolute tolerance QUAD_ABS_TOL.

    ``b`` may be ``inf``; the integral is then truncated where the tail
    mass drops below TAIL_MASS.
    """
    a = float(a)
    b = float(b)
    if not a >= 0.0:
        raise ValueError(f"lower limit must be >= 0, got {a}")
    if a > b:
        raise ValueError(f"lower limit {a} exceeds upper limit {b}")
    return _pfm_cached(dist, a, b)


@functools.lru_cache(maxsize=1 << 18)
def _pfm_cached(dist: RateDistribution, a: float, b: float) -> float:
    if math.isinf(b):
        b = dist.tail_rate(TAIL_MASS)
        if b <= a:
            return 0.0
    return _adaptive_quadrature(lambda r: r * dist.pdf(r), a, b, QUAD_ABS_TOL)


def sample_rate(dist: RateDistribution, rng: np.random.Generator, size=None):
    """Draw achievable rates by inverse-transform sampling.

    One uniform is consumed per sample; ``size=None`` returns a scalar and
    the sequence of scalar draws matches a single vectorized draw on the
    same generator state.
    """
    u = rng.random(size)
    return dist.ppf(u)
