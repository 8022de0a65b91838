"""Monte-Carlo engine for the per-block scheduling protocol.

Each block draws every user's achievable rate, forms the one-bit feedback
(rate above threshold or not), schedules one user by the largest weighted
conditional mean given its own bit, and separately schedules the full-CSI
benchmark user by the largest weighted instantaneous rate.  With channels
independent across users, conditioning on all bits reduces to each user's
own-bit conditional mean, so the scheduler only needs the per-user pair
(mu R^-, mu R^+).

Reproducibility: block b consumes exactly M uniforms, taken from a single
Philox stream keyed by the seed at word offset b * M.  Work is split into
fixed 65536-block chunks whose streams are recovered by counter jumps, so
the report is bit-identical for a given (seed, n_blocks) no matter how many
workers run the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import UserProfile
from .feedback_stats import TIE_TOL, ConditionalStats, conditional_means

__all__ = [
    "SimConfig",
    "SimReport",
    "schedule_full_csi",
    "schedule_one_bit",
    "simulate",
]

#: blocks per worker chunk; a multiple of 4 keeps every chunk's first word
#: offset aligned with the Philox counter (one counter tick = 4 words)
CHUNK_BLOCKS = 65536

WORKER_ENV_VAR = "ONEBIT_THREADS"


@dataclass(frozen=True)
class SimConfig:
    """One Monte-Carlo run: user population, thresholds, length, seed."""

    profiles: tuple[UserProfile, ...]
    thresholds: tuple[float, ...]
    n_blocks: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        object.__setattr__(self, "thresholds", tuple(float(r) for r in self.thresholds))
        if self.n_blocks < 1:
            raise ValueError(f"n_blocks must be >= 1, got {self.n_blocks}")
        if len(self.thresholds) != len(self.profiles):
            raise ValueError(
                f"{len(self.thresholds)} thresholds for {len(self.profiles)} profiles"
            )
        if any(r < 0.0 for r in self.thresholds):
            raise ValueError("thresholds must be >= 0")


@dataclass(frozen=True)
class SimReport:
    """Monte-Carlo averages with standard errors."""

    avg_weighted_rate_one_bit: float
    stderr_one_bit: float
    avg_weighted_rate_full_csi: float
    stderr_full_csi: float
    per_user_avg_rate: tuple[float, ...]
    scheduling_fraction: tuple[float, ...]
    n_blocks: int


def schedule_one_bit(bits, stats, weights) -> int:
    """User with the largest mu_i * (R_i^+ if bit else R_i^-).

    Values within TIE_TOL of the maximum are tied; the lowest index wins,
    matching the analytic cross-probability branches.
    """
    if not (len(bits) == len(stats) == len(weights)):
        raise ValueError("bits, stats and weights must have equal length")
    values = [
        w * (s.above_mean if b else s.below_mean)
        for b, s, w in zip(bits, stats, weights)
    ]
    top = max(values)
    for i, v in enumerate(values):
        if v >= top - TIE_TOL:
            return i
    raise AssertionError("unreachable")


def schedule_full_csi(rates, weights) -> int:
    """User with the largest mu_i * rate_i; exact ties go to the lowest index."""
    if len(rates) != len(weights):
        raise ValueError("rates and weights must have equal length")
    return int(np.argmax(np.asarray(rates, dtype=float) * np.asarray(weights, dtype=float)))


@dataclass(frozen=True)
class _ChunkSums:
    one_bit: float
    one_bit_sq: float
    full_csi: float
    full_csi_sq: float
    user_rate: np.ndarray
    sel_count: np.ndarray


def _run_chunk(cfg: SimConfig, start: int, n_blocks: int, mu_below, mu_above, mu) -> _ChunkSums:
    m = len(cfg.profiles)
    word = start * m
    assert word % 4 == 0, "chunk start must be counter-aligned"
    bitgen = np.random.Philox(key=np.uint64(cfg.seed))
    bitgen.advance(word // 4)
    u = np.random.Generator(bitgen).random((n_blocks, m))

    rates = np.empty_like(u)
    for i, p in enumerate(cfg.profiles):
        rates[:, i] = p.dist.ppf(u[:, i])

    # one-bit scheduler: feedback bit is 1 iff rate strictly exceeds the threshold
    bits = rates > np.asarray(cfg.thresholds)
    values = np.where(bits, mu_above, mu_below)
    top = values.max(axis=1, keepdims=True)
    sel = (values >= top - TIE_TOL).argmax(axis=1)
    rows = np.arange(n_blocks)
    sel_rate = rates[rows, sel]
    w_one_bit = mu[sel] * sel_rate

    # full-CSI benchmark: schedule the largest weighted instantaneous rate
    sel_csi = (rates * mu).argmax(axis=1)
    w_full_csi = mu[sel_csi] * rates[rows, sel_csi]

    return _ChunkSums(
        one_bit=float(np.sum(w_one_bit)),
        one_bit_sq=float(np.sum(w_one_bit * w_one_bit)),
        full_csi=float(np.sum(w_full_csi)),
        full_csi_sq=float(np.sum(w_full_csi * w_full_csi)),
        user_rate=np.bincount(sel, weights=sel_rate, minlength=m),
        sel_count=np.bincount(sel, minlength=m).astype(float),
    )


def _worker_count() -> int:
    env = os.environ.get(WORKER_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{WORKER_ENV_VAR} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def simulate(cfg: SimConfig, n_workers: int | None = None) -> SimReport:
    """Run the block simulation and report averages with standard errors.

    ``n_workers`` defaults to the ONEBIT_THREADS environment variable (or
    the CPU count); the report does not depend on it.
    """
    m = len(cfg.profiles)
    stats: list[ConditionalStats] = [
        conditional_means(p.dist, r) for p, r in zip(cfg.profiles, cfg.thresholds)
    ]
    mu = np.array([p.weight for p in cfg.profiles])
    mu_below = mu * np.array([s.below_mean for s in stats])
    mu_above = mu * np.array([s.above_mean for s in stats])

    spans = [
        (start, min(CHUNK_BLOCKS, cfg.n_blocks - start))
        for start in range(0, cfg.n_blocks, CHUNK_BLOCKS)
    ]
    workers = n_workers if n_workers is not None else _worker_count()
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(
                pool.map(lambda s: _run_chunk(cfg, s[0], s[1], mu_below, mu_above, mu), spans)
            )
    else:
        chunks = [_run_chunk(cfg, s, n, mu_below, mu_above, mu) for s, n in spans]

    n = float(cfg.n_blocks)
    sum_ob = math.fsum(c.one_bit for c in chunks)
    sum_ob_sq = math.fsum(c.one_bit_sq for c in chunks)
    sum_fc = math.fsum(c.full_csi for c in chunks)
    sum_fc_sq = math.fsum(c.full_csi_sq for c in chunks)
    user_rate = [math.fsum(float(c.user_rate[i]) for c in chunks) for i in range(m)]
    sel_count = [math.fsum(float(c.sel_count[i]) for c in chunks) for i in range(m)]

    mean_ob = sum_ob / n
    mean_fc = sum_fc / n
    var_ob = max(sum_ob_sq / n - mean_ob * mean_ob, 0.0)
    var_fc = max(sum_fc_sq / n - mean_fc * mean_fc, 0.0)

    fractions = tuple(c / n for c in sel_count)
    assert abs(math.fsum(fractions) - 1.0) <= 1e-12, "every block schedules one user"
    # block-wise dominance: the full-CSI pick maximizes mu * rate in every block
    assert mean_ob <= mean_fc * (1.0 + 1e-12), "one-bit cannot beat full CSI"

    return SimReport(
        avg_weighted_rate_one_bit=mean_ob,
        stderr_one_bit=math.sqrt(var_ob / n),
        avg_weighted_rate_full_csi=mean_fc,
        stderr_full_csi=math.sqrt(var_fc / n),
        per_user_avg_rate=tuple(r / n for r in user_rate),
        scheduling_fraction=fractions,
        n_blocks=cfg.n_blocks,
    )
