"""Shared fixtures and independent oracles for the test suite.

The grid-scan helpers implement the brute-force oracle used to validate the
fixed-point solvers: they only ever evaluate the cross-probability form of
the objective on a lattice, so they share no code path with the solvers
they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from onebit import UserProfile, conditional_means, make_rayleigh_rate, weighted_sum_rate
from onebit.threshold_opt import BRACKET_TAIL


@pytest.fixture(scope="session")
def two_user_10db():
    """The reference 2-user instance: 10 dB each, weights 1.1 / 1.05."""
    return (
        UserProfile(1.1, make_rayleigh_rate(10.0)),
        UserProfile(1.05, make_rayleigh_rate(10.0)),
    )


def grid_scan_two_user(profiles, n=400, lo=0.0, hi=None):
    """Objective on an n x n threshold lattice over [lo, hi]^2.

    Returns (axis_0, axis_1, phi_matrix).  hi defaults to the larger of the
    two users' search caps.
    """
    if hi is None:
        hi = max(p.dist.tail_rate(BRACKET_TAIL) for p in profiles)
    ax0 = np.linspace(lo, hi, n)
    ax1 = np.linspace(lo, hi, n)
    weights = [p.weight for p in profiles]
    stats0 = [conditional_means(profiles[0].dist, float(r)) for r in ax0]
    stats1 = [conditional_means(profiles[1].dist, float(r)) for r in ax1]
    phi = np.empty((n, n))
    for i, s0 in enumerate(stats0):
        for j, s1 in enumerate(stats1):
            phi[i, j] = weighted_sum_rate([s0, s1], weights)
    return ax0, ax1, phi


def grid_local_maxima(phi, margin=1e-9):
    """Interior lattice points strictly above their 8 neighbors.

    ``margin`` suppresses quadrature-noise micro-peaks on flat ridges where
    the objective is constant up to ~1e-12.
    """
    n0, n1 = phi.shape
    out = []
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            window = phi[i - 1 : i + 2, j - 1 : j + 2].copy()
            center = window[1, 1]
            window[1, 1] = -np.inf
            if center > window.max() + margin:
                out.append((i, j))
    return out


def refine_two_user_peak(profiles, center, halfwidth, n=400):
    """Zoom the lattice scan into a window around ``center``.

    Standard grid-search refinement: one coarse pass locates the peak cell,
    one zoomed pass pins the peak value far below the coarse cell error.
    Returns ((r_0, r_1), phi).
    """
    ax0 = np.linspace(max(center[0] - halfwidth, 0.0), center[0] + halfwidth, n)
    ax1 = np.linspace(max(center[1] - halfwidth, 0.0), center[1] + halfwidth, n)
    weights = [p.weight for p in profiles]
    stats0 = [conditional_means(profiles[0].dist, float(r)) for r in ax0]
    stats1 = [conditional_means(profiles[1].dist, float(r)) for r in ax1]
    best = (-np.inf, 0.0, 0.0)
    for i, s0 in enumerate(stats0):
        for j, s1 in enumerate(stats1):
            phi = weighted_sum_rate([s0, s1], weights)
            if phi > best[0]:
                best = (phi, ax0[i], ax1[j])
    return (best[1], best[2]), best[0]
