"""Posterior reconstruction of the hidden series from the observed one."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rngs
from .bsl import Interval, PosteriorSample
from .errors import ParameterError

MAX_DRAWS = 1000


@dataclass(frozen=True)
class ReconstructionBands:
    t_index: np.ndarray
    p2_5: np.ndarray
    p50: np.ndarray
    p97_5: np.ndarray
    estimated_total: Interval
    reported_fraction: Interval


def thin(n: int, max_draws: int = MAX_DRAWS) -> np.ndarray:
    """Evenly spaced indices of at most ``max_draws`` out of ``n``."""
    step = -(-n // max_draws)
    return np.arange(0, n, step)


def sample_hidden(y, omega, q, n_draws_per_theta: int, seed: int) -> np.ndarray:
    """Pooled draws of the hidden series, one block of rows per (omega, q) pair.

    Each time point is taken as misreported with probability omega, in which
    case the hidden value is y / q, otherwise y itself.
    """
    y = np.asarray(y, dtype=float)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    T = y.size
    out = np.empty((omega.size * n_draws_per_theta, T))
    for d, (w, qq) in enumerate(zip(omega, q)):
        u = rngs.stream(seed, d).random((n_draws_per_theta, T))
        block = slice(d * n_draws_per_theta, (d + 1) * n_draws_per_theta)
        out[block] = np.where(u < w, y / qq, y)
    return out


def _interval(v) -> Interval:
    p = np.percentile(v, [50, 2.5, 97.5])
    return Interval(*(float(a) for a in p))


def reconstruct(y_obs, sample: PosteriorSample, n_draws_per_theta: int = 10, seed: int = 0,
                max_draws: int = MAX_DRAWS) -> ReconstructionBands:
    """Pointwise 2.5/50/97.5% bands of the hidden series plus aggregate totals."""
    y = np.asarray(getattr(y_obs, "y", y_obs), dtype=float)
    if sample.draws.shape[0] == 0:
        raise ParameterError("empty posterior sample")
    if n_draws_per_theta < 1:
        raise ParameterError("n_draws_per_theta must be positive")
    idx = thin(sample.draws.shape[0], max_draws)
    omega, q = sample.column("omega")[idx], sample.column("q")[idx]
    if np.any(q <= 0):
        raise ParameterError("posterior contains non-positive q")
    X = sample_hidden(y, omega, q, n_draws_per_theta, seed)
    bands = np.percentile(X, [2.5, 50, 97.5], axis=0)
    totals = X.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):  # all-zero series: NaN
        fraction = y.sum() / totals
    return ReconstructionBands(np.arange(1, y.size + 1), bands[0], bands[1], bands[2],
                               _interval(totals), _interval(fraction))
