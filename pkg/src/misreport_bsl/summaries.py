"""The five-number summary used by the synthetic likelihood."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegenerateSeries, ParameterError

MIN_LENGTH = 8
N_STATS = 5


class SummaryVector(NamedTuple):
    mean: float
    sd: float
    rho1: float
    rho2: float
    rho3: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


def summarize_batch(Y: np.ndarray) -> np.ndarray:
    """Row-wise (mean, sd, rho1, rho2, rho3) of a ``(n, T)`` array.

    Constant rows give NaN statistics; callers decide how to treat them.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    T = Y.shape[1]
    mean = Y.mean(axis=1)
    d = Y - mean[:, None]
    ss = np.einsum("ij,ij->i", d, d)
    out = np.empty((Y.shape[0], N_STATS))
    out[:, 0] = mean
    out[:, 1] = np.sqrt(ss / (T - 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        for j in (1, 2, 3):
            out[:, 1 + j] = np.einsum("ij,ij->i", d[:, :-j], d[:, j:]) / ss
    constant = np.ptp(Y, axis=1) == 0
    out[constant, 1:] = np.nan
    out[constant, 1] = 0.0
    return out


def summarize(y) -> SummaryVector:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < MIN_LENGTH:
        raise ParameterError(f"need a 1-d series of length >= {MIN_LENGTH}")
    if not np.all(np.isfinite(y)):
        raise ParameterError("series contains non-finite values")
    if np.ptp(y) == 0:
        raise DegenerateSeries()
    return SummaryVector(*(float(v) for v in summarize_batch(y[None, :])[0]))
