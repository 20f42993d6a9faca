"""Logistic epidemic growth curve and the innovation mean it induces.

The cumulative number of affected individuals follows

    A(t) = M*(t) A0 e^{kt} / (M*(t) + A0 (e^{kt} - 1)),

with a log-linear carrying capacity ``M*(t) = exp(m + beta1 C1(t) + beta2 C2(t))``.
New cases per step, ``A(t) - A(t-1)``, are the mean of the noise innovations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EpidemicOverflow, ParameterError


@dataclass(frozen=True)
class EpidemicCurve:
    m: float
    k: float
    A0: float
    beta1: float = 0.0
    beta2: float = 0.0
    c1: np.ndarray = field(default=None, repr=False)
    c2: np.ndarray = field(default=None, repr=False)
    T: int | None = None

    def __post_init__(self):
        if not self.A0 > 0:
            raise ParameterError(f"A0 must be positive, got {self.A0}")
        if not self.k >= 0:
            raise ParameterError(f"k must be non-negative, got {self.k}")
        T = self.T
        cs = []
        for c in (self.c1, self.c2):
            if c is not None:
                c = np.asarray(c, dtype=float)
                if c.ndim != 1 or not np.all((c == 0) | (c == 1)):
                    raise ParameterError("covariates must be binary vectors")
                if T is None:
                    T = len(c)
                elif len(c) != T:
                    raise ParameterError(f"covariate calendar has {len(c)} entries, expected {T}")
            cs.append(c)
        if T is None:
            raise ParameterError("curve length T is required when no covariates are given")
        c1, c2 = (np.zeros(T) if c is None else c for c in cs)
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "T", int(T))
        if not np.all(np.isfinite(self.log_capacity())):
            raise ParameterError("carrying capacity must be finite and positive")

    @classmethod
    def flat(cls, T: int, A0: float = 1.0) -> "EpidemicCurve":
        """Constant curve (k = 0): zero innovation mean everywhere."""
        return cls(m=0.0, k=0.0, A0=A0, T=T)

    def log_capacity(self) -> np.ndarray:
        """log M*(t) for t = 1..T."""
        return self.m + self.beta1 * self.c1 + self.beta2 * self.c2

    def affected(self) -> np.ndarray:
        """A(t) for t = 0..T, vectorised."""
        A = np.full(self.T + 1, float(self.A0))
        if self.k != 0:
            t = np.arange(1, self.T + 1, dtype=float)
            with np.errstate(over="ignore"):
                M = np.exp(self.log_capacity())
            A[1:] = _logistic(M, self.A0, self.k, t)
        return A

    def innovation_means(self) -> np.ndarray:
        """mu_eps(t) = A(t) - A(t-1) for t = 1..T."""
        return np.diff(self.affected())


def _logistic(M, A0, k, t):
    kt = k * t
    with np.errstate(over="ignore", invalid="ignore"):
        e = np.exp(kt)
        direct = M * A0 * e / (M + A0 * (e - 1.0))
        bad = ~np.isfinite(direct)
        if np.any(bad):
            # divide through by e^{kt}
            en = np.exp(-kt)
            stable = M * A0 / (M * en + A0 * (1.0 - en))
            direct = np.where(bad, stable, direct)
    if not np.all(np.isfinite(direct)):
        raise EpidemicOverflow()
    return direct


def affected_at(curve: EpidemicCurve, t: int) -> float:
    """Cumulative affected count A(t)."""
    if t < 0 or t > curve.T:
        raise ParameterError(f"time index {t} outside 0..{curve.T}")
    if t == 0 or curve.k == 0:
        return float(curve.A0)
    M = np.exp(curve.log_capacity()[t - 1])
    return float(_logistic(M, curve.A0, curve.k, float(t)))


def innovation_mean(curve: EpidemicCurve, t: int) -> float:
    """New affected cases at step t, A(t) - A(t-1)."""
    if t < 1 or t > curve.T:
        raise ParameterError(f"time index {t} outside 1..{curve.T}")
    return affected_at(curve, t) - affected_at(curve, t - 1)
