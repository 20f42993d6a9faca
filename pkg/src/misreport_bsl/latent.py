"""Hidden-process simulators: ARCH(1) errors on an AR(1) mean, AR(1), MA(1), ARMA(1,1).

All four recursions are first-order linear filters (ARCH applies one to the
squared errors), so a batch of series is simulated with a single
``scipy.signal.lfilter`` call per filter stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import lfilter

from .epidemic import EpidemicCurve
from .errors import EmptySeries, ParameterError, SimulationDiverged
from .rng import as_generator

BURN_IN = 100


class Kind(str, Enum):
    ARCH1 = "ARCH1"
    AR1 = "AR1"
    MA1 = "MA1"
    ARMA11 = "ARMA11"


PARAMS = {
    Kind.ARCH1: ("phi0", "phi1", "alpha0", "alpha1", "sigma_eps"),
    Kind.AR1: ("phi0", "alpha", "sigma_eps"),
    Kind.MA1: ("phi0", "theta", "sigma_eps"),
    Kind.ARMA11: ("phi0", "alpha", "theta", "sigma_eps"),
}


@dataclass(frozen=True)
class LatentStructure:
    kind: Kind
    phi0: float = 0.0
    phi1: float = 0.0
    alpha0: float = 1.0
    alpha1: float = 0.0
    alpha: float = 0.0
    theta: float = 0.0
    sigma_eps: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        used = PARAMS[self.kind]
        checks = {
            "phi1": abs(self.phi1) < 1,
            "alpha0": self.alpha0 > 0,
            "alpha1": 0 <= self.alpha1 < 1,
            "alpha": abs(self.alpha) < 1,
            "theta": abs(self.theta) < 1,
            "sigma_eps": self.sigma_eps > 0,
        }
        for name, ok in checks.items():
            if name in used and not ok:
                raise ParameterError(f"{name}={getattr(self, name)} violates its constraint for {self.kind.value}")
        if not all(np.isfinite(getattr(self, name)) for name in used):
            raise ParameterError("structure parameters must be finite")

    @property
    def ar(self) -> float:
        """Coefficient on X_{t-1}."""
        if self.kind is Kind.ARCH1:
            return self.phi1
        return self.alpha if self.kind in (Kind.AR1, Kind.ARMA11) else 0.0

    @property
    def ma(self) -> float:
        return self.theta if self.kind in (Kind.MA1, Kind.ARMA11) else 0.0


@dataclass(frozen=True)
class SeriesRealization:
    """A simulated hidden series.

    ``state0`` holds ``(x, eps, z2)`` at the last burn-in step, and ``signs``
    the random signs of the ARCH errors (ones otherwise), so ``rerun`` can
    rebuild ``x`` from ``innovations`` alone.
    """

    x: np.ndarray
    innovations: np.ndarray
    state0: tuple[float, float, float]
    signs: np.ndarray


def _initial_state(s: LatentStructure) -> tuple[float, float, float]:
    z2 = s.alpha0 / (1.0 - s.alpha1) if s.kind is Kind.ARCH1 else 0.0
    return s.phi0, 0.0, z2


def _column(v, shape):
    lead = shape[:-1]
    return np.broadcast_to(np.asarray(v, dtype=float), lead).reshape(lead + (1,))


def _recurse(s: LatentStructure, eps, signs, x_prev, eps_prev, z2_prev):
    """Run the recursion along the last axis from the given previous state."""
    shape = eps.shape
    if s.kind is Kind.ARCH1:
        zi = s.alpha1 * _column(z2_prev, shape)
        z2 = lfilter([1.0], [1.0, -s.alpha1], s.alpha0 + eps, axis=-1, zi=zi)[0]
        # Z^2 can dip below zero for extreme draws; clamp for the root only
        rhs = s.phi0 + signs * np.sqrt(np.maximum(z2, 0.0))
    else:
        z2 = None
        lagged = np.concatenate([_column(eps_prev, shape), eps[..., :-1]], axis=-1)
        rhs = s.phi0 + eps + s.ma * lagged
    x = lfilter([1.0], [1.0, -s.ar], rhs, axis=-1, zi=s.ar * _column(x_prev, shape))[0]
    return x, z2


def simulate_batch(s: LatentStructure, mu_eps: np.ndarray, rngs, burn_in: int = BURN_IN):
    """Simulate one series per generator in ``rngs``.

    Returns ``(x, eps, signs, state0)`` with ``x``/``eps``/``signs`` of shape
    ``(len(rngs), T)`` and ``state0`` a tuple of per-row arrays.
    """
    mu_eps = np.asarray(mu_eps, dtype=float)
    T = mu_eps.shape[0]
    if T == 0:
        raise EmptySeries()
    n, L = len(rngs), burn_in + T
    z = np.empty((n, L))
    arch = s.kind is Kind.ARCH1
    signs = np.ones((n, L))
    for j, rng in enumerate(rngs):
        rng.standard_normal(L, out=z[j])
        if arch:
            signs[j] = np.where(rng.random(L) < 0.5, -1.0, 1.0)
    mu_full = np.concatenate([np.full(burn_in, mu_eps[0]), mu_eps])
    eps = mu_full + s.sigma_eps * z
    x0, e0, z20 = _initial_state(s)
    x, z2 = _recurse(s, eps, signs, x0, e0, z20)
    if not np.all(np.isfinite(x)):
        raise SimulationDiverged()
    b = burn_in
    if b:
        state0 = (x[:, b - 1], eps[:, b - 1], z2[:, b - 1] if arch else np.zeros(n))
    else:
        state0 = (np.full(n, x0), np.full(n, e0), np.full(n, z20))
    return x[:, b:], eps[:, b:], signs[:, b:], state0


def simulate_latent(structure: LatentStructure, curve: EpidemicCurve, T: int, rng_seed) -> SeriesRealization:
    """Simulate ``T`` steps of the hidden process with innovations N(mu_eps(t), sigma_eps^2)."""
    if T <= 0:
        raise EmptySeries()
    if curve.T < T:
        raise ParameterError(f"curve covers {curve.T} steps, need {T}")
    mu = curve.innovation_means()[:T]
    x, eps, signs, st = simulate_batch(structure, mu, [as_generator(rng_seed)])
    return SeriesRealization(x[0], eps[0], tuple(float(v[0]) for v in st), signs[0])


def rerun(structure: LatentStructure, realization: SeriesRealization) -> np.ndarray:
    """Rebuild the hidden series from its stored innovations."""
    x, _ = _recurse(structure, realization.innovations, realization.signs, *realization.state0)
    return x
