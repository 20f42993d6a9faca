"""Model specification: which latent structure, which parameters are estimated, and their priors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .epidemic import EpidemicCurve
from .errors import ParameterError
from .latent import PARAMS, Kind, LatentStructure
from .misreporting import MisreportParams, ParamSpace

STATIONARY = (-0.99, 0.99)
Q_BOX = (1e-3, 2.0)


def parameter_names(kind, covariates=(False, False)) -> tuple[str, ...]:
    names = PARAMS[Kind(kind)] + ("omega", "q", "m", "k")
    return names + tuple(b for b, on in zip(("beta1", "beta2"), covariates) if on)


def default_boxes(kind, y, covariates=(False, False)) -> dict[str, tuple[float, float]]:
    """Data-scaled prior boxes. Every box is overridable from the run config."""
    y = np.asarray(y, dtype=float)
    ymax = float(np.max(np.abs(y)))
    sd = float(np.std(y, ddof=1)) if y.size > 1 else 1.0
    sd = sd if sd > 0 else 1.0
    top = max(float(np.max(y)), 1e-3)
    level = 10.0 * (ymax + sd)
    table = {
        "phi0": (-level, level),
        "phi1": STATIONARY,
        "alpha": STATIONARY,
        "theta": STATIONARY,
        "alpha0": (1e-6, 10.0),
        "alpha1": (0.0, 0.99),
        "sigma_eps": (1e-6, 10.0 * sd),
        "omega": (0.0, 1.0),
        "q": Q_BOX,
        "m": (np.log(top), np.log(100.0 * top / Q_BOX[0])),
        "k": (1e-6, 2.0),
        "beta1": (-5.0, 5.0),
        "beta2": (-5.0, 5.0),
    }
    return {n: table[n] for n in parameter_names(kind, covariates)}


@dataclass
class ModelSpec:
    """Everything needed to simulate an observed series from a parameter vector.

    ``c1``/``c2`` are the covariate calendars (length T); ``A0`` is fixed.
    """

    kind: Kind
    space: ParamSpace
    T: int
    A0: float
    c1: np.ndarray | None = None
    c2: np.ndarray | None = None

    def __post_init__(self):
        self.kind = Kind(self.kind)
        self.c1 = np.zeros(self.T) if self.c1 is None else np.asarray(self.c1, dtype=float)
        self.c2 = np.zeros(self.T) if self.c2 is None else np.asarray(self.c2, dtype=float)
        expected = parameter_names(self.kind, ("beta1" in self.space.names, "beta2" in self.space.names))
        if tuple(self.space.names) != expected:
            raise ParameterError(f"parameter space {self.space.names} does not match {self.kind.value}: {expected}")
        if not self.A0 > 0:
            raise ParameterError("A0 must be positive")

    @classmethod
    def for_series(cls, kind, y, c1=None, c2=None, priors=None, A0=None, use_covariates=True):
        """Model with default priors scaled to the observed series ``y``."""
        y = np.asarray(y, dtype=float)
        T = len(y)
        cov = tuple(
            bool(use_covariates and c is not None and np.ptp(np.asarray(c, dtype=float)) > 0)
            for c in (c1, c2)
        )
        space = ParamSpace(default_boxes(kind, y, cov))
        if priors:
            space = space.with_boxes(priors)
        if A0 is None:
            A0 = default_A0(y, space)
        return cls(kind, space, T, A0, c1, c2)

    def unpack(self, theta):
        p = self.space.as_dict(theta)
        structure = LatentStructure(self.kind, **{n: p[n] for n in PARAMS[self.kind]})
        curve = EpidemicCurve(m=p["m"], k=p["k"], A0=self.A0, beta1=p.get("beta1", 0.0),
                              beta2=p.get("beta2", 0.0), c1=self.c1, c2=self.c2, T=self.T)
        return structure, curve, MisreportParams(p["omega"], p["q"])

    def echo(self) -> dict:
        out = {"model": self.kind.value, "T": self.T, "A0": self.A0}
        out.update({f"prior_{n}": list(b) for n, b in self.space.boxes().items()})
        return out


def default_A0(y, space: ParamSpace) -> float:
    """First positive observation scaled up by the prior midpoint of q."""
    y = np.asarray(y, dtype=float)
    positive = y[y > 0]
    first = float(positive[0]) if positive.size else 1.0
    i = space.index("q")
    return first / (0.5 * (space.lo[i] + space.hi[i]))
