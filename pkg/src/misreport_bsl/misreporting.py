"""Observation operator and the parameter space with its flat priors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySeries, ParameterError
from .rng import as_generator


@dataclass(frozen=True)
class MisreportParams:
    omega: float
    q: float

    def __post_init__(self):
        if not 0 <= self.omega <= 1:
            raise ParameterError(f"omega must lie in [0, 1], got {self.omega}")
        if not self.q > 0:
            raise ParameterError(f"q must be positive, got {self.q}")


def observe_with(x: np.ndarray, params: MisreportParams, u: np.ndarray) -> np.ndarray:
    """Apply the operator given uniforms ``u``: misreport where ``u < omega``."""
    return np.where(u < params.omega, params.q * x, x)


def observe(x, params: MisreportParams, rng_seed) -> np.ndarray:
    """Y_t = q X_t with probability omega, else X_t, independently over t."""
    x = getattr(x, "x", x)
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptySeries()
    u = as_generator(rng_seed).random(x.shape)
    return observe_with(x, params, u)


class ParamSpace:
    """Named parameter vector with a box prior ``[lo, hi]`` per component.

    A component with ``lo == hi`` is held fixed.
    """

    def __init__(self, boxes: dict[str, tuple[float, float]]):
        self.names = tuple(boxes)
        self.lo = np.array([float(boxes[n][0]) for n in self.names])
        self.hi = np.array([float(boxes[n][1]) for n in self.names])
        if np.any(self.lo > self.hi):
            bad = [n for n, a, b in zip(self.names, self.lo, self.hi) if a > b]
            raise ParameterError(f"empty prior interval for {bad}")

    def __len__(self):
        return len(self.names)

    def __repr__(self):
        return f"ParamSpace({self.boxes()})"

    def boxes(self) -> dict[str, tuple[float, float]]:
        return {n: (float(a), float(b)) for n, a, b in zip(self.names, self.lo, self.hi)}

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ParameterError(f"unknown parameter {name!r}; model has {list(self.names)}") from None

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def free(self) -> np.ndarray:
        return self.hi > self.lo

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def sample(self, rng, size=None) -> np.ndarray:
        u = as_generator(rng).random((len(self),) if size is None else (size, len(self)))
        return self.lo + u * self.width

    def as_dict(self, theta) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, theta)}

    def vector(self, values: dict[str, float]) -> np.ndarray:
        return np.array([float(values[n]) for n in self.names])

    def with_boxes(self, overrides: dict[str, tuple[float, float]]) -> "ParamSpace":
        unknown = set(overrides) - set(self.names)
        if unknown:
            raise ParameterError(f"unknown parameters in prior overrides: {sorted(unknown)}")
        boxes = self.boxes()
        boxes.update({k: tuple(v) for k, v in overrides.items()})
        return ParamSpace(boxes)

    def log_prior(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (len(self),):
            raise ParameterError(f"expected {len(self)} parameters, got shape {theta.shape}")
        inside = np.all((theta >= self.lo) & (theta <= self.hi))
        return 0.0 if inside else -np.inf


def log_prior(theta, space: ParamSpace) -> float:
    """0 inside the prior box, -inf outside."""
    return space.log_prior(theta)
