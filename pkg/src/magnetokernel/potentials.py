"""Scalar potentials entering the Feynman-Kac weight ``exp(-(1/hbar) int V ds)``.

Each potential carries declared bounds ``lower <= V <= upper`` (``upper`` may
be infinite).  The estimators check the lower bound on every evaluated point.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from ._validation import ConfigurationError, check_positive


class PotentialError(ValueError):
    """A potential violated its declared bounds on sampled points."""


class ScalarPotential:
    lower = 0.0
    upper = math.inf
    confining = False

    def __call__(self, points):
        raise NotImplementedError

    def checked(self, points, tol=1e-12):
        """Evaluate and assert the declared bounds on the sample."""
        values = np.asarray(self(points), dtype=float)
        if not np.all(np.isfinite(values)):
            raise PotentialError("potential is not finite on some path points")
        if values.size and np.min(values) < self.lower - tol * max(1.0, abs(self.lower)):
            raise PotentialError(f"potential value {np.min(values):.6g} below declared lower bound {self.lower}")
        if values.size and np.max(values) > self.upper + tol * max(1.0, abs(self.upper)):
            raise PotentialError(f"potential value {np.max(values):.6g} above declared upper bound {self.upper}")
        return values

    def is_zero(self):
        return False

    def describe(self):
        return type(self).__name__


@dataclass(frozen=True)
class Zero(ScalarPotential):
    lower: float = 0.0
    upper: float = 0.0

    def __call__(self, points):
        return np.zeros(np.shape(points)[:-1])

    def is_zero(self):
        return True

    def describe(self):
        return "zero"


@dataclass(frozen=True)
class Constant(ScalarPotential):
    value: float = 0.0

    @property
    def lower(self):
        return self.value

    @property
    def upper(self):
        return self.value

    def __call__(self, points):
        return np.full(np.shape(points)[:-1], float(self.value))

    def is_zero(self):
        return self.value == 0

    def describe(self):
        return f"const(v={self.value:g})"


@dataclass(frozen=True)
class Quadratic(ScalarPotential):
    """``V = (m omega^2 / 2) sum_{j in axes} x_j^2``; all axes when ``axes`` is None."""

    omega: float
    axes: Optional[Tuple[int, ...]] = None
    mass: float = 1.0
    lower: float = 0.0
    upper: float = math.inf

    def __post_init__(self):
        check_positive(self.omega, "omega")
        check_positive(self.mass, "mass")
        if self.axes is not None:
            object.__setattr__(self, "axes", tuple(int(a) for a in self.axes))

    @property
    def confining(self):
        return self.axes is None

    @property
    def coefficient(self):
        return 0.5 * self.mass * self.omega**2

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        sel = points if self.axes is None else points[..., list(self.axes)]
        return self.coefficient * np.sum(sel * sel, axis=-1)

    def describe(self):
        axes = "all" if self.axes is None else "".join(str(a) for a in self.axes)
        return f"quadratic(omega={self.omega:g},axes={axes})"


@dataclass(frozen=True)
class PowerLaw(ScalarPotential):
    """``V = B |x|^{2 beta}``, so ``V <= B |x|^{2 beta} + a`` holds with ``a = 0``."""

    B: float
    beta: float
    lower: float = 0.0
    upper: float = math.inf
    confining: bool = True

    def __post_init__(self):
        check_positive(self.B, "B")
        check_positive(self.beta, "beta")

    @property
    def a(self):
        return 0.0

    def __call__(self, points):
        r2 = np.sum(np.asarray(points, dtype=float) ** 2, axis=-1)
        return self.B * r2**self.beta

    def describe(self):
        return f"power(B={self.B:g},beta={self.beta:g})"


@dataclass(frozen=True)
class Saturating(ScalarPotential):
    """``V = a |x|^2 / (length^2 + |x|^2)``, bounded with ``0 <= V <= a``."""

    height: float
    length: float = 1.0

    def __post_init__(self):
        check_positive(self.height, "height")
        check_positive(self.length, "length")

    @property
    def lower(self):
        return 0.0

    @property
    def upper(self):
        return float(self.height)

    def __call__(self, points):
        r2 = np.sum(np.asarray(points, dtype=float) ** 2, axis=-1)
        return self.height * r2 / (self.length**2 + r2)

    def describe(self):
        return f"saturating(a={self.height:g},l={self.length:g})"


@dataclass(frozen=True)
class Custom(ScalarPotential):
    """User potential ``func(points[..., D]) -> values[...]`` with declared bounds."""

    func: Callable = field(compare=False)
    lower: float = -math.inf
    upper: float = math.inf
    confining: bool = False
    name: str = "custom"

    def __post_init__(self):
        if self.lower > self.upper:
            raise ConfigurationError("lower bound exceeds upper bound")

    def __call__(self, points):
        return np.asarray(self.func(np.asarray(points, dtype=float)), dtype=float)

    def describe(self):
        return self.name


def trapezoid_integral(values, dt):
    """``int V ds`` by the trapezoid rule over the last axis of node values."""
    return dt * (values.sum(axis=-1) - 0.5 * (values[..., 0] + values[..., -1]))
