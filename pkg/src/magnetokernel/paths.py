"""Time grids, Brownian motion and bridge sampling, Feynman-Kac space paths.

The Feynman-Kac path between ``x`` and ``x'`` over imaginary time ``tau`` is

    q(s) = x + (x' - x) s / tau + sigma * sqrt(tau) * a(s / tau)

where ``a`` is a standard Brownian bridge on the unit interval and
``sigma = sqrt(hbar / m)``.  Bridges are built from Brownian increments by
pinning, ``a(u) = b(u) - u b(1)``, which has the exact bridge covariance on
the grid nodes.
"""

from dataclasses import dataclass, field

import numpy as np

from . import rng
from ._validation import ConfigurationError, check_int, check_point, check_positive

# stream namespaces, so that path and field draws never share a stream
PATH_STREAM = 0
FIELD_STREAM = 1
# sub-namespace of PATH_STREAM for midpoint refinements
REFINE_TAG = 2**31 - 1


@dataclass(frozen=True)
class PhysParams:
    """Physical constants shared by every formula: hbar, mass, dimension."""

    hbar: float = 1.0
    mass: float = 1.0
    dimension: int = 1

    def __post_init__(self):
        check_positive(self.hbar, "hbar")
        check_positive(self.mass, "mass")
        check_int(self.dimension, "dimension", 1)
        if self.dimension > 3:
            raise ConfigurationError(f"dimension must be 1, 2 or 3, got {self.dimension}")

    @property
    def sigma(self):
        return float(np.sqrt(self.hbar / self.mass))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``s_k = k * tau / n`` on ``[0, tau]``."""

    tau: float
    n_steps: int

    def __post_init__(self):
        check_positive(self.tau, "tau")
        check_int(self.n_steps, "n_steps", 2)

    @property
    def nodes(self):
        s = np.arange(self.n_steps + 1) * (self.tau / self.n_steps)
        s[-1] = self.tau
        return s

    @property
    def step(self):
        return self.tau / self.n_steps

    def refined(self):
        return TimeGrid(self.tau, 2 * self.n_steps)


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BridgePath:
    """A Brownian bridge sampled on the unit grid, shape ``(n + 1, D)``."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[0] < 3:
            raise ConfigurationError("bridge values must have shape (n + 1, D) with n >= 2")
        if np.any(values[0] != 0) or np.any(values[-1] != 0):
            raise ConfigurationError("bridge endpoints must be exactly zero")
        object.__setattr__(self, "values", values)

    @property
    def n_steps(self):
        return self.values.shape[0] - 1

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def nodes(self):
        return np.linspace(0.0, 1.0, self.n_steps + 1)


@dataclass(frozen=True)
class SpacePath:
    """Discretized Feynman-Kac path from ``x`` to ``x_prime``."""

    x: np.ndarray
    x_prime: np.ndarray
    tau: float
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("x", "x_prime", "points"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n_steps(self):
        return self.points.shape[0] - 1

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def nodes(self):
        return TimeGrid(self.tau, self.n_steps).nodes

    @property
    def drift(self):
        """Straight-line part ``x + (x' - x) s / tau`` on the nodes."""
        return straight_line(self.x, self.x_prime, self.n_steps)

    @property
    def increments(self):
        return np.diff(self.points, axis=0)


def straight_line(x, x_prime, n_steps):
    u = np.linspace(0.0, 1.0, n_steps + 1)[:, None]
    line = x + (x_prime - x) * u
    line[0] = x
    line[-1] = x_prime
    return line


def brownian_batch(grid, dim, seed, start, stop, key=()):
    """Brownian motions on ``grid`` for sample indices ``start:stop``.

    Returns an array of shape ``(stop - start, n + 1, dim)`` with ``b(0) = 0``.
    """
    z = rng.standard_normal_rows(seed, (PATH_STREAM,) + tuple(key), start, stop, (grid.n_steps, dim))
    dt = np.diff(grid.nodes)[None, :, None]
    out = np.zeros((stop - start, grid.n_steps + 1, dim))
    np.cumsum(np.sqrt(dt) * z, axis=1, out=out[:, 1:])
    return out


def bridge_batch(n_steps, dim, seed, start, stop, key=()):
    """Standard Brownian bridges on the unit grid, shape ``(stop - start, n + 1, dim)``."""
    b = brownian_batch(TimeGrid(1.0, n_steps), dim, seed, start, stop, key)
    u = np.linspace(0.0, 1.0, n_steps + 1)[None, :, None]
    a = b - u * b[:, -1:, :]
    a[:, 0] = 0.0
    a[:, -1] = 0.0
    return a


def sample_brownian(grid, dim, seed, index=0):
    """One Brownian path ``b(s_k)`` on ``grid``; sample ``index`` of stream ``seed``."""
    if not isinstance(grid, TimeGrid):
        raise ConfigurationError("grid must be a TimeGrid")
    check_int(dim, "dim", 1)
    return brownian_batch(grid, dim, seed, index, index + 1)[0]


def sample_bridge(n_steps, dim, seed, index=0):
    """One standard Brownian bridge on the unit grid."""
    check_int(n_steps, "n_steps", 2)
    check_int(dim, "dim", 1)
    return BridgePath(bridge_batch(n_steps, dim, seed, index, index + 1)[0])


def space_points(bridges, x, x_prime, tau, sigma):
    """Vectorized path construction for bridges of shape ``(..., n + 1, D)``."""
    n_steps = bridges.shape[-2] - 1
    line = straight_line(x, x_prime, n_steps)
    q = line + (sigma * np.sqrt(tau)) * bridges
    q[..., 0, :] = x
    q[..., -1, :] = x_prime
    return q


def make_space_path(bridge, x, x_prime, tau, params):
    """Map a unit-interval bridge to the Feynman-Kac path between ``x`` and ``x'``."""
    tau = check_positive(tau, "tau")
    dim = params.dimension
    if bridge.dim != dim:
        raise ConfigurationError(f"bridge has dimension {bridge.dim}, params.dimension is {dim}")
    x = check_point(x, dim, "x")
    x_prime = check_point(x_prime, dim, "x_prime")
    points = space_points(bridge.values, x, x_prime, tau, params.sigma)
    return SpacePath(x, x_prime, tau, points)


def refine_bridges(bridges, seed, key=(), start=0):
    """Insert conditional midpoints into bridges of shape ``(P, n + 1, D)``.

    Given its neighbours, the bridge value at a midpoint is Gaussian with mean
    the neighbour average and variance ``du / 4`` for coarse spacing ``du``.
    The coarse nodes are kept, so the refined batch is the same random path
    observed on a grid twice as fine.
    """
    bridges = np.asarray(bridges, dtype=float)
    n_paths, n_nodes, dim = bridges.shape
    n = n_nodes - 1
    z = rng.standard_normal_rows(seed, (PATH_STREAM, REFINE_TAG) + tuple(key) + (n,), start, start + n_paths, (n, dim))
    out = np.empty((n_paths, 2 * n + 1, dim))
    out[:, ::2] = bridges
    out[:, 1::2] = 0.5 * (bridges[:, 1:] + bridges[:, :-1]) + np.sqrt(0.25 / n) * z
    return out
