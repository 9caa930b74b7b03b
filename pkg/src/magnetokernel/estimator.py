"""Monte Carlo Feynman-Kac estimators of kernels, traces and Green functions.

Every kernel estimate is

    K_tau(x -> x') = K_free(x, x', tau) * E[ W(q) ],

an average over Brownian-bridge paths ``q`` from ``x`` to ``x'`` of a weight

* fixed field:        ``W = exp((i / hbar) sum_k A(m_k) . dq_k - (1 / hbar) int V ds)``
* Gaussian average:   ``W = exp(-Sigma[q] / (2 hbar^2) - (1 / hbar) int V ds)``

with ``m_k`` the step midpoints and ``Sigma[q]`` the covariance double sum at
the midpoints.  ``int V ds`` uses the trapezoid rule on the path nodes.

Paths are generated in fixed blocks of :data:`magnetokernel.rng.BLOCK_SIZE`
with per-block streams, and block statistics are merged in block order, so a
result depends only on ``(seed, n_paths, n_steps)`` and never on ``workers``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import exact
from ._parallel import Moments, combine, map_blocks
from ._validation import ConfigurationError, check_evaluation_points, check_int, check_point, check_positive
from .fields import (
    CovarianceError,
    CovarianceSpec,
    FieldSample,
    grid_for,
    sample_field,
)
from .paths import PhysParams, bridge_batch, space_points
from .potentials import Zero, trapezoid_integral
from .stochint import midpoint_sum


class EstimatorError(RuntimeError):
    """Base class for estimator failures that are not configuration errors."""


class PathExitError(EstimatorError):
    """Too many paths left the grid on which the field is sampled."""


class BoxTooSmallError(EstimatorError):
    """The diagonal has not decayed at the boundary of the integration box."""


class QuadratureError(EstimatorError):
    """A proper-time quadrature could not meet its tail tolerance."""


class DivergenceError(EstimatorError):
    """The requested quantity diverges for the given dimension."""


MAX_EXIT_FRACTION = 1e-3


@dataclass(frozen=True)
class KernelEstimate:
    mean: complex
    std_error: float
    n_paths: int
    n_steps: int
    x: np.ndarray = field(repr=False)
    x_prime: np.ndarray = field(repr=False)
    tau: float = 1.0
    estimator: str = "fixed"
    n_exited: int = 0
    n_fields: int = 0
    path_std_error: float = 0.0

    @property
    def real(self):
        return float(np.real(self.mean))

    @property
    def imag(self):
        return float(np.imag(self.mean))


@dataclass(frozen=True)
class GreenEstimate:
    value: complex
    quadrature_error: float
    mc_error: float
    m: float
    tail_bound: float = 0.0
    n_paths: int = 0
    n_steps: int = 0
    n_tau: int = 0

    @property
    def real(self):
        return float(np.real(self.value))

    @property
    def std_error(self):
        return self.mc_error


@dataclass(frozen=True)
class TraceEstimate:
    value: float
    std_error: float
    truncation: float
    boundary_ratio: float
    n_paths: int
    n_steps: int
    n_grid: int


# --------------------------------------------------------------------------
# weights


def _setup(x, x_prime, tau, n_paths, n_steps, params):
    if not isinstance(params, PhysParams):
        raise ConfigurationError("params must be a PhysParams")
    dim = params.dimension
    x = check_point(x, dim, "x")
    x_prime = check_point(x_prime, dim, "x_prime")
    tau = check_positive(tau, "tau")
    check_int(n_paths, "n_paths", 2)
    check_int(n_steps, "n_steps", 2)
    return x, x_prime, tau


def potential_exponent(V, points, tau, hbar):
    """``(1 / hbar) int V ds`` per path for node arrays ``(P, n + 1, D)``."""
    if V is None or V.is_zero():
        return np.zeros(points.shape[0])
    values = V.checked(points)
    return trapezoid_integral(values, tau / (points.shape[1] - 1)) / hbar


def _as_vector_field(field):
    if field is None:
        return None
    if isinstance(field, FieldSample) or callable(field):
        return field
    raise ConfigurationError("field must be a FieldSample, a callable or None")


def _fixed_weights(field, V, points, tau, params):
    """Complex weights and exit count for a batch of paths."""
    n_exit = 0
    log_w = -potential_exponent(V, points, tau, params.hbar)
    if field is None:
        return np.exp(log_w).astype(complex), 0
    evaluator = field
    if isinstance(field, FieldSample) and not field.periodic_eval:
        inside = np.all(field.grid.contains(points), axis=-1)
        n_exit = int(np.count_nonzero(~inside))
        evaluator = field.wrapped()
    phase = midpoint_sum(evaluator, points) / params.hbar
    return np.exp(log_w + 1j * phase), n_exit


def sigma_batch(spec, points, chunk_elems=1_500_000):
    """``Sigma[q]`` with midpoint evaluation for node arrays ``(P, n + 1, D)``."""
    dq = np.diff(points, axis=1)
    mid = 0.5 * (points[:, 1:] + points[:, :-1])
    n = dq.shape[1]
    step = max(1, chunk_elems // (n * n))
    out = np.empty(points.shape[0])
    for i in range(0, points.shape[0], step):
        out[i : i + step] = spec.quadratic_form(mid[i : i + step], dq[i : i + step])
    scale = np.sum(np.abs(dq), axis=(1, 2)) ** 2 * abs(spec.tensor(mid[0, 0], mid[0, 0])).max() + 1e-300
    if np.any(out < -1e-9 * scale):
        raise CovarianceError(f"negative Sigma[q] = {out.min():.3e}: covariance is not positive semidefinite")
    return out


def gaussian_path_functionals(spec, V, points, tau, params):
    """``(Sigma[q], (1/hbar) int V ds)`` per path; ``Sigma = 0`` without a field."""
    if spec is None or spec.is_null():
        sig = np.zeros(points.shape[0])
    else:
        sig = sigma_batch(spec, points)
    return sig, potential_exponent(V, points, tau, params.hbar)


def _gaussian_weights(spec, V, points, tau, params):
    sig, pot = gaussian_path_functionals(spec, V, points, tau, params)
    return np.exp(-sig / (2 * params.hbar**2) - pot)


# --------------------------------------------------------------------------
# kernels


def kernel_fixed_field(field, V, x, x_prime, tau, n_paths, n_steps, params, seed, workers=None, key=()):
    """Kernel for one vector potential (grid sample or callable), complex valued.

    Paths leaving the grid of a :class:`FieldSample` are counted; beyond 0.1%
    of all paths the estimate is refused, otherwise they see the periodic
    continuation of the field.
    """
    x, x_prime, tau = _setup(x, x_prime, tau, n_paths, n_steps, params)
    field = _as_vector_field(field)
    V = V or Zero()
    dim, sigma = params.dimension, params.sigma

    def block(_, start, stop):
        a = bridge_batch(n_steps, dim, seed, start, stop, key)
        q = space_points(a, x, x_prime, tau, sigma)
        w, n_exit = _fixed_weights(field, V, q, tau, params)
        return Moments.of(w), n_exit

    parts = map_blocks(block, n_paths, workers)
    n_exit = sum(p[1] for p in parts)
    if n_exit > MAX_EXIT_FRACTION * n_paths:
        raise PathExitError(f"{n_exit} of {n_paths} paths left the field grid (limit {MAX_EXIT_FRACTION:.1%})")
    mom = combine(p[0] for p in parts)
    k0 = float(exact.free_kernel(x, x_prime, tau, params))
    return KernelEstimate(
        mean=complex(k0 * mom.mean),
        std_error=float(k0 * mom.std_error),
        n_paths=n_paths,
        n_steps=n_steps,
        x=x,
        x_prime=x_prime,
        tau=tau,
        estimator="fixed",
        n_exited=n_exit,
        path_std_error=float(k0 * mom.std_error),
    )


def path_reach(x, x_prime, tau, params, width=3.0):
    """Radius that contains the bridge paths with overwhelming probability."""
    r = max(float(np.max(np.abs(x))), float(np.max(np.abs(x_prime))))
    return r + width * params.sigma * math.sqrt(tau) + 1.0


def kernel_quenched_average(spec, V, x, x_prime, tau, n_fields, n_paths, n_steps, params, seed, grid=None, workers=None):
    """Average of :func:`kernel_fixed_field` over independent field realizations.

    Field ``f`` uses field stream ``f`` and its own path stream, and the
    standard error comes from the spread of the per-field kernel estimates,
    which contains both the field-level and the path-level variance.
    """
    x, x_prime, tau = _setup(x, x_prime, tau, n_paths, n_steps, params)
    check_int(n_fields, "n_fields", 2)
    null = spec is None or spec.is_null()
    if not null and not isinstance(spec, CovarianceSpec):
        raise ConfigurationError(f"unsupported covariance {spec!r}")
    if not null and grid is None:
        grid = grid_for(spec, params.dimension, path_reach(x, x_prime, tau, params))

    def one(f, _start, _stop):
        fld = None if null else sample_field(spec, grid, seed, f)
        return kernel_fixed_field(fld, V, x, x_prime, tau, n_paths, n_steps, params, seed, workers=1, key=(f,))

    ests = map_blocks(one, n_fields, workers, block_size=1)
    means = np.array([e.mean for e in ests])
    mom = Moments.of(means)
    path_se = float(np.sqrt(np.mean([e.std_error**2 for e in ests]) / n_fields))
    return KernelEstimate(
        mean=complex(mom.mean),
        std_error=float(np.sqrt(mom.variance / n_fields)),
        n_paths=n_paths,
        n_steps=n_steps,
        x=x,
        x_prime=x_prime,
        tau=tau,
        estimator="quenched",
        n_exited=sum(e.n_exited for e in ests),
        n_fields=n_fields,
        path_std_error=path_se,
    )


def kernel_gaussian_average(spec, V, x, x_prime, tau, n_paths, n_steps, params, seed, workers=None, key=()):
    """Field-averaged kernel from the analytic Gaussian average of the phase."""
    x, x_prime, tau = _setup(x, x_prime, tau, n_paths, n_steps, params)
    if spec is not None and not isinstance(spec, CovarianceSpec):
        raise ConfigurationError(f"unsupported covariance {spec!r}")
    V = V or Zero()
    dim, sigma = params.dimension, params.sigma

    def block(_, start, stop):
        a = bridge_batch(n_steps, dim, seed, start, stop, key)
        q = space_points(a, x, x_prime, tau, sigma)
        return Moments.of(_gaussian_weights(spec, V, q, tau, params))

    mom = combine(map_blocks(block, n_paths, workers))
    k0 = float(exact.free_kernel(x, x_prime, tau, params))
    return KernelEstimate(
        mean=float(k0 * mom.mean),
        std_error=float(k0 * mom.std_error),
        n_paths=n_paths,
        n_steps=n_steps,
        x=x,
        x_prime=x_prime,
        tau=tau,
        estimator="gaussian",
        path_std_error=float(k0 * mom.std_error),
    )


# --------------------------------------------------------------------------
# traces


def _box_axes(box, dim):
    box = np.asarray(box, dtype=float)
    if box.ndim == 0:
        check_positive(float(box), "box half-width")
        return np.tile([-float(box), float(box)], (dim, 1))
    box = box.reshape(-1, 2)
    if box.shape[0] == 1:
        box = np.tile(box, (dim, 1))
    if box.shape != (dim, 2) or np.any(box[:, 1] <= box[:, 0]):
        raise ConfigurationError("box must be a half-width or one (lo, hi) pair per axis")
    return box


def trace_estimate(spec, V, tau, box, n_grid, n_paths, n_steps, params, seed, workers=None, boundary_tol=1e-3):
    r"""``\int_box dx <K_tau(x, x)>`` by Gauss-Legendre quadrature in ``x``.

    The same bridges serve every quadrature node, so each bridge yields one
    sample of the whole integral and the standard error is that of the
    integral.  The diagonal is also evaluated at the centres of the box faces;
    if it exceeds ``boundary_tol`` times the value at the box centre the box
    is rejected.  ``truncation`` estimates the part of the upper integrand
    ``(2 pi tau sigma^2)^{-D/2} exp(-tau V / hbar)`` lying outside the box.
    """
    dim = params.dimension
    tau = check_positive(tau, "tau")
    check_int(n_grid, "n_grid", 2)
    check_int(n_paths, "n_paths", 2)
    check_int(n_steps, "n_steps", 2)
    V = V or Zero()
    axes = _box_axes(box, dim)
    gx, gw = np.polynomial.legendre.leggauss(n_grid)
    centre = axes.mean(axis=1)
    half = 0.5 * (axes[:, 1] - axes[:, 0])
    mesh = np.meshgrid(*[centre[a] + half[a] * gx for a in range(dim)], indexing="ij")
    nodes = np.stack(mesh, axis=-1).reshape(-1, dim)
    weights = np.prod(np.meshgrid(*[half[a] * gw for a in range(dim)], indexing="ij"), axis=0).ravel()
    probes = [centre]
    for a in range(dim):
        for side in (0, 1):
            p = centre.copy()
            p[a] = axes[a, side]
            probes.append(p)
    probes = np.asarray(probes)

    def block(_, start, stop):
        a = bridge_batch(n_steps, dim, seed, start, stop)
        # Sigma of a closed loop is translation invariant for every supported
        # covariance (the anchor terms multiply sum_k dq_k = 0), so it is
        # computed once per bridge and shared by all quadrature nodes
        loop = space_points(a, centre, centre, tau, params.sigma)
        field_part = np.exp(-gaussian_path_functionals(spec, None, loop, tau, params)[0] / (2 * params.hbar**2))

        def diagonal(xk):
            q = loop + (xk - centre)
            return field_part * np.exp(-potential_exponent(V, q, tau, params.hbar))

        integral = np.zeros(stop - start)
        for xk, wk in zip(nodes, weights):
            integral += wk * diagonal(xk)
        probe = np.stack([diagonal(p) for p in probes], axis=-1)
        return Moments.of(integral), Moments.of(probe)

    parts = map_blocks(block, n_paths, workers)
    mom = combine(p[0] for p in parts)
    probe = combine(p[1] for p in parts)
    ratio = float(np.max(probe.mean[1:]) / probe.mean[0]) if probe.mean[0] > 0 else math.inf
    if not ratio <= boundary_tol:
        raise BoxTooSmallError(
            f"diagonal at the box boundary is {ratio:.3g} of its central value (limit {boundary_tol:g}); "
            "enlarge the box or use a confining potential"
        )
    pref = float(exact.free_prefactor(tau, params))
    return TraceEstimate(
        value=float(pref * mom.mean),
        std_error=float(pref * mom.std_error),
        truncation=float(pref * _outside_integral(V, tau, axes, params)),
        boundary_ratio=ratio,
        n_paths=n_paths,
        n_steps=n_steps,
        n_grid=n_grid,
    )


def _outside_integral(V, tau, axes, params, factor=3.0, n=64):
    """``int exp(-tau V / hbar)`` over an enlarged box minus the box itself."""
    dim = axes.shape[0]
    centre = axes.mean(axis=1)
    half = 0.5 * (axes[:, 1] - axes[:, 0])
    gx, gw = np.polynomial.legendre.leggauss(n)

    def box_integral(scale):
        mesh = np.meshgrid(*[centre[a] + scale * half[a] * gx for a in range(dim)], indexing="ij")
        pts = np.stack(mesh, axis=-1)
        w = np.prod(np.meshgrid(*[scale * half[a] * gw for a in range(dim)], indexing="ij"), axis=0)
        return float(np.sum(w * np.exp(-tau * np.asarray(V(pts)) / params.hbar)))

    return max(0.0, box_integral(factor) - box_integral(1.0))


# --------------------------------------------------------------------------
# Green functions


def _proper_time_nodes(tau_min, tau_max, n_tau):
    u, w = np.polynomial.legendre.leggauss(n_tau)
    lo, hi = math.log(tau_min), math.log(tau_max)
    logt = 0.5 * (hi - lo) * u + 0.5 * (hi + lo)
    t = np.exp(logt)
    return t, 0.5 * (hi - lo) * w * t


def _free_integrand(t, r2, m, params):
    return np.exp(-0.5 * m * m * t) * (2 * np.pi * t * params.sigma**2) ** (-params.dimension / 2) * np.exp(
        -r2 / (2 * t * params.sigma**2)
    )


def _free_integral(a, b, r2, m, params):
    val, _ = integrate.quad(lambda t: _free_integrand(t, r2, m, params), a, b, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def _choose_tau_max(m, params, reference, tol, tau_max):
    if tau_max is not None:
        tail = exact.proper_time_tail(tau_max, m, params)
        if tail > tol * reference:
            raise QuadratureError(f"proper-time tail bound {tail:.3g} exceeds tolerance {tol * reference:.3g} at tau_max={tau_max}")
        return tau_max, tail
    tau_max = 1.0
    while exact.proper_time_tail(tau_max, m, params) > tol * reference:
        tau_max *= 1.25
    return tau_max, exact.proper_time_tail(tau_max, m, params)


def _source_weights(source, V, bridges, x, x_prime, tau, params):
    q = space_points(bridges, x, x_prime, tau, params.sigma)
    if source is None or isinstance(source, CovarianceSpec):
        return _gaussian_weights(source, V, q, tau, params).astype(complex)
    return _fixed_weights(source, V, q, tau, params)[0]


def green_estimate(
    source, V, x, x_prime, m, params, n_paths, n_steps, seed,
    n_tau=40, tau_min=None, tau_max=None, tol=1e-4, workers=None,
):
    r"""``\int_0^\infty e^{-m^2 tau / 2} K_tau(x -> x') dtau``.

    ``source`` is ``None`` (no field), a covariance (Gaussian-average route) or
    a vector field (fixed-field route).  Gauss-Legendre nodes in ``log tau``
    cover ``[tau_min, tau_max]`` with bridges shared across nodes.  Below
    ``tau_min`` the kernel is replaced by the free kernel; above ``tau_max``
    the tail is bounded by ``proper_time_tail``.  ``quadrature_error`` adds
    the node error measured on the free integrand, the small-time remainder
    and the tail bound.
    """
    dim = params.dimension
    x = check_point(x, dim, "x")
    x_prime = check_point(x_prime, dim, "x_prime")
    m = check_positive(m, "m")
    check_int(n_paths, "n_paths", 2)
    check_int(n_steps, "n_steps", 2)
    V = V or Zero()
    r2 = float(np.sum((x - x_prime) ** 2))
    if dim >= 2 and r2 == 0:
        raise DivergenceError("the Green function diverges at coincident points for D >= 2")
    reference = float(exact.free_green(x, x_prime, m, params))
    tau_max, tail = _choose_tau_max(m, params, reference, tol, tau_max)
    if tau_min is None:
        tau_min = r2 / (100 * params.sigma**2) if r2 > 0 else 1e-4
    small = _free_integral(0.0, tau_min, r2, m, params)
    t, w = _proper_time_nodes(tau_min, tau_max, n_tau)
    c = w * _free_integrand(t, r2, m, params)
    node_err = abs(float(np.sum(c)) - _free_integral(tau_min, tau_max, r2, m, params))

    def block(_, start, stop):
        a = bridge_batch(n_steps, dim, seed, start, stop)
        total = np.zeros(stop - start, dtype=complex)
        for tj, cj in zip(t, c):
            total += cj * _source_weights(source, V, a, x, x_prime, tj, params)
        return Moments.of(total)

    mom = combine(map_blocks(block, n_paths, workers))
    value = mom.mean + small
    if not np.iscomplexobj(value) or abs(np.imag(value)) == 0:
        value = float(np.real(value))
    # below tau_min the weight is 1 - O(tau_min), so the free small-time part is off by that fraction
    small_err = small * min(1.0, tau_min)
    return GreenEstimate(
        value=value,
        quadrature_error=float(node_err + small_err + tail),
        mc_error=float(mom.std_error),
        m=m,
        tail_bound=float(tail),
        n_paths=n_paths,
        n_steps=n_steps,
        n_tau=n_tau,
    )


def green_diagonal_difference(
    source, V, x, m, params, n_paths, n_steps, seed,
    n_tau=40, tau_min=1e-3, tau_max=None, tol=1e-4, workers=None,
):
    r"""``\int_0^\infty e^{-m^2 tau/2} (K^{(A,V)}_tau(x, x) - K^{(0,0)}_tau(x, x)) dtau``.

    Finite for Hoelder fields in ``D <= 3``; higher dimensions are refused.
    The integrand difference is ``K_free(tau) (E[W] - 1)``, estimated on shared
    bridges.  The remainder below ``tau_min`` is charged to ``quadrature_error``
    as ``tau_min`` times the modulus of the integrand at the first node.
    """
    dim = params.dimension
    if dim > 3:
        raise DivergenceError("the diagonal difference diverges for D > 3")
    x = check_point(x, dim, "x")
    m = check_positive(m, "m")
    V = V or Zero()
    # tail tolerance relative to the proper-time weight of a unit-time free diagonal
    reference = float(exact.proper_time_tail(1.0, m, params))
    tau_max, tail = _choose_tau_max(m, params, reference, tol, tau_max)
    tail *= 2.0
    t, w = _proper_time_nodes(tau_min, tau_max, n_tau)
    c = w * _free_integrand(t, 0.0, m, params)

    def block(_, start, stop):
        a = bridge_batch(n_steps, dim, seed, start, stop)
        total = np.zeros(stop - start, dtype=complex)
        first = np.zeros(stop - start, dtype=complex)
        for j, (tj, cj) in enumerate(zip(t, c)):
            diff = _source_weights(source, V, a, x, x, tj, params) - 1.0
            total += cj * diff
            if j == 0:
                first = diff * _free_integrand(tj, 0.0, m, params)
        return Moments.of(total), Moments.of(first)

    parts = map_blocks(block, n_paths, workers)
    mom = combine(p[0] for p in parts)
    first = combine(p[1] for p in parts)
    value = mom.mean
    if abs(np.imag(value)) == 0:
        value = float(np.real(value))
    return GreenEstimate(
        value=value,
        quadrature_error=float(abs(first.mean) * tau_min + tail),
        mc_error=float(mom.std_error),
        m=m,
        tail_bound=float(tail),
        n_paths=n_paths,
        n_steps=n_steps,
        n_tau=n_tau,
    )


# --------------------------------------------------------------------------
# estimator object


class FeynmanKacKernel(RegressorMixin, BaseEstimator):
    """Kernel estimator with the ``fit`` / ``predict`` interface.

    Rows of ``X`` are ``(x, x', tau)`` with ``2 D + 1`` columns.  ``fit`` only
    validates the configuration (the estimator has nothing to learn);
    ``predict`` returns the real part of the kernel mean and
    ``predict_with_error`` also returns standard errors.

    ``route`` is ``"gaussian"`` (analytic field average), ``"quenched"``
    (sampled fields) or ``"fixed"`` (the vector field ``field``).
    """

    def __init__(
        self, covariance=None, potential=None, route="gaussian", field=None,
        n_paths=4096, n_steps=64, n_fields=32, hbar=1.0, mass=1.0, dimension=1, seed=0, workers=None,
    ):
        self.covariance = covariance
        self.potential = potential
        self.route = route
        self.field = field
        self.n_paths = n_paths
        self.n_steps = n_steps
        self.n_fields = n_fields
        self.hbar = hbar
        self.mass = mass
        self.dimension = dimension
        self.seed = seed
        self.workers = workers

    def fit(self, X=None, y=None):
        if self.route not in ("gaussian", "quenched", "fixed"):
            raise ConfigurationError(f"unknown route {self.route!r}")
        if self.seed is None:
            raise ConfigurationError("seed is mandatory")
        self.params_ = PhysParams(self.hbar, self.mass, self.dimension)
        check_int(self.n_paths, "n_paths", 2)
        check_int(self.n_steps, "n_steps", 2)
        if X is not None:
            check_evaluation_points(X, self.dimension)
        return self

    def _estimate(self, x, xp, tau):
        p = self.params_
        if self.route == "gaussian":
            return kernel_gaussian_average(self.covariance, self.potential, x, xp, tau, self.n_paths, self.n_steps, p, self.seed, self.workers)
        if self.route == "quenched":
            return kernel_quenched_average(
                self.covariance, self.potential, x, xp, tau, self.n_fields, self.n_paths, self.n_steps, p, self.seed, workers=self.workers
            )
        return kernel_fixed_field(self.field, self.potential, x, xp, tau, self.n_paths, self.n_steps, p, self.seed, self.workers)

    def estimates(self, X):
        check_is_fitted(self, "params_")
        xs, xps, taus = check_evaluation_points(X, self.dimension)
        return [self._estimate(x, xp, float(t)) for x, xp, t in zip(xs, xps, taus)]

    def predict_with_error(self, X):
        ests = self.estimates(X)
        return np.array([e.real for e in ests]), np.array([e.std_error for e in ests])

    def predict(self, X):
        return self.predict_with_error(X)[0]
