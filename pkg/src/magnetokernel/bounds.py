"""Closed-form bound evaluators, constant fitting and verdicts.

The kernel bounds hold "for some constants C, a_j".  They are made falsifiable
by fitting: the constants of a log-linear lower form are chosen by a linear
program that keeps the form below ``mean - 3 SE`` on a training grid while
making it as large as possible, and the fitted form is then checked on a
disjoint test grid.  A :class:`BoundReport` records one checked point.

Conventions shared with :mod:`magnetokernel.estimator`: kernels are
``K_free * E[W]``; the Gaussian-smeared upper bound uses the bridge law
``a(s) ~ N(0, s (1 - s))`` at unit time, so the spatial spread at time ``s``
is ``sigma sqrt(tau s (1 - s))``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize, special
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import exact
from ._validation import ConfigurationError, check_point, check_positive
from .estimator import (
    EstimatorError,
    QuadratureError,
    _setup,
    gaussian_path_functionals,
)
from ._parallel import Moments, combine, map_blocks
from .paths import bridge_batch, space_points
from .potentials import Zero

SE_LEVEL = 3.0


class BoundFitError(EstimatorError):
    """No admissible constants exist on the training grid."""


class NonConfiningError(EstimatorError):
    """``int exp(-tau V / hbar) dx`` does not converge."""


_CONSTANT_NAMES = ("C", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a", "b", "c")


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the kernel and Green-function bounds.

    ``a`` and ``c`` are the potential bounds ``c <= V <= a`` for the bounded
    case (``V <= B |x|^{2 beta} + a`` for growing potentials); ``None`` marks
    an unknown bound.  ``b`` is the linear-distance constant of the Green
    lower bound.
    """

    C: float = 1.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0
    a5: float = 0.0
    a6: float = 0.0
    a7: float = 0.0
    a8: float = 0.0
    a: Optional[float] = 0.0
    b: float = 0.0
    c: Optional[float] = 0.0
    provenance: str = "asserted"
    domain: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in _CONSTANT_NAMES:
            v = getattr(self, name)
            if v is None:
                continue
            if not np.isfinite(v) or v < 0:
                raise ConfigurationError(f"bound constant {name} must be finite and non-negative, got {v}")
        if not self.C > 0:
            raise ConfigurationError("bound constant C must be positive")
        if self.provenance not in ("asserted", "fitted"):
            raise ConfigurationError("provenance must be 'asserted' or 'fitted'")
        if self.provenance == "fitted" and not self.domain:
            raise ConfigurationError("fitted constants must carry their fitting domain")


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    x: np.ndarray
    x_prime: np.ndarray
    tau_or_m: float
    lower: float
    mean: float
    std_error: float
    upper: float
    verdict: str
    margin: float

    CSV_HEADER = ("bound_name", "x", "x_prime", "tau_or_m", "lower", "mean", "std_error", "upper", "verdict", "margin_SE")

    def csv_row(self):
        vec = lambda v: ";".join(repr(float(t)) for t in np.atleast_1d(v))
        return (
            self.bound_name, vec(self.x), vec(self.x_prime), repr(float(self.tau_or_m)), repr(float(self.lower)),
            repr(float(self.mean)), repr(float(self.std_error)), repr(float(self.upper)), self.verdict, repr(float(self.margin)),
        )


def verdict(lower, mean, std_error, upper, level=SE_LEVEL):
    """``holds`` iff ``lower <= mean + 3 SE`` and ``mean - 3 SE <= upper``."""
    if not (np.isfinite(mean) and np.isfinite(std_error) and std_error >= 0):
        return "inconclusive"
    ok = lower <= mean + level * std_error and mean - level * std_error <= upper
    return "holds" if ok else "violated"


def _margin(lower, mean, std_error, upper):
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = (mean - lower) / std_error if std_error > 0 else (math.inf if mean >= lower else -math.inf)
        hi = (upper - mean) / std_error if std_error > 0 else (math.inf if upper >= mean else -math.inf)
    return float(min(lo, hi))


def make_report(name, x, x_prime, tau_or_m, lower, mean, std_error, upper):
    lower = -math.inf if lower is None else float(lower)
    upper = math.inf if upper is None else float(upper)
    mean, std_error = float(mean), float(std_error)
    return BoundReport(
        bound_name=name,
        x=np.atleast_1d(np.asarray(x, dtype=float)),
        x_prime=np.atleast_1d(np.asarray(x_prime, dtype=float)),
        tau_or_m=float(tau_or_m),
        lower=lower,
        mean=mean,
        std_error=std_error,
        upper=upper,
        verdict=verdict(lower, mean, std_error, upper),
        margin=_margin(lower, mean, std_error, upper),
    )


# --------------------------------------------------------------------------
# Jensen


def jensen_lower_bound(spec, V, x, x_prime, tau, n_paths, n_steps, params, seed, workers=None, key=()):
    """``K_free exp(-E[Sigma] / (2 hbar^2) - E[int V ds] / hbar)`` with bridge-MC averages.

    The bridges are those of :func:`~magnetokernel.estimator.kernel_gaussian_average`
    for the same arguments, so the bound sits below that estimate sample by sample.
    """
    x, x_prime, tau = _setup(x, x_prime, tau, n_paths, n_steps, params)
    V = V or Zero()
    dim, sigma = params.dimension, params.sigma

    def block(_, start, stop):
        a = bridge_batch(n_steps, dim, seed, start, stop, key)
        q = space_points(a, x, x_prime, tau, sigma)
        sig, pot = gaussian_path_functionals(spec, V, q, tau, params)
        return Moments.of(np.stack([sig, pot], axis=-1))

    mom = combine(map_blocks(block, n_paths, workers))
    mean_sigma, mean_pot = mom.mean
    k0 = float(exact.free_kernel(x, x_prime, tau, params))
    return float(k0 * math.exp(-mean_sigma / (2 * params.hbar**2) - mean_pot))


# --------------------------------------------------------------------------
# Theorem 2 and 3 forms


def _geometry(x, x_prime, params):
    x = check_point(x, params.dimension, "x")
    x_prime = check_point(x_prime, params.dimension, "x_prime")
    return x, x_prime, float(np.linalg.norm(x - x_prime))


def theorem2_exponent_features(r, tau, hbar):
    """Rows ``(r^2 / hbar^2, r sqrt(tau) / hbar^{3/2})`` multiplying ``(a1, a2)``."""
    return np.array([r * r / hbar**2, r * math.sqrt(tau) / hbar**1.5])


def theorem2_bounds(constants, x, x_prime, tau, params):
    """Bounded-covariance sandwich; returns ``(lower, upper)``."""
    if constants.a is None or constants.c is None:
        raise ConfigurationError("theorem 2 needs both potential bounds c <= V <= a")
    x, x_prime, r = _geometry(x, x_prime, params)
    tau = check_positive(tau, "tau")
    hbar = params.hbar
    k0 = float(exact.free_kernel(x, x_prime, tau, params))
    f = theorem2_exponent_features(r, tau, hbar)
    expo = constants.a1 * f[0] + constants.a2 * f[1] + constants.a * tau / hbar
    return constants.C * k0 * math.exp(-expo), math.exp(-constants.c * tau / hbar) * k0


def _check_indices(gamma, beta):
    if not 0 <= gamma < 1:
        raise ConfigurationError(f"gamma must lie in [0, 1), got {gamma}")
    if not beta >= 0 or not np.isfinite(beta):
        raise ConfigurationError(f"beta must be non-negative, got {beta}")


def theorem3_exponent_features(x, x_prime, tau, gamma, beta, hbar):
    """The eight distance and time monomials multiplying ``a1 .. a8``."""
    r = float(np.linalg.norm(np.asarray(x) - np.asarray(x_prime)))
    sg = float(np.linalg.norm(x) ** (2 * gamma) + np.linalg.norm(x_prime) ** (2 * gamma))
    sb = float(np.linalg.norm(x) ** (2 * beta) + np.linalg.norm(x_prime) ** (2 * beta))
    st = math.sqrt(tau)
    return np.array([
        sg * r * r / hbar**2,
        sg * r * st / hbar**1.5,
        sg * tau / hbar,
        hbar ** (-1.5 + gamma) * tau ** (0.5 + gamma) * r,
        hbar ** (-1 + gamma) * tau ** (1 + gamma),
        hbar ** (-2 + gamma) * r * r * tau**gamma,
        sb * tau / hbar,
        hbar ** (-1 + beta) * tau ** (1 + beta),
    ])


def theorem3_lower_bound(constants, gamma, beta, x, x_prime, tau, params):
    """Lower bound for growing fields and potentials (nine-term exponent)."""
    _check_indices(gamma, beta)
    if constants.a is None:
        raise ConfigurationError("theorem 3 needs the potential constant a")
    x, x_prime, _ = _geometry(x, x_prime, params)
    tau = check_positive(tau, "tau")
    a = np.array([getattr(constants, f"a{j}") for j in range(1, 9)])
    f = theorem3_exponent_features(x, x_prime, tau, gamma, beta, params.hbar)
    expo = float(a @ f) + constants.a * tau / params.hbar
    return constants.C * float(exact.free_kernel(x, x_prime, tau, params)) * math.exp(-expo)


def _simpson_weights(n):
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w / (3 * n)


def _smeared_average(V, x, x_prime, tau, params, n_s, n_y, chunk=2**20):
    dim = params.dimension
    y1, wy1 = special.roots_hermitenorm(n_y)
    wy1 = wy1 / math.sqrt(2 * math.pi)
    ys = np.stack(np.meshgrid(*([y1] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    wy = np.prod(np.stack(np.meshgrid(*([wy1] * dim), indexing="ij"), axis=-1).reshape(-1, dim), axis=-1)
    s = np.linspace(0.0, 1.0, n_s + 1)
    ws = _simpson_weights(n_s)
    spread = params.sigma * np.sqrt(tau * s * (1 - s))
    step = max(1, chunk // len(ys))
    total = 0.0
    for lo in range(0, n_s + 1, step):
        sl = slice(lo, lo + step)
        pts = x + (x_prime - x) * s[sl, None, None] + spread[sl, None, None] * ys[None, :, :]
        vals = np.exp(-tau / params.hbar * np.asarray(V(pts), dtype=float))
        total += float(ws[sl] @ (vals @ wy))
    return total


def theorem3_upper_bound(V, x, x_prime, tau, params, rtol=1e-7, max_s_nodes=8192, max_y_nodes=2**16):
    r"""``K_free \int_0^1 ds E[exp(-(tau / hbar) V(q_s))]`` by Simpson in ``s`` and Gauss-Hermite in ``y``.

    Node counts double until the relative change drops below ``rtol``.
    """
    x, x_prime, _ = _geometry(x, x_prime, params)
    tau = check_positive(tau, "tau")
    V = V or Zero()
    k0 = float(exact.free_kernel(x, x_prime, tau, params))
    if V.is_zero():
        return k0
    n_s, n_y = 16, 8
    cur = _smeared_average(V, x, x_prime, tau, params, n_s, n_y)
    # refine each direction until doubling its nodes moves the value by < rtol
    done_s = done_y = False
    while not (done_s and done_y):
        if n_s > max_s_nodes or n_y ** params.dimension > max_y_nodes:
            raise QuadratureError("smeared potential integral did not converge; the potential is too irregular")
        if not done_s:
            nxt = _smeared_average(V, x, x_prime, tau, params, 2 * n_s, n_y)
            done_s = abs(nxt - cur) <= rtol * abs(nxt)
            n_s, cur = 2 * n_s, nxt
            done_y = False if not done_s else done_y
        if not done_y:
            nxt = _smeared_average(V, x, x_prime, tau, params, n_s, 2 * n_y)
            done_y = abs(nxt - cur) <= rtol * abs(nxt)
            n_y, cur = 2 * n_y, nxt
            done_s = False if not done_y else done_s
    return k0 * cur


# --------------------------------------------------------------------------
# traces


def trace_exponent_nu(gamma, beta, dim):
    """``nu = (D / 2) (1 + 1 / max(gamma, beta))``."""
    rho = max(gamma, beta)
    if not rho > 0:
        raise ConfigurationError("max(gamma, beta) must be positive")
    return 0.5 * dim * (1 + 1 / rho)


def potential_integral(V, tau, params, rtol=1e-10, max_half_width=1e4):
    """``int exp(-tau V(x) / hbar) dx`` over ``R^D`` with a growing box."""
    dim = params.dimension
    tau = check_positive(tau, "tau")

    def box(L, n):
        gx, gw = np.polynomial.legendre.leggauss(n)
        pts = np.stack(np.meshgrid(*([L * gx] * dim), indexing="ij"), axis=-1)
        w = np.prod(np.stack(np.meshgrid(*([L * gw] * dim), indexing="ij"), axis=-1), axis=-1)
        return float(np.sum(w * np.exp(-tau * np.asarray(V(pts), dtype=float) / params.hbar)))

    def edge(L):
        probe = np.zeros((2 * dim, dim))
        for j in range(dim):
            probe[2 * j, j], probe[2 * j + 1, j] = L, -L
        return float(np.max(np.exp(-tau * np.asarray(V(probe), dtype=float) / params.hbar)))

    L = 1.0
    n = 32 if dim < 3 else 24
    while edge(L) > 1e-17:
        L *= 2
        if L > max_half_width:
            raise NonConfiningError("exp(-tau V / hbar) does not decay: the potential is not confining")
    prev = box(L, n)
    while True:
        n *= 2
        cur = box(L, n)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        if n ** dim > 2**21:
            raise QuadratureError("potential integral did not converge")
        prev = cur


def corollary4_bounds(gamma, beta, dim, tau, V, constants, params):
    """Trace sandwich ``C tau^{-nu} exp(...) <= Tr <= K_free(0) int exp(-tau V / hbar)``."""
    _check_indices(gamma, beta)
    if dim != params.dimension:
        raise ConfigurationError("dimension does not match params")
    tau = check_positive(tau, "tau")
    if constants.a is None:
        raise ConfigurationError("corollary 4 needs the potential constant a")
    nu = trace_exponent_nu(gamma, beta, dim)
    hbar = params.hbar
    expo = (
        constants.a5 * hbar ** (-1 + gamma) * tau ** (1 + gamma)
        + constants.a8 * hbar ** (-1 + beta) * tau ** (1 + beta)
        + constants.a * tau / hbar
    )
    lower = constants.C * tau ** (-nu) * math.exp(-expo)
    upper = float(exact.free_prefactor(tau, params)) * potential_integral(V, tau, params)
    return lower, upper


# --------------------------------------------------------------------------
# scaling collapse


@dataclass(frozen=True)
class CollapsePoint:
    u: np.ndarray
    u_prime: np.ndarray
    taus: tuple
    F: tuple
    F_err: tuple
    spread: float
    allowed: float
    verdict: str


@dataclass(frozen=True)
class CollapseReport:
    gamma: float
    points: tuple
    rel_tol: float

    @property
    def max_relative_spread(self):
        vals = [p.spread / max(abs(np.mean(p.F)), 1e-300) for p in self.points if p.verdict != "inconclusive"]
        return max(vals) if vals else math.nan

    @property
    def verdict(self):
        vs = [p.verdict for p in self.points]
        if "violated" in vs:
            return "violated"
        return "inconclusive" if "inconclusive" in vs else "holds"


def scaling_collapse(gamma, points, taus, estimate, params, rel_tol=0.15, level=SE_LEVEL):
    r"""Extract ``F(u, u') = -tau^{-(1+gamma)} log(K / K_free)`` at ``x = sqrt(tau) u``.

    ``estimate(x, x_prime, tau)`` returns a :class:`KernelEstimate`.  At each
    rescaled pair the spread ``max F - min F`` over ``taus`` must stay within
    ``rel_tol * mean F`` plus ``level`` propagated standard errors.
    """
    if len(taus) < 2:
        raise ConfigurationError("the collapse needs at least two values of tau")
    out = []
    for u, up in points:
        u = check_point(u, params.dimension, "u")
        up = check_point(up, params.dimension, "u_prime")
        Fs, errs, ok = [], [], True
        for tau in taus:
            s = math.sqrt(tau)
            est = estimate(s * u, s * up, tau)
            k0 = float(exact.free_kernel(s * u, s * up, tau, params))
            mean = float(np.real(est.mean))
            if not mean > 0:
                ok = False
                Fs.append(math.nan)
                errs.append(math.inf)
                continue
            scale = tau ** (-(1 + gamma))
            Fs.append(-scale * math.log(mean / k0))
            errs.append(scale * est.std_error / mean)
        spread = float(np.max(Fs) - np.min(Fs)) if ok else math.nan
        allowed = rel_tol * abs(float(np.mean(Fs))) + level * math.sqrt(float(np.sum(np.square(errs)))) if ok else math.nan
        v = "inconclusive" if not ok else ("holds" if spread <= allowed else "violated")
        out.append(CollapsePoint(u, up, tuple(taus), tuple(Fs), tuple(errs), spread, allowed, v))
    return CollapseReport(gamma, tuple(out), rel_tol)


# --------------------------------------------------------------------------
# Green functions


def green_lower_features(r, m, hbar, sigma):
    """Monomials multiplying ``(a, b)`` in the Green lower exponent, plus the fixed ``m r / sigma``."""
    return np.array([r * r / hbar**2, r / hbar]), m * r / sigma


def constant_field_green_rate(m, B, params):
    """Decay rate ``sqrt(m^2 + B / mass)`` of the constant-field Green function along the field."""
    return math.sqrt(m * m + B / params.mass)


def green_bounds(m, x, x_prime, constants, params, B=None, upper_C=None):
    """``(lower, upper)`` Green-function envelopes at one point pair.

    lower: ``C r^{2-D} exp(-(a / hbar^2) r^2 - (b / hbar + m / sigma) r)``.
    upper: ``inf`` without a field; for a constant field ``B`` along the third
    axis ``C exp(-(B / 4 hbar) |d_perp|^2 - sqrt(m^2 + B / mass) |dz| / sigma)``.
    ``upper_C`` replaces ``C`` in the upper envelope when given.
    """
    m = check_positive(m, "m")
    x, x_prime, r = _geometry(x, x_prime, params)
    if r == 0:
        raise ConfigurationError("Green-function bounds need distinct points")
    if constants.a is None:
        raise ConfigurationError("the Green lower bound needs the constant a")
    f, fixed = green_lower_features(r, m, params.hbar, params.sigma)
    lower = constants.C * r ** (2 - params.dimension) * math.exp(-(constants.a * f[0] + constants.b * f[1]) - fixed)
    if B is None:
        return lower, math.inf
    if params.dimension != 3:
        raise ConfigurationError("the constant-field Green envelope is defined for dimension 3")
    if B < 0:
        raise ConfigurationError("B must be non-negative")
    d = x_prime - x
    dperp2 = float(d[0] ** 2 + d[1] ** 2)
    rate = constant_field_green_rate(m, B, params)
    c_up = constants.C if upper_C is None else float(upper_C)
    upper = c_up * math.exp(-B / (4 * params.hbar) * dperp2 - rate * abs(float(d[2])) / params.sigma)
    return lower, upper


# --------------------------------------------------------------------------
# fitting


def fit_log_linear(log_base, features, log_targets, fixed=None):
    """Largest lower form ``log C + log_base - features @ a`` below ``log_targets``.

    Solves the linear program: maximize the summed log form (minimum total
    slack) subject to the form not exceeding the targets, ``a >= 0``.  The
    ``fixed`` vector is subtracted without being fitted.  Returns
    ``(log_C, a, slack)``.
    """
    log_base = np.asarray(log_base, dtype=float)
    F = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(log_targets, dtype=float)
    n, k = F.shape
    fixed = np.zeros(n) if fixed is None else np.asarray(fixed, dtype=float)
    if not np.all(np.isfinite(y)):
        raise BoundFitError("training targets must be positive (mean - 3 SE > 0 at every training point)")
    # variables (log_C, a_1..a_k); form_i = log_C + base_i - fixed_i - F_i . a
    A_ub = np.hstack([np.ones((n, 1)), -F])
    b_ub = y - log_base + fixed
    c = -np.concatenate([[n], -F.sum(axis=0)])
    bounds = [(None, None)] + [(0, None)] * k
    res = optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise BoundFitError(f"no admissible constants on the training grid: {res.message}")
    log_c, a = res.x[0], np.maximum(res.x[1:], 0.0)
    slack = b_ub - (log_c - F @ a)
    return float(log_c), a, slack


class LowerBoundFitter(BaseEstimator):
    """Fit-then-verify protocol for the kernel lower bounds.

    ``form`` is ``"theorem2"`` (fits ``C, a1, a2``), ``"theorem3"`` (fits
    ``C, a1 .. a8``), ``"corollary4"`` (fits ``C, a5, a8``) or ``"green"``
    (fits ``C, a, b`` of the Green lower form).  Rows of ``X`` are
    ``(x, x', tau)``, ``(x, x', m)`` for ``"green"`` and a single ``tau``
    column for ``"corollary4"``.  ``y``
    and ``y_err`` are estimator means and standard errors; training uses
    ``y - level * y_err`` as the targets.
    """

    def __init__(self, form="theorem2", gamma=0.0, beta=0.0, a=0.0, c=0.0, hbar=1.0, mass=1.0, dimension=1, level=SE_LEVEL):
        self.form = form
        self.gamma = gamma
        self.beta = beta
        self.a = a
        self.c = c
        self.hbar = hbar
        self.mass = mass
        self.dimension = dimension
        self.level = level

    def _params(self):
        from .paths import PhysParams

        return PhysParams(self.hbar, self.mass, self.dimension)

    def _rows(self, X):
        if self.form not in ("theorem2", "theorem3", "corollary4", "green"):
            raise ConfigurationError(f"unknown bound form {self.form!r}")
        X = check_array(X, dtype=float)
        D = self.dimension
        expected = 1 if self.form == "corollary4" else 2 * D + 1
        if X.shape[1] != expected:
            raise ConfigurationError(f"{self.form} rows need {expected} columns, got {X.shape[1]}")
        return X

    def _design(self, X):
        p = self._params()
        hbar = p.hbar
        base, feats, fixed = [], [], []
        for row in X:
            if self.form == "corollary4":
                tau = row[0]
                nu = trace_exponent_nu(self.gamma, self.beta, self.dimension)
                base.append(-nu * math.log(tau))
                feats.append([hbar ** (-1 + self.gamma) * tau ** (1 + self.gamma), hbar ** (-1 + self.beta) * tau ** (1 + self.beta)])
                fixed.append(self.a * tau / hbar)
                continue
            D = self.dimension
            x, xp, tau = row[:D], row[D : 2 * D], row[-1]
            if self.form == "green":
                r = float(np.linalg.norm(x - xp))
                if r == 0:
                    raise ConfigurationError("Green-function bounds need distinct points")
                f, fix = green_lower_features(r, tau, hbar, p.sigma)
                base.append((2 - D) * math.log(r))
                feats.append(f)
                fixed.append(fix)
                continue
            base.append(math.log(float(exact.free_kernel(x, xp, tau, p))))
            if self.form == "theorem2":
                feats.append(theorem2_exponent_features(float(np.linalg.norm(x - xp)), tau, hbar))
            elif self.form == "theorem3":
                feats.append(theorem3_exponent_features(x, xp, tau, self.gamma, self.beta, hbar))
            else:
                raise ConfigurationError(f"unknown bound form {self.form!r}")
            fixed.append(self.a * tau / hbar)
        return np.array(base), np.array(feats), np.array(fixed)

    def fit(self, X, y, y_err):
        X = self._rows(X)
        y = np.asarray(y, dtype=float)
        y_err = np.asarray(y_err, dtype=float)
        if y.shape != (X.shape[0],) or y_err.shape != y.shape:
            raise ConfigurationError("y and y_err must have one entry per row of X")
        target = y - self.level * y_err
        with np.errstate(divide="ignore", invalid="ignore"):
            log_t = np.where(target > 0, np.log(np.where(target > 0, target, 1.0)), -np.inf)
        base, feats, fixed = self._design(X)
        log_c, a, slack = fit_log_linear(base, feats, log_t, fixed)
        names = {
            "theorem2": ("a1", "a2"),
            "theorem3": tuple(f"a{j}" for j in range(1, 9)),
            "corollary4": ("a5", "a8"),
            "green": ("a", "b"),
        }[self.form]
        fixed_consts = {"a": self.a} if self.form != "green" else {}
        domain = {"form": self.form, "n_train": int(X.shape[0]), "rows_min": X.min(axis=0).tolist(), "rows_max": X.max(axis=0).tolist()}
        self.constants_ = BoundConstants(
            C=math.exp(log_c), c=self.c, provenance="fitted", domain=domain, **fixed_consts, **dict(zip(names, map(float, a)))
        )
        self.train_slack_ = slack
        return self

    def predict(self, X):
        check_is_fitted(self, "constants_")
        X = self._rows(X)
        p = self._params()
        D = self.dimension
        k = self.constants_
        out = []
        for row in X:
            if self.form == "corollary4":
                out.append(_corollary4_lower(self.gamma, self.beta, D, row[0], k, p))
            elif self.form == "theorem2":
                out.append(theorem2_bounds(k, row[:D], row[D : 2 * D], row[-1], p)[0])
            elif self.form == "green":
                out.append(green_bounds(row[-1], row[:D], row[D : 2 * D], k, p)[0])
            else:
                out.append(theorem3_lower_bound(k, self.gamma, self.beta, row[:D], row[D : 2 * D], row[-1], p))
        return np.array(out)

    def reports(self, X, y, y_err, name=None, upper=None):
        """One :class:`BoundReport` per row; ``upper`` is an optional array of upper bounds."""
        X = self._rows(X)
        low = self.predict(X)
        D = self.dimension
        ups = np.full(len(low), math.inf) if upper is None else np.asarray(upper, dtype=float)
        out = []
        for row, lo, mu, se, up in zip(X, low, y, y_err, ups):
            if self.form == "corollary4":
                x = xp = np.zeros(0)
                t = row[0]
            else:
                x, xp, t = row[:D], row[D : 2 * D], row[-1]
            out.append(make_report(name or self.form, x, xp, t, lo, mu, se, up))
        return out


def _corollary4_lower(gamma, beta, dim, tau, k, params):
    nu = trace_exponent_nu(gamma, beta, dim)
    hbar = params.hbar
    expo = k.a5 * hbar ** (-1 + gamma) * tau ** (1 + gamma) + k.a8 * hbar ** (-1 + beta) * tau ** (1 + beta) + k.a * tau / hbar
    return k.C * tau ** (-nu) * math.exp(-expo)


def fit_green_envelope(m, x_fit, x_prime_fit, value, std_error, params, B, level=SE_LEVEL):
    """Constant of the constant-field Green envelope from one point.

    The envelope is made to pass through ``value + level * std_error``.
    """
    unit = BoundConstants(C=1.0)
    _, up = green_bounds(m, x_fit, x_prime_fit, unit, params, B=B, upper_C=1.0)
    return (value + level * std_error) / up


def fit_growth_envelope(r, y, y_err, alpha2, level=SE_LEVEL):
    """Fit ``C1 r^{2 alpha} + C2 >= y + level * y_err`` with ``C1, C2 >= 0`` by least total slack.

    Returns ``(C1, C2, slack)``; the slack against the targets is non-negative
    by construction when the program is feasible.
    """
    r = np.asarray(r, dtype=float)
    target = np.asarray(y, dtype=float) + level * np.asarray(y_err, dtype=float)
    F = np.stack([r**alpha2, np.ones_like(r)], axis=-1)
    res = optimize.linprog(F.sum(axis=0), A_ub=-F, b_ub=-target, bounds=[(0, None), (0, None)], method="highs")
    if res.status != 0:
        raise BoundFitError(f"no admissible growth envelope: {res.message}")
    c1, c2 = res.x
    return float(c1), float(c2), F @ res.x - target
