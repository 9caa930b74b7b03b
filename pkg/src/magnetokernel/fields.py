"""Gaussian random vector potentials: covariances, grid sampling, gauge operations.

Three covariance families are supported, all isotropic and (before pinning)
translation invariant, so the covariance tensor between ``A(p)`` and ``A(q)``
takes the form

    C_jk(r) = F_T(|r|) (delta_jk - rhat_j rhat_k) + F_L(|r|) rhat_j rhat_k,   r = p - q.

For transverse fields the radial functions come from one-dimensional Bessel
quadratures of the projected spectral density.  The scale-invariant family is
*anchored* at the origin, ``A(x) - A(0)``, which reproduces the growing Levy
covariance ``|x|^{2g} + |x'|^{2g} - |x - x'|^{2g}`` inside the cutoff band and
is finite when the infrared cutoff is sent to zero.

Grid samples live on periodic boxes.  Spectral operations use derivative
wavenumbers with the Nyquist component zeroed, so the discrete Helmholtz split
is exact on every grid mode and preserves real-valuedness.
"""

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import fft, special

from . import rng
from ._validation import ConfigurationError, as_points, check_positive
from .paths import FIELD_STREAM


class FieldExtentError(ValueError):
    """A point lies outside the grid extent of a field sample."""


class CovarianceError(ValueError):
    """A covariance is not positive semidefinite on the evaluated points."""


def scale_invariant_normalization(dim, gamma):
    r"""Prefactor ``c`` with ``2 \int c |k|^{-D-2g} (1 - cos k.r) dk = 2 |r|^{2g}``."""
    return (gamma * 2.0 ** (2 * gamma) * special.gamma(dim / 2 + gamma)) / (
        math.pi ** (dim / 2) * special.gamma(1 - gamma)
    )


# --------------------------------------------------------------------------
# radial quadrature for isotropic spectral densities


def _panel_nodes(k_min, k_max, r_max, per_panel=8):
    """Composite Gauss-Legendre nodes on ``[k_min, k_max]`` resolving cos(k r_max)."""
    width = math.pi / (2.0 * max(r_max, 1e-12))
    edges = [k_min]
    k = k_min
    # geometric panels at small k, uniform panels once they reach the oscillation scale
    while k_min > 0 and k < k_max and 0.25 * k < width:
        k = min(1.25 * k, k_max)
        edges.append(k)
    if k < k_max:
        n_uniform = int(math.ceil((k_max - k) / width))
        edges.extend(np.linspace(k, k_max, n_uniform + 1)[1:])
    edges = np.asarray(edges, dtype=float)
    x, w = np.polynomial.legendre.leggauss(per_panel)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w
    return nodes.ravel(), weights.ravel()


def _angular_kernels(kr, dim, transverse):
    r"""Angular averages so that ``F = \int k^{D-1} S(k) K(kr) dk``."""
    if dim == 1:
        return 2.0 * np.cos(kr), 2.0 * np.cos(kr)
    if dim == 2:
        j0 = special.j0(kr)
        if not transverse:
            return 2 * np.pi * j0, 2 * np.pi * j0
        j1 = special.j1(kr)
        safe = np.where(kr > 0, kr, 1.0)
        j2 = np.where(kr > 0, 2.0 * j1 / safe - j0, 0.0)
        return np.pi * (j0 - j2), np.pi * (j0 + j2)
    j0 = special.spherical_jn(0, kr)
    if not transverse:
        return 4 * np.pi * j0, 4 * np.pi * j0
    j2 = special.spherical_jn(2, kr)
    return 4 * np.pi * (2 * j0 - j2) / 3, 4 * np.pi * (2 * j0 + 2 * j2) / 3


class _IsotropicCovariance:
    """Shared machinery: radial tables, covariance tensors, quadratic forms."""

    transverse = False
    anchored = False

    # subclasses provide density(k, dim), band() and optionally _closed_radial

    def _closed_radial(self, r, dim):
        return None

    def _table(self, dim, r_max):
        cache = self._cache
        key = ("radial", dim)
        tab = cache.get(key)
        if tab is not None and tab[0][-1] >= r_max:
            return tab
        r_top = max(r_max * 1.5, 8.0, tab[0][-1] * 2 if tab is not None else 0.0)
        k_min, k_max = self.band()
        dr = math.pi / (16.0 * k_max)
        r = np.arange(0.0, r_top + 2 * dr, dr)
        k, w = _panel_nodes(k_min, k_max, r[-1])
        weight = w * k ** (dim - 1) * self.density(k, dim)
        f_t = np.empty_like(r)
        f_l = np.empty_like(r)
        chunk = max(1, 2_000_000 // k.size)
        for i in range(0, r.size, chunk):
            kt, kl = _angular_kernels(r[i : i + chunk, None] * k[None, :], dim, self.transverse)
            f_t[i : i + chunk] = kt @ weight
            f_l[i : i + chunk] = kl @ weight
        tab = (r, f_t, f_l)
        cache[key] = tab
        return tab

    def radial(self, r, dim):
        """Return ``(F_T(r), F_L(r))`` for the unanchored covariance."""
        r = np.asarray(r, dtype=float)
        closed = self._closed_radial(r, dim)
        if closed is not None:
            return closed, closed
        grid, f_t, f_l = self._table(dim, float(np.max(r)) if r.size else 1.0)
        return np.interp(r, grid, f_t), np.interp(r, grid, f_l)

    def translation_tensor(self, r):
        """Unanchored covariance tensor ``C(r)`` for displacements ``(..., D)``."""
        r = np.asarray(r, dtype=float)
        dim = r.shape[-1]
        if self.transverse and dim == 1:
            raise ConfigurationError("transverse fields need dimension >= 2")
        norm = np.linalg.norm(r, axis=-1)
        f_t, f_l = self.radial(norm, dim)
        safe = np.where(norm > 0, norm, 1.0)
        rhat = r / safe[..., None]
        outer = rhat[..., :, None] * rhat[..., None, :]
        eye = np.eye(dim)
        return f_t[..., None, None] * (eye - outer) + f_l[..., None, None] * outer

    def tensor(self, p, q):
        """Covariance ``<A_j(p) A_k(q)>`` for broadcastable point arrays."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        c = self.translation_tensor(p - q)
        if self.anchored:
            zero = np.zeros(p.shape[-1])
            c = c - self.translation_tensor(p) - self.translation_tensor(-q) + self.translation_tensor(zero)
        return c

    def variance(self, dim):
        """Per-component variance ``C_jj(0)`` of the unanchored field."""
        f_t, _ = self.radial(np.zeros(1), dim)
        return float(f_t[0])

    def quadratic_form(self, points, increments):
        r"""Batched ``\sum_{k,l} dq_k . G(p_k, p_l) . dq_l`` for ``(P, n, D)`` arrays."""
        points = np.asarray(points, dtype=float)
        dq = np.asarray(increments, dtype=float)
        dim = points.shape[-1]
        diff = points[:, :, None, :] - points[:, None, :, :]
        norm = np.sqrt(np.einsum("pkld,pkld->pkl", diff, diff))
        f_t, f_l = self.radial(norm, dim)
        dots = np.einsum("pkd,pld->pkl", dq, dq)
        total = np.einsum("pkl,pkl->p", f_t, dots)
        if self.transverse or not np.array_equal(f_t, f_l):
            safe = np.where(norm > 0, norm * norm, 1.0)
            proj = np.einsum("pkld,pkd->pkl", diff, dq) * np.einsum("pkld,pld->pkl", diff, dq) / safe
            total = total + np.einsum("pkl,pkl->p", f_l - f_t, proj)
        if self.anchored:
            s = dq.sum(axis=1)
            c_p = self.translation_tensor(points)
            c_0 = self.translation_tensor(np.zeros(dim))
            total = total - 2.0 * np.einsum("pkd,pkde,pe->p", dq, c_p, s) + np.einsum("pd,de,pe->p", s, c_0, s)
        return total

    def is_null(self):
        return False


def _cache_field():
    return field(default_factory=dict, init=False, repr=False, compare=False)


@dataclass(frozen=True)
class BoundedIsotropic(_IsotropicCovariance):
    """``G_jk(x, x') = delta_jk g exp(-|x - x'|^2 / l^2)``, optionally projected transverse.

    ``length = inf`` gives the constant covariance ``delta_jk g``.
    """

    amplitude: float
    length: float = 1.0
    transverse: bool = False
    _cache: dict = _cache_field()

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ConfigurationError("amplitude must be non-negative")
        check_positive(self.length, "length", allow_inf=True)
        if self.transverse and math.isinf(self.length):
            raise ConfigurationError("a constant covariance has no transverse projection")

    def density(self, k, dim):
        ell = self.length
        return self.amplitude * (math.pi * ell * ell) ** (dim / 2) * np.exp(-0.25 * (k * ell) ** 2) / (2 * math.pi) ** dim

    def band(self):
        return 0.0, 12.0 / self.length

    def _closed_radial(self, r, dim):
        if self.transverse:
            return None
        if math.isinf(self.length):
            return np.full_like(r, self.amplitude, dtype=float)
        return self.amplitude * np.exp(-((r / self.length) ** 2))

    def is_null(self):
        return self.amplitude == 0


@dataclass(frozen=True)
class ScaleInvariant(_IsotropicCovariance):
    """Growing covariance with structure-function index ``gamma`` in the band.

    Spectral density ``amplitude * c |k|^{-D - 2 gamma}`` for
    ``ir_cutoff <= |k| <= uv_cutoff``, with ``c`` normalizing the unprojected
    structure function to ``2 |r|^{2 gamma}``.  Anchored at the origin.
    """

    gamma: float
    ir_cutoff: float
    uv_cutoff: float
    amplitude: float = 1.0
    transverse: bool = True
    anchored: bool = True
    _cache: dict = _cache_field()

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ConfigurationError(f"gamma must lie strictly in (0, 1), got {self.gamma}")
        check_positive(self.ir_cutoff, "ir_cutoff")
        check_positive(self.uv_cutoff, "uv_cutoff")
        if not self.ir_cutoff < self.uv_cutoff:
            raise ConfigurationError("ir_cutoff must be smaller than uv_cutoff")
        if not self.amplitude >= 0:
            raise ConfigurationError("amplitude must be non-negative")

    def density(self, k, dim):
        k = np.asarray(k, dtype=float)
        inside = (k >= self.ir_cutoff) & (k <= self.uv_cutoff)
        c = self.amplitude * scale_invariant_normalization(dim, self.gamma)
        safe = np.where(inside, k, 1.0)
        return np.where(inside, c * safe ** (-dim - 2 * self.gamma), 0.0)

    def band(self):
        return self.ir_cutoff, self.uv_cutoff

    def is_null(self):
        return self.amplitude == 0


@dataclass(frozen=True)
class TranslationInvariant(_IsotropicCovariance):
    """Isotropic field with a user spectral density ``S(|k|)`` on ``[k_min, k_max]``."""

    spectral: Callable = field(compare=False)
    k_max: float = 10.0
    k_min: float = 0.0
    transverse: bool = True
    _cache: dict = _cache_field()

    def __post_init__(self):
        check_positive(self.k_max, "k_max")
        if not 0 <= self.k_min < self.k_max:
            raise ConfigurationError("need 0 <= k_min < k_max")
        probe = np.asarray(self.spectral(np.linspace(max(self.k_min, 1e-9), self.k_max, 64)), dtype=float)
        if np.any(~np.isfinite(probe)) or np.any(probe < 0):
            raise CovarianceError("spectral density must be finite and non-negative")

    def density(self, k, dim):
        k = np.asarray(k, dtype=float)
        inside = (k >= self.k_min) & (k <= self.k_max)
        return np.where(inside, np.asarray(self.spectral(np.where(inside, k, self.k_min)), dtype=float), 0.0)

    def band(self):
        return self.k_min, self.k_max


CovarianceSpec = (BoundedIsotropic, ScaleInvariant, TranslationInvariant)


def describe_covariance(spec):
    """Compact one-token description used in CSV rows."""
    if spec is None:
        return "none"
    if isinstance(spec, BoundedIsotropic):
        return f"bounded(g={spec.amplitude:g},l={spec.length:g},T={int(spec.transverse)})"
    if isinstance(spec, ScaleInvariant):
        return (
            f"scale(gamma={spec.gamma:g},kir={spec.ir_cutoff:g},kuv={spec.uv_cutoff:g},"
            f"amp={spec.amplitude:g},T={int(spec.transverse)})"
        )
    if isinstance(spec, TranslationInvariant):
        return f"spectral(kmin={spec.k_min:g},kmax={spec.k_max:g},T={int(spec.transverse)})"
    return type(spec).__name__


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class FieldGrid:
    """Periodic box of ``shape`` nodes, spacing ``spacing``, lower corner ``origin``."""

    origin: tuple
    spacing: float
    shape: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        check_positive(self.spacing, "spacing")
        if len(self.origin) != len(self.shape) or not 1 <= len(self.shape) <= 3:
            raise ConfigurationError("origin and shape must have the same length 1..3")
        if min(self.shape) < 4:
            raise ConfigurationError("grid needs at least 4 nodes per axis")

    @property
    def dim(self):
        return len(self.shape)

    @property
    def lengths(self):
        return np.asarray(self.shape) * self.spacing

    @property
    def upper(self):
        return np.asarray(self.origin) + self.lengths

    def axis_nodes(self, axis):
        return self.origin[axis] + self.spacing * np.arange(self.shape[axis])

    def node_points(self):
        mesh = np.meshgrid(*[self.axis_nodes(a) for a in range(self.dim)], indexing="ij")
        return np.stack(mesh, axis=-1)

    def wavenumbers(self):
        return [2 * np.pi * fft.fftfreq(n, self.spacing) for n in self.shape]

    def derivative_wavenumbers(self):
        out = []
        for n, k in zip(self.shape, self.wavenumbers()):
            k = k.copy()
            if n % 2 == 0:
                k[n // 2] = 0.0
            out.append(k)
        return out

    def contains(self, points, tol=1e-12):
        points = np.asarray(points, dtype=float)
        lo = np.asarray(self.origin) - tol
        hi = self.upper + tol
        return np.all((points >= lo) & (points <= hi), axis=-1)

    @classmethod
    def centered(cls, dim, half_width, spacing):
        """Grid on ``[-half_width, half_width)^dim`` with the origin as a node."""
        n_half = int(math.ceil(half_width / spacing))
        n = fft.next_fast_len(2 * n_half)
        n += n % 2
        return cls(origin=(-(n // 2) * spacing,) * dim, spacing=spacing, shape=(n,) * dim)


def grid_for(spec, dim, reach, resolution=8):
    """Default periodic grid for sampling ``spec`` around paths of radius ``reach``.

    The box is at least four times the probe radius and, for banded spectra,
    four infrared wavelengths (for Gaussian correlations, eight lengths when
    projected and four otherwise); the spacing puts ``resolution`` nodes in the
    shortest wavelength of the spectrum.
    """
    k_min, k_max = spec.band() if not (isinstance(spec, BoundedIsotropic) and math.isinf(spec.length)) else (0.0, 1.0)
    half = 2.0 * reach
    if k_min > 0:
        half = max(half, 2.0 * (2 * math.pi / k_min))
    if isinstance(spec, BoundedIsotropic) and not math.isinf(spec.length):
        # transverse tails decay only like |r|^-D, so the box has to be wider
        half = max(half, (8.0 if spec.transverse else 4.0) * spec.length)
        k_max = 6.0 / spec.length
    spacing = 2 * math.pi / (k_max * resolution)
    return FieldGrid.centered(dim, half, spacing)


# --------------------------------------------------------------------------
# samples and interpolation


@dataclass(frozen=True)
class FieldSample:
    """One vector-potential realization on a periodic grid.

    ``values`` has shape ``(*grid.shape, D)``.  Calling the sample evaluates
    it by multilinear interpolation.
    """

    grid: FieldGrid
    values: np.ndarray = field(repr=False)
    transverse: bool = False
    periodic_eval: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape + (self.grid.dim,):
            raise ConfigurationError(f"values must have shape {self.grid.shape + (self.grid.dim,)}, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self):
        return self.grid.dim

    def __call__(self, points):
        return evaluate_field(self, points, wrap=self.periodic_eval)

    def wrapped(self):
        """Same sample, evaluated periodically outside the box."""
        return FieldSample(self.grid, self.values, self.transverse, periodic_eval=True)


def interpolate(grid, values, points, wrap=False):
    """Multilinear interpolation of node data ``values[*shape, ...]`` at ``points``."""
    points = as_points(points, grid.dim)
    if not wrap:
        inside = grid.contains(points)
        if not np.all(inside):
            bad = points[~inside][0]
            raise FieldExtentError(f"point {bad} outside grid extent {grid.origin} .. {tuple(grid.upper)}")
    u = (points - np.asarray(grid.origin)) / grid.spacing
    i0 = np.floor(u)
    frac = u - i0
    i0 = i0.astype(np.int64)
    trailing = values.shape[grid.dim :]
    out = np.zeros(points.shape[:-1] + trailing)
    for corner in itertools.product((0, 1), repeat=grid.dim):
        idx = tuple((i0[..., a] + c) % grid.shape[a] for a, c in enumerate(corner))
        w = np.ones(points.shape[:-1])
        for a, c in enumerate(corner):
            w = w * (frac[..., a] if c else 1.0 - frac[..., a])
        out += w.reshape(w.shape + (1,) * len(trailing)) * values[idx]
    return out


def evaluate_field(sample, point, wrap=False):
    """Vector potential at ``point`` (shape ``(..., D)``) by multilinear interpolation."""
    return interpolate(sample.grid, sample.values, point, wrap=wrap)


def _mode_weights(spec, grid):
    """Cell-averaged spectral weight ``int_cell S(k) dk`` for every grid mode."""
    key = ("weights", grid)
    cached = spec._cache.get(key)
    if cached is not None:
        return cached
    dim = grid.dim
    ks = np.meshgrid(*grid.wavenumbers(), indexing="ij")
    dk = [2 * np.pi / (n * grid.spacing) for n in grid.shape]
    offsets = (np.arange(4) + 0.5) / 4 - 0.5
    acc = np.zeros(grid.shape)
    for off in itertools.product(offsets, repeat=dim):
        kk = np.sqrt(sum((k + o * d) ** 2 for k, o, d in zip(ks, off, dk)))
        acc += spec.density(kk, dim)
    w = acc / len(offsets) ** dim * np.prod(dk)
    for a, n in enumerate(grid.shape):
        if n % 2 == 0:
            sl = [slice(None)] * dim
            sl[a] = n // 2
            w[tuple(sl)] = 0.0
    if spec.transverse:
        # a constant field is divergence-free; the cell average of the
        # projector over directions at k = 0 is (1 - 1/D) delta_jk
        w[(0,) * dim] *= 1.0 - 1.0 / dim
    spec._cache[key] = w
    return w


def _check_resolution(spec, grid):
    h = grid.spacing
    if isinstance(spec, ScaleInvariant):
        if h > math.pi / spec.uv_cutoff:
            raise ConfigurationError(f"grid spacing {h} does not resolve uv_cutoff (need h <= pi / {spec.uv_cutoff})")
        if np.min(grid.lengths) <= 2 * math.pi / spec.ir_cutoff:
            raise ConfigurationError("periodic box must be larger than 2 pi / ir_cutoff")
    elif isinstance(spec, TranslationInvariant):
        if h > math.pi / spec.k_max:
            raise ConfigurationError(f"grid spacing {h} does not resolve k_max (need h <= pi / {spec.k_max})")
    elif isinstance(spec, BoundedIsotropic) and not math.isinf(spec.length):
        if h > spec.length / 2:
            raise ConfigurationError("grid spacing must be at most half the correlation length")
    if spec.transverse and grid.dim == 1:
        raise ConfigurationError("transverse fields need dimension >= 2")


def transverse_projector_apply(grid, a_hat):
    """Apply ``delta_jk - k_j k_k / |k|^2`` to spectral data ``(*shape, D)``."""
    ks = np.meshgrid(*grid.derivative_wavenumbers(), indexing="ij")
    kvec = np.stack(ks, axis=-1)
    kk = np.sum(kvec * kvec, axis=-1)
    safe = np.where(kk > 0, kk, 1.0)
    div = np.sum(kvec * a_hat, axis=-1)
    return a_hat - kvec * (div / safe)[..., None]


def sample_field(spec, grid, seed, index=0):
    """Draw one mean-zero Gaussian field with covariance ``spec`` on ``grid``.

    Realization ``index`` of stream ``seed``.  Transverse specs are projected in
    spectral space; anchored specs are shifted so that ``A(0) = 0``.
    """
    if not isinstance(spec, CovarianceSpec):
        raise ConfigurationError(f"unsupported covariance {spec!r}")
    _check_resolution(spec, grid)
    dim = grid.dim
    gen = rng.stream(seed, FIELD_STREAM, index)
    if isinstance(spec, BoundedIsotropic) and math.isinf(spec.length):
        const = math.sqrt(spec.amplitude) * gen.standard_normal(dim)
        return FieldSample(grid, np.broadcast_to(const, grid.shape + (dim,)).copy(), transverse=True)
    axes = tuple(range(dim))
    n_tot = int(np.prod(grid.shape))
    noise = gen.standard_normal(grid.shape + (dim,))
    w_hat = fft.fftn(noise, axes=axes) / math.sqrt(n_tot)
    a_hat = np.sqrt(_mode_weights(spec, grid))[..., None] * w_hat
    if spec.transverse:
        a_hat = transverse_projector_apply(grid, a_hat)
    values = fft.ifftn(a_hat, axes=axes).real * n_tot
    if spec.anchored:
        values = values - interpolate(grid, values, np.zeros(dim))
    return FieldSample(grid, values, transverse=spec.transverse)


def divergence_ratio(sample, floor=1e-5):
    """``max_k |k . A_hat(k)| / (|k| |A_hat(k)|)`` over modes that carry signal.

    Modes whose amplitude is below ``floor`` times the largest amplitude hold
    only FFT roundoff and are skipped.
    """
    grid = sample.grid
    a_hat = fft.fftn(sample.values, axes=tuple(range(grid.dim)))
    kvec = np.stack(np.meshgrid(*grid.derivative_wavenumbers(), indexing="ij"), axis=-1)
    knorm = np.linalg.norm(kvec, axis=-1)
    amp = np.linalg.norm(a_hat, axis=-1)
    mask = (amp > floor * amp.max()) & (knorm > 0)
    if not np.any(mask):
        return 0.0
    div = np.abs(np.sum(kvec * a_hat, axis=-1))
    return float(np.max(div[mask] / (knorm[mask] * amp[mask])))


# --------------------------------------------------------------------------
# gauge functions


@dataclass(frozen=True)
class GaugeFunction:
    """Scalar gauge function ``chi(x) = linear . x + periodic(x)`` on a grid."""

    grid: FieldGrid
    values: np.ndarray = field(repr=False)
    linear: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ConfigurationError(f"gauge values must have shape {self.grid.shape}")
        values.setflags(write=False)
        linear = np.zeros(self.grid.dim) if self.linear is None else np.asarray(self.linear, dtype=float)
        linear = linear.copy()
        linear.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "linear", linear)

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    def gradient_values(self):
        """``grad chi`` on the nodes, shape ``(*shape, D)``."""
        return spectral_gradient(self.grid, self.values) + self.linear

    def __call__(self, points):
        points = as_points(points, self.grid.dim)
        return interpolate(self.grid, self.values, points) + points @ self.linear


def spectral_gradient(grid, scalar):
    axes = tuple(range(grid.dim))
    s_hat = fft.fftn(scalar, axes=axes)
    ks = np.meshgrid(*grid.derivative_wavenumbers(), indexing="ij")
    return np.stack([fft.ifftn(1j * k * s_hat, axes=axes).real for k in ks], axis=-1)


def _same_grid(a, b):
    if a != b:
        raise ConfigurationError("field sample and gauge function live on different grids")


def gauge_transform(sample, chi):
    """``A' = A + grad chi``."""
    _same_grid(sample.grid, chi.grid)
    return FieldSample(sample.grid, sample.values + chi.gradient_values(), transverse=False)


def to_transverse(sample):
    """Helmholtz split ``A = A_T + grad chi`` on the grid.

    Returns ``(A_T, chi)``.  The zero mode and pure-Nyquist modes (where the
    derivative wavenumber vanishes) are divergence-free and stay in ``A_T``.
    """
    grid = sample.grid
    axes = tuple(range(grid.dim))
    a_hat = fft.fftn(sample.values, axes=axes)
    kvec = np.stack(np.meshgrid(*grid.derivative_wavenumbers(), indexing="ij"), axis=-1)
    kk = np.sum(kvec * kvec, axis=-1)
    safe = np.where(kk > 0, kk, 1.0)
    div = np.sum(kvec * a_hat, axis=-1)
    chi_hat = np.where(kk > 0, -1j * div / safe, 0.0)
    long_hat = kvec * np.where(kk > 0, div / safe, 0.0)[..., None]
    a_t = fft.ifftn(a_hat - long_hat, axes=axes).real
    chi = fft.ifftn(chi_hat, axes=axes).real
    return FieldSample(grid, a_t, transverse=True), GaugeFunction(grid, chi)


def project_transverse(sample):
    return to_transverse(sample)[0]


# --------------------------------------------------------------------------
# grid dumps

_MAGIC = b"MKFIELD1\n"


def _header(sample):
    g = sample.grid
    return {
        "origin": list(g.origin),
        "spacing": g.spacing,
        "shape": list(g.shape),
        "dim": g.dim,
        "components": g.dim,
        "transverse": bool(sample.transverse),
    }


def save_field(sample, path, fmt=None):
    """Write a sample as ``bin`` (magic, JSON header line, float64 LE body) or ``csv``."""
    path = str(path)
    fmt = fmt or ("csv" if path.endswith(".csv") else "bin")
    header = _header(sample)
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            fh.write(np.ascontiguousarray(sample.values, dtype="<f8").tobytes())
    elif fmt == "csv":
        g = sample.grid
        idx = np.indices(g.shape).reshape(g.dim, -1).T
        vals = sample.values.reshape(-1, g.dim)
        cols = [f"i{a}" for a in range(g.dim)] + [f"A{c}" for c in range(g.dim)]
        with open(path, "w") as fh:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
            fh.write(",".join(cols) + "\n")
            for i, v in zip(idx, vals):
                fh.write(",".join(str(int(t)) for t in i) + "," + ",".join(repr(float(t)) for t in v) + "\n")
    else:
        raise ConfigurationError(f"unknown field format {fmt!r}")


def load_field(path):
    path = str(path)
    with open(path, "rb") as fh:
        head = fh.read(len(_MAGIC))
        if head == _MAGIC:
            header = json.loads(fh.readline())
            body = np.frombuffer(fh.read(), dtype="<f8")
            grid = FieldGrid(tuple(header["origin"]), header["spacing"], tuple(header["shape"]))
            values = body.reshape(grid.shape + (header["components"],))
            return FieldSample(grid, values, transverse=header["transverse"])
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ConfigurationError(f"{path} is not a field dump")
        header = json.loads(first[2:])
        fh.readline()
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    grid = FieldGrid(tuple(header["origin"]), header["spacing"], tuple(header["shape"]))
    values = np.zeros(grid.shape + (header["components"],))
    idx = data[:, : grid.dim].astype(int)
    values[tuple(idx.T)] = data[:, grid.dim :]
    return FieldSample(grid, values, transverse=header["transverse"])
