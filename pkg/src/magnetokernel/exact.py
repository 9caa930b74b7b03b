"""Closed-form kernels used as oracles.

Conventions: the kernel of ``exp(-tau H / hbar)`` between a start point ``x``
and an end point ``x'``, with ``H = (-i hbar grad + A)^2 / (2m) + V``.

Harmonic oscillator.  With ``V = m omega^2 |x|^2 / 2`` the eigenvalues of
``H / hbar`` are ``omega (n + 1/2)`` per axis, so the one-dimensional trace is

    sum_n exp(-tau omega (n + 1/2)) = 1 / (2 sinh(omega tau / 2)).

The often quoted ``1 / sinh(omega tau / 2)`` is twice this value.

Constant magnetic field ``B`` along the third axis, symmetric gauge
``A = (B / 2) (-x_2, x_1, 0)``, cyclotron frequency ``b = B / m``:

    K = (2 pi tau sigma^2)^{-1/2} exp(-dz^2 / (2 tau sigma^2))
        * B / (4 pi hbar sinh(b tau / 2)) * exp(-(B / 4 hbar) coth(b tau / 2) |d_perp|^2)
        * exp(i (B / 2 hbar) (x_1 x'_2 - x_2 x'_1)).

The transverse prefactor ``B / (4 pi hbar sinh)`` is the one that reduces to
the free kernel as ``B -> 0``; writing ``2 pi`` instead would double it.
"""

import math

import numpy as np
from scipy import special

from ._validation import ConfigurationError, check_positive


def _pair(x, x_prime, dim):
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    if x.shape[-1:] != (dim,) or x_prime.shape[-1:] != (dim,):
        raise ConfigurationError(f"points must have trailing dimension {dim}")
    return x, x_prime


def _tau(tau):
    tau = np.asarray(tau, dtype=float)
    if np.any(~(tau > 0)) or np.any(~np.isfinite(tau)):
        raise ConfigurationError("tau must be positive and finite")
    return tau


def free_prefactor(tau, params):
    """``(2 pi tau sigma^2)^{-D/2}``."""
    return (2 * np.pi * _tau(tau) * params.sigma**2) ** (-params.dimension / 2)


def free_kernel(x, x_prime, tau, params):
    """Free heat kernel ``(2 pi tau sigma^2)^{-D/2} exp(-|x - x'|^2 / (2 tau sigma^2))``."""
    x, x_prime = _pair(x, x_prime, params.dimension)
    tau = _tau(tau)
    r2 = np.sum((x - x_prime) ** 2, axis=-1)
    return free_prefactor(tau, params) * np.exp(-r2 / (2 * tau * params.sigma**2))


def harmonic_trace(omega, tau, dim=1):
    """``(2 sinh(omega tau / 2))^{-D}``, the trace of the isotropic oscillator."""
    check_positive(omega, "omega")
    tau = _tau(tau)
    y = 0.5 * omega * tau
    # exp(-y) / (1 - exp(-2y)) is the overflow-free form
    return (np.exp(-y) / -np.expm1(-2 * y)) ** dim


def mehler_kernel(x, x_prime, tau, omega, params):
    """Kernel of the isotropic oscillator ``V = m omega^2 |x|^2 / 2``."""
    check_positive(omega, "omega")
    x, x_prime = _pair(x, x_prime, params.dimension)
    tau = _tau(tau)
    m, hbar = params.mass, params.hbar
    sh = np.sinh(omega * tau)
    ch = np.cosh(omega * tau)
    pre = (m * omega / (2 * np.pi * hbar * sh)) ** (params.dimension / 2)
    quad = np.sum((x * x + x_prime * x_prime) * np.expand_dims(ch, -1) - 2 * x * x_prime, axis=-1)
    return pre * np.exp(-m * omega / (2 * hbar * sh) * quad)


def _landau_parts(x, x_prime, tau, B, params):
    if params.dimension != 3:
        raise ConfigurationError("the constant-field kernel is defined for dimension 3")
    check_positive(B, "B")
    x, x_prime = _pair(x, x_prime, 3)
    tau = _tau(tau)
    hbar, sigma = params.hbar, params.sigma
    b = B / params.mass
    d = x_prime - x
    dz2 = d[..., 2] ** 2
    dperp2 = d[..., 0] ** 2 + d[..., 1] ** 2
    z_part = (2 * np.pi * tau * sigma**2) ** -0.5 * np.exp(-dz2 / (2 * tau * sigma**2))
    y = 0.5 * b * tau
    # B / (4 pi hbar sinh y), written to stay finite for tiny B
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(y > 0, 2 * y * np.exp(-y) / -np.expm1(-2 * y), 1.0)
    perp_pre = params.mass / (2 * np.pi * hbar * tau) * ratio
    coth = 1 / np.tanh(y)
    phase = B / (2 * hbar) * (x[..., 0] * x_prime[..., 1] - x[..., 1] * x_prime[..., 0])
    return z_part, perp_pre, coth, dperp2, phase


def landau_kernel(x, x_prime, tau, B, params):
    """Constant-field kernel in three dimensions (complex)."""
    z_part, perp_pre, coth, dperp2, phase = _landau_parts(x, x_prime, tau, B, params)
    modulus = z_part * perp_pre * np.exp(-B / (4 * params.hbar) * coth * dperp2)
    return modulus * np.exp(1j * phase)


def landau_envelope(x, x_prime, tau, B, params):
    """``|landau_kernel|`` with ``coth(b tau / 2)`` replaced by its lower bound 1."""
    z_part, perp_pre, _, dperp2, _ = _landau_parts(x, x_prime, tau, B, params)
    return z_part * perp_pre * np.exp(-B / (4 * params.hbar) * dperp2)


def free_green(x, x_prime, m, params):
    r"""Proper-time integral ``\int_0^\infty e^{-m^2 tau / 2} K_free(tau) dtau``.

    Closed form ``(2 pi sigma^2)^{-D/2} 2 (m sigma / r)^{D/2 - 1} K_{D/2-1}(m r / sigma)``;
    in one dimension at ``r = 0`` the value is ``1 / (sigma m)``.
    """
    check_positive(m, "m")
    dim = params.dimension
    x, x_prime = _pair(x, x_prime, dim)
    sigma = params.sigma
    r = np.sqrt(np.sum((x - x_prime) ** 2, axis=-1))
    if dim >= 2 and np.any(r == 0):
        raise ConfigurationError("the Green function diverges at coincident points for D >= 2")
    nu = dim / 2 - 1
    if dim == 1:
        return np.exp(-m * r / sigma) / (sigma * m)
    z = m * r / sigma
    return (2 * np.pi * sigma**2) ** (-dim / 2) * 2 * (m * sigma / r) ** nu * special.kv(nu, z)


def proper_time_tail(tau_max, m, params):
    r"""Bound on ``\int_{tau_max}^\infty e^{-m^2 tau/2} K dtau`` for any ``|K| <= (2 pi tau sigma^2)^{-D/2}``."""
    return (2 * math.pi * tau_max * params.sigma**2) ** (-params.dimension / 2) * (2 / m**2) * math.exp(-0.5 * m * m * tau_max)
