import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from magnetokernel import ConfigurationError, PhysParams, free_green, free_kernel, harmonic_trace, landau_kernel, mehler_kernel
from magnetokernel.exact import landau_envelope, proper_time_tail

P1 = PhysParams(1.0, 1.0, 1)
P2 = PhysParams(1.0, 1.0, 2)
P3 = PhysParams(1.0, 1.0, 3)


def test_free_kernel_values():
    assert free_kernel([0.0], [0.0], 1.0, P1) == pytest.approx(0.398942, abs=1e-6)
    assert free_kernel([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 1.0, P3) == pytest.approx(0.0634936, abs=1e-7)


def test_free_kernel_normalized():
    total, _ = integrate.quad(lambda y: free_kernel([0.3], [y], 0.7, P1), -np.inf, np.inf, epsabs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("tau", [0.0, -1.0, np.inf])
def test_free_kernel_rejects_tau(tau):
    with pytest.raises(ConfigurationError):
        free_kernel([0.0], [0.0], tau, P1)


def test_harmonic_trace_value():
    # geometric series over omega (n + 1/2), summed directly
    series = sum(math.exp(-(n + 0.5)) for n in range(200))
    assert series == pytest.approx(0.9595173756674719, rel=1e-15)
    assert harmonic_trace(1.0, 1.0) == pytest.approx(series, rel=1e-14)


def test_harmonic_trace_ground_state_dominance():
    assert harmonic_trace(1.0, 30.0) / math.exp(-15.0) == pytest.approx(1.0, abs=1e-6)
    assert np.isfinite(harmonic_trace(1.0, 5000.0))


@pytest.mark.parametrize("omega,tau", [(1.0, 1.0), (2.0, 0.3), (0.5, 4.0)])
def test_mehler_diagonal_integrates_to_trace(omega, tau):
    total, _ = integrate.quad(lambda x: mehler_kernel([x], [x], tau, omega, P1), -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12)
    assert total == pytest.approx(harmonic_trace(omega, tau), abs=1e-8)


def test_mehler_reduces_to_free_for_small_omega():
    x, xp = np.array([0.2, -0.1]), np.array([0.5, 0.4])
    assert mehler_kernel(x, xp, 0.8, 1e-5, P2) == pytest.approx(free_kernel(x, xp, 0.8, P2), rel=1e-8)


def test_landau_small_field_limit():
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = rng.uniform(-0.1, 0.1, 3)
        xp = rng.uniform(-0.1, 0.1, 3)
        k = landau_kernel(x, xp, 1.0, 1e-4, P3)
        f = free_kernel(x, xp, 1.0, P3)
        assert abs(k - f) <= 1e-6 * f


def test_landau_coincident_prefactor():
    # the small-field limit fixes B / (4 pi hbar sinh(B tau / 2)) for the transverse part
    expected = (2 * math.pi) ** -0.5 / (4 * math.pi * math.sinh(0.5))
    assert landau_kernel([0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 1.0, 1.0, P3) == pytest.approx(expected, rel=1e-14)


def test_landau_diagonal_is_position_independent():
    rng = np.random.default_rng(2)
    ref = landau_kernel(np.zeros(3), np.zeros(3), 0.7, 1.3, P3)
    for x in rng.uniform(-3, 3, (10, 3)):
        assert abs(landau_kernel(x, x, 0.7, 1.3, P3) - ref) <= 1e-12 * abs(ref)


def test_landau_envelope_bounds_modulus():
    rng = np.random.default_rng(3)
    x = rng.uniform(-2, 2, (20, 3))
    xp = rng.uniform(-2, 2, (20, 3))
    tau = rng.uniform(0.1, 3.0, 20)
    assert np.all(np.abs(landau_kernel(x, xp, tau, 0.8, P3)) <= landau_envelope(x, xp, tau, 0.8, P3) * (1 + 1e-14))


def test_landau_needs_three_dimensions():
    with pytest.raises(ConfigurationError):
        landau_kernel([0.0, 0.0], [0.0, 0.0], 1.0, 1.0, P2)


def test_landau_large_tau_is_finite():
    assert np.isfinite(landau_kernel(np.zeros(3), np.ones(3), 2000.0, 1.0, P3))


def _grid(half, h, dim):
    axis = np.arange(-half, half + h / 2, h)
    mesh = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1)
    return mesh.reshape(-1, dim), h**dim


def test_chapman_kolmogorov_free():
    y, dv = _grid(7.0, 0.1, 2)
    x, xp = np.array([0.3, -0.2]), np.array([-0.4, 0.6])
    total = np.sum(free_kernel(x, y, 0.4, P2) * free_kernel(y, xp, 0.6, P2)) * dv
    assert total == pytest.approx(free_kernel(x, xp, 1.0, P2), rel=1e-6)


def test_chapman_kolmogorov_landau():
    y, dv = _grid(5.5, 0.125, 3)
    x, xp = np.array([0.3, -0.2, 0.1]), np.array([-0.4, 0.6, -0.3])
    total = np.sum(landau_kernel(x, y, 0.4, 1.0, P3) * landau_kernel(y, xp, 0.6, 1.0, P3)) * dv
    expected = landau_kernel(x, xp, 1.0, 1.0, P3)
    assert abs(total - expected) <= 1e-6 * abs(expected)


def _green_quad(r, m, dim):
    # log-spaced proper-time substitution tau = exp(t)
    x = np.zeros(dim)
    xp = np.zeros(dim)
    xp[0] = r
    p = PhysParams(1.0, 1.0, dim)
    f = lambda t: math.exp(t) * math.exp(-0.5 * m * m * math.exp(t)) * float(free_kernel(x, xp, math.exp(t), p))
    val, _ = integrate.quad(f, -40, 8, epsabs=1e-14, epsrel=1e-12, limit=400)
    return val


def test_free_green_three_dimensions():
    value = free_green([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], 1.0, P3)
    assert value == pytest.approx(math.exp(-1) / (2 * math.pi), rel=1e-12)
    assert value == pytest.approx(_green_quad(1.0, 1.0, 3), rel=1e-8)


def test_free_green_one_dimension_coincident():
    value = free_green([0.0], [0.0], 1.0, P1)
    assert value == pytest.approx(1.0)
    assert value == pytest.approx(_green_quad(0.0, 1.0, 1), rel=1e-8)


def test_free_green_two_dimensions_matches_quadrature():
    assert free_green([0.0, 0.0], [0.7, 0.0], 1.3, P2) == pytest.approx(_green_quad(0.7, 1.3, 2), rel=1e-8)


def test_free_green_coincident_diverges():
    with pytest.raises(ConfigurationError):
        free_green([0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 1.0, P3)


@given(st.floats(0.1, 5.0), st.floats(0.2, 3.0), st.floats(0.1, 3.0))
def test_free_green_scaling(lam, r, m):
    x = np.zeros(3)
    xp = np.array([r, 0.0, 0.0])
    lhs = free_green(lam * x, lam * xp, m, P3)
    rhs = lam ** (2 - 3) * free_green(x, xp, lam * m, P3)
    assert math.isclose(lhs, rhs, rel_tol=1e-12)


def test_proper_time_tail_bounds_remainder():
    m, tmax = 1.0, 6.0
    x, xp = np.zeros(3), np.array([0.5, 0.0, 0.0])
    rest, _ = integrate.quad(lambda t: math.exp(-0.5 * m * m * t) * float(free_kernel(x, xp, t, P3)), tmax, np.inf)
    assert rest <= proper_time_tail(tmax, m, P3)
