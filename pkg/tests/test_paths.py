import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import within_se
from magnetokernel import ConfigurationError, PhysParams
from magnetokernel.paths import (
    BridgePath,
    SpacePath,
    TimeGrid,
    bridge_batch,
    brownian_batch,
    make_space_path,
    refine_bridges,
    sample_bridge,
    sample_brownian,
    space_points,
)

N = 100_000


def test_sigma_squared_times_mass_is_hbar():
    p = PhysParams(hbar=0.7, mass=2.3, dimension=2)
    assert abs(p.sigma**2 * p.mass - p.hbar) <= 1e-14 * p.hbar


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_sigma_relation_property(hbar, mass):
    p = PhysParams(hbar, mass, 1)
    assert math.isclose(p.sigma**2 * p.mass, hbar, rel_tol=1e-14)


@pytest.mark.parametrize("bad", [dict(hbar=0.0), dict(mass=-1.0), dict(dimension=0), dict(dimension=4)])
def test_physparams_rejects_bad_values(bad):
    with pytest.raises(ConfigurationError):
        PhysParams(**bad)


def test_time_grid_nodes():
    g = TimeGrid(2.0, 8)
    s = g.nodes
    assert s[0] == 0.0 and s[-1] == 2.0
    assert np.all(np.diff(s) > 0)
    assert g.refined().n_steps == 16


@pytest.mark.parametrize("tau,n", [(0.0, 4), (-1.0, 4), (1.0, 1)])
def test_time_grid_rejects_bad_values(tau, n):
    with pytest.raises(ConfigurationError):
        TimeGrid(tau, n)


def test_brownian_variance_at_tau():
    b = brownian_batch(TimeGrid(1.0, 4), 2, seed=1, start=0, stop=N)
    end = b[:, -1, 0]
    se = end.var() * math.sqrt(2 / N)
    assert within_se(end.var(), 1.0, se)


def test_brownian_cross_component_zero():
    b = brownian_batch(TimeGrid(1.0, 4), 2, seed=2, start=0, stop=N)
    prod = b[:, 2, 0] * b[:, 2, 1]
    assert within_se(prod.mean(), 0.0, prod.std() / math.sqrt(N))


def test_brownian_min_covariance():
    b = brownian_batch(TimeGrid(1.0, 4), 1, seed=3, start=0, stop=N)
    prod = b[:, 1, 0] * b[:, 3, 0]
    assert within_se(prod.mean(), 0.25, prod.std() / math.sqrt(N))


def test_sample_brownian_deterministic():
    g = TimeGrid(1.0, 16)
    assert np.array_equal(sample_brownian(g, 2, seed=5, index=3), sample_brownian(g, 2, seed=5, index=3))
    assert not np.array_equal(sample_brownian(g, 2, seed=5, index=3), sample_brownian(g, 2, seed=5, index=4))


def test_bridge_endpoints_exact():
    a = sample_bridge(32, 3, seed=0)
    assert isinstance(a, BridgePath)
    assert np.all(a.values[0] == 0) and np.all(a.values[-1] == 0)


def test_bridge_covariance_examples():
    a = bridge_batch(4, 1, seed=4, start=0, stop=N)[..., 0]
    prod = a[:, 1] * a[:, 2]
    assert within_se(prod.mean(), 0.125, prod.std() / math.sqrt(N))
    sq = a[:, 2] ** 2
    assert within_se(sq.mean(), 0.25, sq.std() / math.sqrt(N))


def test_bridge_rejects_unpinned_values():
    with pytest.raises(ConfigurationError):
        BridgePath(np.ones((5, 1)))


def test_bridge_rejects_too_few_steps():
    with pytest.raises(ConfigurationError):
        sample_bridge(1, 1, seed=0)


def test_batch_rows_independent_of_slicing():
    full = bridge_batch(8, 2, seed=9, start=0, stop=3000)
    part = bridge_batch(8, 2, seed=9, start=1000, stop=2100)
    assert np.array_equal(full[1000:2100], part)
    assert np.array_equal(sample_bridge(8, 2, seed=9, index=2050).values, full[2050])


def test_refinement_keeps_coarse_nodes_and_bridge_law():
    a = bridge_batch(4, 1, seed=6, start=0, stop=N)
    r = refine_bridges(a, seed=6)
    assert np.array_equal(r[:, ::2], a)
    # node 1 of 8 sits at s = 1/8: variance s (1 - s)
    sq = r[:, 1, 0] ** 2
    assert within_se(sq.mean(), 7 / 64, sq.std() / math.sqrt(N))
    prod = r[:, 1, 0] * r[:, 3, 0]
    assert within_se(prod.mean(), (1 / 8) * (1 - 3 / 8), prod.std() / math.sqrt(N))


def test_zero_bridge_gives_straight_line():
    p = PhysParams(dimension=3)
    path = make_space_path(BridgePath(np.zeros((5, 3))), [0, 0, 0], [1, 0, 0], 1.0, p)
    expected = np.zeros((5, 3))
    expected[:, 0] = np.arange(5) / 4
    assert np.allclose(path.points, expected, atol=0, rtol=0) or np.array_equal(path.points, expected)


def test_coincident_endpoints_zero_bridge_constant_path():
    p = PhysParams(dimension=2)
    path = make_space_path(BridgePath(np.zeros((9, 2))), [0.3, -1], [0.3, -1], 2.0, p)
    assert np.all(path.points == np.array([0.3, -1.0]))


def test_sigma_zero_gives_drift_only():
    a = bridge_batch(8, 2, seed=1, start=0, stop=4)
    q = space_points(a, np.array([0.0, 1.0]), np.array([2.0, -1.0]), 1.5, sigma=0.0)
    assert np.allclose(q, q[0][None], atol=0)


def test_space_path_endpoints_exact():
    p = PhysParams(hbar=1.3, mass=0.4, dimension=2)
    x, xp = np.array([0.1, 0.2]), np.array([-0.7, 1.9])
    path = make_space_path(sample_bridge(16, 2, seed=3), x, xp, 0.8, p)
    assert isinstance(path, SpacePath)
    assert np.array_equal(path.points[0], x) and np.array_equal(path.points[-1], xp)


def test_space_path_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        make_space_path(sample_bridge(8, 2, seed=0), [0.0], [1.0], 1.0, PhysParams(dimension=1))


@given(st.floats(-3, 3), st.integers(0, 50))
def test_space_path_linear_in_bridge(alpha, index):
    p = PhysParams(dimension=2)
    a = sample_bridge(8, 2, seed=11, index=index)
    x, xp = np.array([0.5, 0.0]), np.array([1.0, 2.0])
    path = make_space_path(a, x, xp, 1.0, p)
    scaled = make_space_path(BridgePath(alpha * a.values), x, xp, 1.0, p)
    assert np.allclose(scaled.points - scaled.drift, alpha * (path.points - path.drift), rtol=1e-12, atol=1e-12)
