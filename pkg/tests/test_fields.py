import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magnetokernel import (
    BoundedIsotropic,
    ConfigurationError,
    CovarianceError,
    FieldExtentError,
    FieldGrid,
    FieldSample,
    GaugeFunction,
    ScaleInvariant,
    TranslationInvariant,
    gauge_transform,
    grid_for,
    load_field,
    project_transverse,
    sample_field,
    save_field,
    to_transverse,
)
from magnetokernel.fields import divergence_ratio

from conftest import within_se

BOUNDED_T = BoundedIsotropic(1.0, 1.0, transverse=True)


def _samples(spec, grid, n, seed):
    return [sample_field(spec, grid, seed=seed, index=i) for i in range(n)]


def test_sample_is_transverse():
    grid = grid_for(BOUNDED_T, 2, reach=2.0)
    for i in range(3):
        assert divergence_ratio(sample_field(BOUNDED_T, grid, seed=1, index=i)) <= 1e-10


def test_sample_is_reproducible_per_index():
    grid = grid_for(BOUNDED_T, 2, reach=1.0)
    a = sample_field(BOUNDED_T, grid, seed=4, index=7)
    b = sample_field(BOUNDED_T, grid, seed=4, index=7)
    c = sample_field(BOUNDED_T, grid, seed=4, index=8)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_bounded_variance_at_origin():
    spec = BoundedIsotropic(1.0, 1.0)
    grid = grid_for(spec, 2, reach=1.0)
    vals = np.array([s(np.zeros((1, 2)))[0, 0] for s in _samples(spec, grid, 1000, seed=2)])
    sq = vals**2
    assert within_se(sq.mean(), 1.0, sq.std(ddof=1) / math.sqrt(sq.size))


def test_two_point_function_matches_tensor():
    grid = grid_for(BOUNDED_T, 2, reach=2.0)
    p = np.array([[0.0, 0.0], [0.3, -0.2], [1.0, 0.5], [-0.7, 0.4], [0.2, 1.1]])
    q = np.array([[0.0, 0.0], [0.0, 0.4], [0.2, -0.3], [0.5, 0.5], [-0.9, 0.0]])
    samples = _samples(BOUNDED_T, grid, 1000, seed=3)
    prods = np.array([s(p)[:, :, None] * s(q)[:, None, :] for s in samples])
    mean = prods.mean(axis=0)
    se = prods.std(axis=0, ddof=1) / math.sqrt(len(samples))
    expected = BOUNDED_T.tensor(p, q)
    assert np.all(np.abs(mean - expected) <= 3 * se)


def test_scale_invariant_structure_exponent():
    # 1D keeps the box large enough for a two-decade band cheaply
    spec = ScaleInvariant(0.3, 0.01, 100.0, transverse=False)
    r = np.geomspace(0.3, 3.0, 6)
    c0 = spec.translation_tensor(np.zeros(1))[0, 0]
    oracle = np.array([2 * (c0 - spec.translation_tensor(np.array([x]))[0, 0]) for x in r])
    # quadrature value frozen from the same configuration
    assert np.polyfit(np.log(r), np.log(oracle), 1)[0] == pytest.approx(0.6327573, abs=1e-4)
    grid = FieldGrid.centered(1, 400.0, math.pi / 100)
    sq = []
    for s in _samples(spec, grid, 1000, seed=3):
        sq.append((s(r[:, None])[:, 0] - s(np.zeros((1, 1)))[0, 0]) ** 2)
    sq = np.array(sq)
    mean = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / math.sqrt(len(sq))
    assert np.all(np.abs(mean - oracle) <= 3 * se)
    slope = np.polyfit(np.log(r), np.log(mean), 1)[0]
    assert abs(slope - 0.6) <= 0.1


def test_scale_invariant_normalization_in_band():
    spec = ScaleInvariant(0.5, 0.01, 100.0, transverse=False)
    c0 = spec.translation_tensor(np.zeros(2))[0, 0]
    r = np.array([1.0, 0.0])
    sf = 2 * (c0 - spec.translation_tensor(r)[0, 0])
    assert sf == pytest.approx(2.0, rel=0.05)


def test_anchored_sample_vanishes_at_origin():
    spec = ScaleInvariant(0.5, 0.2, 8.0)
    grid = grid_for(spec, 2, reach=1.0)
    s = sample_field(spec, grid, seed=1)
    assert np.allclose(s(np.zeros((1, 2))), 0.0, atol=1e-12)


def test_evaluate_at_node_and_midpoint():
    grid = FieldGrid((0.0, 0.0), 0.5, (4, 4))
    nodes = grid.node_points()
    values = np.stack([nodes[..., 0] + 2 * nodes[..., 1], np.ones(grid.shape)], axis=-1)
    s = FieldSample(grid, values)
    assert np.allclose(s([[0.5, 1.0]]), [[2.5, 1.0]])
    # bilinear data is reproduced exactly between nodes
    assert np.allclose(s([[0.25, 0.75]]), [[1.75, 1.0]])


def test_out_of_extent_raises():
    grid = FieldGrid((0.0,), 0.5, (8,))
    s = FieldSample(grid, np.zeros((8, 1)))
    with pytest.raises(FieldExtentError):
        s([[10.0]])
    assert s.wrapped()([[10.0]]).shape == (1, 1)


def test_zero_gauge_is_identity():
    grid = grid_for(BOUNDED_T, 2, reach=1.0)
    s = sample_field(BOUNDED_T, grid, seed=5)
    assert np.array_equal(gauge_transform(s, GaugeFunction.zero(grid)).values, s.values)


def test_linear_gauge_adds_constant():
    grid = FieldGrid.centered(2, 4.0, 0.25)
    s = sample_field(BoundedIsotropic(1.0, 1.0), grid, seed=5)
    chi = GaugeFunction(grid, np.zeros(grid.shape), linear=[0.4, -1.2])
    assert np.allclose(gauge_transform(s, chi).values - s.values, [0.4, -1.2], atol=1e-14)
    assert chi([[1.0, 2.0]])[0] == pytest.approx(0.4 - 2.4)


def test_gauge_then_project_recovers_transverse_part():
    grid = grid_for(BOUNDED_T, 2, reach=2.0)
    s = sample_field(BOUNDED_T, grid, seed=6)
    nodes = grid.node_points()
    k = 2 * math.pi / grid.lengths
    chi = GaugeFunction(grid, np.sin(k[0] * nodes[..., 0]) * np.cos(2 * k[1] * nodes[..., 1]))
    back = project_transverse(gauge_transform(s, chi))
    assert np.max(np.abs(back.values - s.values)) <= 1e-10


def test_helmholtz_split_reconstructs():
    spec = BoundedIsotropic(1.0, 1.0)
    grid = grid_for(spec, 2, reach=1.0)
    s = sample_field(spec, grid, seed=7)
    a_t, chi = to_transverse(s)
    rebuilt = a_t.values + chi.gradient_values()
    assert np.max(np.abs(rebuilt - s.values)) <= 1e-10
    assert divergence_ratio(a_t) <= 1e-10


def test_projection_is_idempotent():
    spec = BoundedIsotropic(1.0, 1.0)
    grid = grid_for(spec, 3, reach=1.0)
    once = project_transverse(sample_field(spec, grid, seed=8))
    twice = project_transverse(once)
    assert np.max(np.abs(twice.values - once.values)) <= 1e-12


def test_mismatched_grids_rejected():
    g1 = FieldGrid.centered(2, 2.0, 0.25)
    g2 = FieldGrid.centered(2, 2.0, 0.5)
    s = FieldSample(g1, np.zeros(g1.shape + (2,)))
    with pytest.raises(ConfigurationError):
        gauge_transform(s, GaugeFunction.zero(g2))


@pytest.mark.parametrize("fmt", ["bin", "csv"])
def test_save_load_round_trip(tmp_path, fmt):
    grid = grid_for(BOUNDED_T, 2, reach=0.5)
    s = sample_field(BOUNDED_T, grid, seed=9)
    path = tmp_path / f"field.{fmt}"
    save_field(s, path, fmt=fmt)
    back = load_field(path)
    assert back.grid == s.grid
    assert back.transverse == s.transverse
    assert np.array_equal(back.values, s.values)


def test_resolution_and_box_checks():
    spec = ScaleInvariant(0.5, 0.5, 10.0)
    with pytest.raises(ConfigurationError):
        sample_field(spec, FieldGrid.centered(2, 16.0, 0.5), seed=1)
    with pytest.raises(ConfigurationError):
        sample_field(spec, FieldGrid.centered(2, 4.0, 0.1), seed=1)
    with pytest.raises(ConfigurationError):
        sample_field(BoundedIsotropic(1.0, 1.0), FieldGrid.centered(2, 4.0, 0.6), seed=1)


def test_transverse_needs_two_dimensions():
    with pytest.raises(ConfigurationError):
        BOUNDED_T.tensor(np.zeros(1), np.ones(1))


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
def test_gamma_range(gamma):
    with pytest.raises(ConfigurationError):
        ScaleInvariant(gamma, 0.1, 10.0)


def test_negative_spectral_density_rejected():
    with pytest.raises(CovarianceError):
        TranslationInvariant(lambda k: 1.0 - k, k_max=5.0)


def test_constant_covariance_sample():
    spec = BoundedIsotropic(2.0, math.inf)
    assert spec.tensor(np.zeros(2), np.full(2, 100.0)) == pytest.approx(2.0 * np.eye(2))
    s = sample_field(spec, FieldGrid.centered(2, 1.0, 0.25), seed=1)
    assert np.allclose(s.values, s.values[0, 0])


_point = st.lists(st.floats(-2.0, 2.0), min_size=2, max_size=2)


@given(st.lists(_point, min_size=2, max_size=5), st.sampled_from(["bounded", "scale"]))
def test_covariance_gram_is_symmetric_psd(points, kind):
    spec = BOUNDED_T if kind == "bounded" else ScaleInvariant(0.4, 0.2, 6.0)
    p = np.asarray(points)
    g = spec.tensor(p[:, None, :], p[None, :, :])
    gram = g.transpose(0, 2, 1, 3).reshape(2 * len(p), 2 * len(p))
    assert np.allclose(gram, gram.T, atol=1e-10)
    assert np.linalg.eigvalsh(gram).min() >= -1e-6 * max(1.0, np.abs(gram).max())
