import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magnetokernel import ConfigurationError
from magnetokernel._parallel import Moments, combine, map_blocks, resolve_workers
from magnetokernel.rng import block_ranges, standard_normal_rows, stream


def test_seed_is_mandatory():
    with pytest.raises(ValueError):
        stream(None, 0)


def test_streams_are_keyed():
    a = stream(1, 0, 2).standard_normal(4)
    assert np.array_equal(a, stream(1, 0, 2).standard_normal(4))
    assert not np.array_equal(a, stream(1, 0, 3).standard_normal(4))
    assert not np.array_equal(a, stream(2, 0, 2).standard_normal(4))


@given(st.integers(0, 3000), st.integers(1, 2000), st.sampled_from([16, 1024]))
def test_rows_do_not_depend_on_slicing(start, length, block):
    stop = start + length
    whole = standard_normal_rows(5, (0,), 0, stop, (2,), block_size=block)
    part = standard_normal_rows(5, (0,), start, stop, (2,), block_size=block)
    assert np.array_equal(whole[start:], part)


def test_block_ranges_cover():
    blocks = list(block_ranges(2500, 1024))
    assert blocks == [(0, 0, 1024), (1, 1024, 2048), (2, 2048, 2500)]


def test_map_blocks_keeps_order():
    out1 = map_blocks(lambda b, lo, hi: (b, lo, hi), 5000, workers=1, block_size=512)
    out4 = map_blocks(lambda b, lo, hi: (b, lo, hi), 5000, workers=4, block_size=512)
    assert out1 == out4


def test_workers_resolution(monkeypatch):
    monkeypatch.delenv("MAGNETOKERNEL_WORKERS", raising=False)
    assert resolve_workers() == 1
    monkeypatch.setenv("MAGNETOKERNEL_WORKERS", "3")
    assert resolve_workers() == 3
    assert resolve_workers(2) == 2
    monkeypatch.setenv("MAGNETOKERNEL_WORKERS", "many")
    with pytest.raises(ConfigurationError):
        resolve_workers()
    with pytest.raises(ConfigurationError):
        resolve_workers(0)


@given(
    st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=200),
    st.integers(1, 50),
)
def test_moments_merge_matches_direct(values, cut):
    values = np.asarray(values)
    parts = [Moments.of(values[i : i + cut]) for i in range(0, values.size, cut)]
    total = combine(parts)
    assert total.count == values.size
    assert total.mean == pytest.approx(values.mean(), abs=1e-9)
    assert total.variance == pytest.approx(values.var(ddof=1), rel=1e-8, abs=1e-8)


def test_moments_complex():
    z = np.array([1 + 2j, -1j, 3.0, 0.5 - 0.5j])
    m = combine([Moments.of(z[:1]), Moments.of(z[1:])])
    assert m.mean == pytest.approx(z.mean())
    assert m.variance == pytest.approx(np.sum(np.abs(z - z.mean()) ** 2) / 3)


def test_single_sample_has_infinite_error():
    assert np.isinf(Moments.of(np.array([1.0])).std_error)
