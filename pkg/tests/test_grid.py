import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from persmode.grid import (
    OUTSIDE,
    CellField,
    GridSpec,
    build_grid,
    build_histogram,
    cell_of_point,
    dilate_max,
    dilation_radius,
)


def test_build_grid_examples():
    g = build_grid(1, 4)
    assert g.total_cells == 4 and g.h == 0.25
    g = build_grid(2, 10)
    assert g.total_cells == 100 and g.h == pytest.approx(0.1)
    with pytest.raises(ValueError):
        build_grid(3, 1)
    with pytest.raises(ValueError):
        build_grid(0, 4)


def test_step_is_exact():
    # 1/49 * 49 != 1 in floating point; the exact step keeps m h = 1
    g = build_grid(1, 49)
    assert g.step * 49 == 1


def test_cell_lookup():
    g = build_grid(1, 4)
    assert cell_of_point(g, 0.999) == (3,)
    assert cell_of_point(g, 1.0) == (3,)
    assert cell_of_point(g, 0.25) == (1,)
    assert cell_of_point(g, 0.0) == (0,)
    assert cell_of_point(g, -0.01) == OUTSIDE
    assert cell_of_point(g, 1.01) == OUTSIDE
    g2 = build_grid(2, 4)
    assert cell_of_point(g2, [0.3, 0.9]) == (1, 3)
    with pytest.raises(ValueError):
        cell_of_point(g2, [0.3])


def test_flat_and_multi_index_roundtrip():
    g = build_grid(3, 5)
    for flat in range(g.total_cells):
        assert g.flat_index(g.multi_index(flat)) == flat
    assert np.allclose(g.center(0), [0.1, 0.1, 0.1])
    assert g.centers().shape == (125, 3)


def test_histogram_examples():
    g = build_grid(1, 2)
    assert build_histogram(np.array([0.1, 0.2, 0.3, 0.4]), g).flat.tolist() == [2.0, 0.0]
    assert build_histogram(np.array([0.1, 0.9]), g).flat.tolist() == [1.0, 1.0]


def test_histogram_outside_points_count_in_n():
    g = build_grid(1, 2)
    h = build_histogram(np.array([0.1, 0.9, 1.5, -0.2]), g)
    assert h.flat.tolist() == [0.5, 0.5]
    assert h.mass() == pytest.approx(0.5)


def test_histogram_rejects_bad_input():
    g = build_grid(2, 4)
    with pytest.raises(ValueError):
        build_histogram(np.zeros((0, 2)), g)
    with pytest.raises(ValueError):
        build_histogram(np.zeros((5, 3)), g)


@settings(max_examples=60, deadline=None)
@given(
    d=st.integers(1, 3),
    m=st.integers(2, 9),
    seed=st.integers(0, 2**31),
    n=st.integers(1, 300),
)
def test_histogram_mass_is_one(d, m, seed, n):
    x = np.random.default_rng(seed).random((n, d))
    assert build_histogram(x, build_grid(d, m)).mass() == pytest.approx(1.0, abs=1e-12)


def test_cell_field_validation():
    g = build_grid(1, 3)
    with pytest.raises(ValueError):
        CellField(g, [1.0, -1.0, 0.0])
    with pytest.raises(ValueError):
        CellField(g, [1.0, np.nan, 0.0])
    f = CellField(g, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        f.values[0] = 5.0


def test_dilation_radius_examples():
    assert dilation_radius(1, 1) == 1
    assert dilation_radius(2, 0.5) == 3
    assert dilation_radius(2, 1) == 2
    with pytest.raises(ValueError):
        dilation_radius(2, 0)
    with pytest.raises(ValueError):
        dilation_radius(2, 1.5)


def test_dilate_examples():
    g3 = build_grid(1, 3)
    assert dilate_max(CellField(g3, [1, 0, 0]), 1).flat.tolist() == [1, 1, 0]
    g5 = build_grid(1, 5)
    assert dilate_max(CellField(g5, [0, 2, 0, 0, 5]), 2).flat.tolist() == [2, 2, 5, 5, 5]
    f = CellField(g5, [0, 2, 0, 0, 5])
    assert dilate_max(f, 0) is f
    with pytest.raises(ValueError):
        dilate_max(f, -1)


def _direct_dilate(values: np.ndarray, k: int) -> np.ndarray:
    m = values.shape[0]
    out = np.empty_like(values)
    for idx in itertools.product(range(m), repeat=values.ndim):
        window = tuple(slice(max(0, i - k), min(m, i + k + 1)) for i in idx)
        out[idx] = values[window].max()
    return out


def _fields(max_dim=2, max_m=8):
    return st.tuples(st.integers(1, max_dim), st.integers(2, max_m)).flatmap(
        lambda dm: arrays(np.float64, (dm[1],) * dm[0], elements=st.integers(0, 6).map(float))
    )


@settings(max_examples=80, deadline=None)
@given(values=_fields(max_dim=3, max_m=6), k=st.integers(0, 4))
def test_dilate_matches_direct_window_max(values, k):
    g = build_grid(values.ndim, values.shape[0])
    assert np.array_equal(dilate_max(CellField(g, values), k).values, _direct_dilate(values, k))


@settings(max_examples=60, deadline=None)
@given(values=_fields(), k1=st.integers(0, 3), k2=st.integers(0, 3))
def test_dilate_monotone_and_composes(values, k1, k2):
    g = build_grid(values.ndim, values.shape[0])
    f = CellField(g, values)
    a, b = dilate_max(f, k1), dilate_max(f, k1 + k2)
    assert np.all(f.values <= a.values) and np.all(a.values <= b.values)
    assert np.array_equal(dilate_max(a, k2).values, b.values)


@settings(max_examples=60, deadline=None)
@given(values=_fields(), k=st.integers(0, 3))
def test_dilate_commutes_with_superlevel_thickening(values, k):
    g = build_grid(values.ndim, values.shape[0])
    out = dilate_max(CellField(g, values), k).values
    idx = np.indices(values.shape).reshape(values.ndim, -1).T
    for lam in np.unique(values):
        inside = idx[values.ravel() >= lam]
        cheb = np.abs(idx[:, None, :] - inside[None, :, :]).max(axis=2).min(axis=1)
        assert np.array_equal((out >= lam).ravel(), cheb <= k)


def test_grid_spec_is_hashable_and_equal():
    assert GridSpec(2, 5) == build_grid(2, 5)
    assert len({GridSpec(2, 5), GridSpec(2, 5)}) == 1
