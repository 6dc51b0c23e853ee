import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from voidplace import Grid1D, cell_center, integrate


@pytest.mark.parametrize("origin, i, expected", [(0, 0, 25.0), (0, 9, 475.0), (100, 0, 125.0)])
def test_cell_center(origin, i, expected):
    assert cell_center(Grid1D(origin, 50, 10), i) == expected


@pytest.mark.parametrize("i", [-1, 10])
def test_cell_center_out_of_range(i):
    with pytest.raises(IndexError):
        cell_center(Grid1D(0, 50, 10), i)


def test_integrate_examples():
    assert integrate(Grid1D(0, 50, 10), np.ones(10)) == 500.0
    assert integrate(Grid1D(0, 50, 10), np.zeros(10)) == 0.0
    assert integrate(Grid1D(0, 0.5, 3), [1, 2, 3]) == 3.0


def test_integrate_rejects_bad_input():
    g = Grid1D(0, 50, 3)
    with pytest.raises(ValueError):
        integrate(g, [1.0, 2.0])
    with pytest.raises(ValueError):
        integrate(g, [1.0, np.nan, 2.0])


@pytest.mark.parametrize("kwargs", [dict(spacing=0, n_cells=3), dict(spacing=-1, n_cells=3),
                                    dict(spacing=1, n_cells=0)])
def test_invalid_grid(kwargs):
    with pytest.raises(ValueError):
        Grid1D(origin=0, **kwargs)


def test_centers_and_length():
    g = Grid1D(10, 2.0, 4)
    np.testing.assert_array_equal(g.centers, [11, 13, 15, 17])
    assert g.length == 8.0
    assert Grid1D.from_dict(g.to_dict()) == g


vec = arrays(np.float64, 16, elements=st.floats(-1e3, 1e3))


@given(vec, vec, st.floats(-10, 10), st.floats(-10, 10))
def test_integrate_linear(u, v, a, b):
    g = Grid1D(0, 50, 16)
    lhs = integrate(g, a * u + b * v)
    rhs = a * integrate(g, u) + b * integrate(g, v)
    scale = (abs(a) * np.abs(u).sum() + abs(b) * np.abs(v).sum()) * 50 + 1e-300
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(arrays(np.float64, 8, elements=st.floats(0, 1e6)))
def test_integrate_nonnegative(u):
    assert integrate(Grid1D(0, 1.5, 8), u) >= 0
