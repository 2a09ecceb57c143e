"""Stencil and jet tests: exactness on quadratics, second-order decay,
honest NaN bookkeeping at sampled boundaries."""

import numpy as np
import pytest

from cmclab.fields import (AnalyticScalar, BoundaryStencilError, GridScalar,
                           diff_x, diff_xx, diff_xy, diff_y, diff_yy,
                           grid_jet, interior, residual_stats)


def _mesh(n, lo=-1.0, hi=1.0):
    xs = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    return X, Y, xs[1] - xs[0]


def test_stencils_exact_on_quadratics():
    # centered stencils reproduce polynomials of degree <= 2 exactly
    X, Y, h = _mesh(17)
    f = 3.0 * X ** 2 - 2.0 * X * Y + 0.5 * Y ** 2 + X - 4.0
    core = (slice(1, -1), slice(1, -1))
    np.testing.assert_allclose(diff_x(f, h)[1:-1, :], (6 * X - 2 * Y + 1)[1:-1, :],
                               atol=1e-12)
    np.testing.assert_allclose(diff_y(f, h)[:, 1:-1], (-2 * X + Y)[:, 1:-1],
                               atol=1e-12)
    np.testing.assert_allclose(diff_xx(f, h)[1:-1, :], 6.0, atol=1e-11)
    np.testing.assert_allclose(diff_yy(f, h)[:, 1:-1], 1.0, atol=1e-11)
    np.testing.assert_allclose(diff_xy(f, h, h)[core], -2.0, atol=1e-11)


def test_stencil_nan_border():
    X, Y, h = _mesh(9)
    d = diff_x(np.sin(X), h)
    assert np.all(np.isnan(d[0, :])) and np.all(np.isnan(d[-1, :]))
    assert np.all(np.isfinite(d[1:-1, :]))
    dxy = diff_xy(np.sin(X) * Y, h, h)
    assert np.all(np.isnan(dxy[:, 0])) and np.all(np.isnan(dxy[0, :]))


def test_grid_jet_second_order():
    # halving h should shrink the worst jet error by about 4
    errs = []
    for n in (33, 65):
        X, Y, h = _mesh(n)
        f = np.sin(1.3 * X) * np.cos(0.7 * Y)
        j = grid_jet(f, h, h)
        exact = -1.3 ** 2 * f
        errs.append(residual_stats(j.fxx - exact, 1)[0])
    order = np.log2(errs[0] / errs[1])
    assert order > 1.9


def test_grid_jet_matches_analytic_jet():
    a = AnalyticScalar.from_expression("exp(x) * sin(y)")
    X, Y, h = _mesh(65)
    ja = a.jet(X, Y)
    jg = grid_jet(a(X, Y), h, h)
    for ca, cg in zip((ja.fx, ja.fy, ja.fxx, ja.fxy, ja.fyy),
                      (jg.fx, jg.fy, jg.fxx, jg.fxy, jg.fyy)):
        mx, _ = residual_stats(np.where(np.isnan(cg), 0.0, cg - ca), 1)
        assert mx < 5e-3


def test_jet_laplacian_helper():
    a = AnalyticScalar.from_expression("x^2 + 3*y^2")
    j = a.jet(np.array([0.2]), np.array([0.4]))
    assert j.laplacian() == pytest.approx(8.0)


def test_interior_and_stats():
    arr = np.arange(25.0).reshape(5, 5)
    assert interior(arr, 0) is arr
    np.testing.assert_array_equal(interior(arr, 1), arr[1:-1, 1:-1])
    with pytest.raises(BoundaryStencilError):
        interior(arr, 3)
    mx, rms = residual_stats(-arr, margin=1)
    core = arr[1:-1, 1:-1]
    assert mx == core.max()
    assert rms == pytest.approx(np.sqrt(np.mean(core ** 2)))


def test_stats_reject_interior_nan():
    arr = np.ones((7, 7))
    arr[3, 3] = np.nan
    with pytest.raises(BoundaryStencilError):
        residual_stats(arr, margin=1)
    # NaN restricted to the stripped ring is fine
    arr2 = np.ones((7, 7))
    arr2[0, :] = np.nan
    mx, rms = residual_stats(arr2, margin=1)
    assert mx == 1.0 and rms == pytest.approx(1.0)


def test_analytic_constant():
    c = AnalyticScalar.constant(2.5)
    X, Y, _ = _mesh(5)
    j = c.jet(X, Y)
    assert np.all(j.f == 2.5)
    assert np.all(j.fx == 0.0) and np.all(j.fyy == 0.0)
    assert j.f.shape == X.shape


def test_grid_scalar_bilinear_offnode():
    xs = np.linspace(0.0, 1.0, 41)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    g = GridScalar(np.sin(X) * np.cos(Y), 0.0, 0.0, xs[1] - xs[0], xs[1] - xs[0])
    # off-node query: bilinear interpolation of nodal stencil jets
    x, y = 0.437, 0.613
    j = g.jet(np.array([x]), np.array([y]))
    assert j.f[0] == pytest.approx(np.sin(x) * np.cos(y), abs=1e-3)
    assert j.fx[0] == pytest.approx(np.cos(x) * np.cos(y), abs=5e-3)
    assert j.fxx[0] == pytest.approx(-np.sin(x) * np.cos(y), abs=5e-2)
    # plain call evaluates values only
    assert g(np.array([x]), np.array([y]))[0] == pytest.approx(
        np.sin(x) * np.cos(y), abs=1e-3)


def test_grid_scalar_guards():
    with pytest.raises(ValueError):
        GridScalar(np.zeros((3, 3)), 0.0, 0.0, 0.1, 0.1)
    xs = np.linspace(0.0, 1.0, 11)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    g = GridScalar(X + Y, 0.0, 0.0, 0.1, 0.1)
    with pytest.raises(BoundaryStencilError):
        g.jet(np.array([0.05]), np.array([0.5]))   # inside the NaN ring
    with pytest.raises(BoundaryStencilError):
        g.jet(np.array([0.5]), np.array([1.2]))    # outside entirely
