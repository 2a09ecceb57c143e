"""Conformal charts: curvature pointwise and on grids, ball geometry
closed forms, config round trips, domain guards."""

import math

import numpy as np
import pytest

from cmclab.ambient import (ConformalChart, Disk, Rectangle, ball_geometry,
                            chart_from_mapping, curvature_infimum,
                            gauss_curvature, resolve_chart_reference)
from cmclab.errors import ConfigError, DomainError


# --------------------------------------------------------- curvature


@pytest.mark.parametrize("kappa0", [-4.0, -1.0, -0.25, 0.0, 0.5, 1.0])
def test_model_charts_have_constant_curvature(kappa0):
    chart = ConformalChart.constant_curvature(kappa0)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-0.3, 0.3, size=(8, 2))
    for x, y in pts:
        assert gauss_curvature(chart, (x, y)) == pytest.approx(kappa0, abs=1e-12)


def test_expression_chart_curvature():
    # phi = x^2 gives kappa = -laplacian(phi) e^{-2 phi} = -2 exp(-2 x^2)
    chart = ConformalChart.from_expression("x^2")
    got = gauss_curvature(chart, (0.5, 0.0))
    assert got == pytest.approx(-2.0 * math.exp(-0.5), rel=1e-12)
    assert chart.is_analytic


def test_metric_factor_poincare():
    # metric_factor is e^{2 phi}, the coefficient of dx^2 + dy^2
    chart = ConformalChart.poincare_disk()
    r2 = 0.3 ** 2 + 0.1 ** 2
    assert chart.metric_factor(0.3, 0.1) == pytest.approx(
        (2.0 / (1.0 - r2)) ** 2)


def test_grid_chart_curvature_second_order():
    # sample the Poincare conformal factor, expect kappa -> -1 at O(h^2)
    errs = []
    for n in (81, 161):
        xs = np.linspace(-0.7, 0.7, n)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        phi = np.log(2.0) - np.log(1.0 - (X ** 2 + Y ** 2))
        chart = ConformalChart.from_grid(phi, xs[0], xs[0],
                                         xs[1] - xs[0], xs[1] - xs[0])
        errs.append(abs(gauss_curvature(chart, (0.2, 0.1)) + 1.0))
    assert errs[0] < 5e-4
    assert math.log2(errs[0] / errs[1]) > 1.8
    assert not chart.is_analytic


def test_curvature_infimum_poincare_disk():
    chart = ConformalChart.poincare_disk()
    summary = curvature_infimum(chart, Disk(0.0, 0.0, 0.8), resolution=51)
    assert summary.c_inf == pytest.approx(-1.0, abs=1e-9)
    assert summary.kappa_field.shape == (51, 51)
    summary_rect = curvature_infimum(chart, Rectangle(-0.5, 0.5, -0.5, 0.5),
                                     resolution=41)
    assert summary_rect.c_inf == pytest.approx(-1.0, abs=1e-9)


# ------------------------------------------------------ ball geometry


def test_ball_geometry_closed_forms():
    # flat: circle length 2 pi d, area pi d^2
    g = ball_geometry(0.0, 1.5)
    assert g.boundary_length == pytest.approx(2 * math.pi * 1.5, rel=1e-14)
    assert g.volume == pytest.approx(math.pi * 1.5 ** 2, rel=1e-14)
    # curvature -1: 2 pi sinh d and 2 pi (cosh d - 1)
    g = ball_geometry(-1.0, 2.0)
    assert g.boundary_length == pytest.approx(2 * math.pi * math.sinh(2.0),
                                              rel=1e-14)
    assert g.volume == pytest.approx(2 * math.pi * (math.cosh(2.0) - 1.0),
                                     rel=1e-14)
    # curvature -a^2 rescales: L = 2 pi sinh(a d)/a
    g = ball_geometry(-4.0, 1.0)
    assert g.boundary_length == pytest.approx(math.pi * math.sinh(2.0),
                                              rel=1e-14)
    assert g.volume == pytest.approx(2 * math.pi * (math.cosh(2.0) - 1.0) / 4,
                                     rel=1e-14)
    # sphere: hemisphere of curvature +1
    g = ball_geometry(1.0, math.pi / 2)
    assert g.boundary_length == pytest.approx(2 * math.pi, rel=1e-12)
    assert g.volume == pytest.approx(2 * math.pi, rel=1e-12)


def test_ball_geometry_matches_small_radius_expansion():
    # independent sanity check: V = pi d^2 (1 - kappa d^2 / 12 + O(d^4))
    for kappa0 in (-1.0, 0.5):
        d = 1e-2
        v = ball_geometry(kappa0, d).volume
        expansion = math.pi * d ** 2 * (1.0 - kappa0 * d ** 2 / 12.0)
        assert v == pytest.approx(expansion, rel=1e-7)


def test_ball_geometry_domain_guards():
    with pytest.raises(DomainError):
        ball_geometry(1.0, 3.5)          # past the sphere injectivity radius
    with pytest.raises(DomainError):
        ball_geometry(-1.0, -0.1)


# ------------------------------------------------------ config plumbing


def test_resolve_chart_reference_round_trip():
    for ref in ("flat", "hyperbolic:-1", "hyperbolic:-4", "sphere:1"):
        chart = resolve_chart_reference(ref)
        assert chart.reference == ref
    assert resolve_chart_reference("poincare").kappa0 == -1.0


def test_chart_from_mapping():
    chart = chart_from_mapping({"model": "hyperbolic", "kappa0": -2.0})
    assert chart.kappa0 == -2.0
    chart = chart_from_mapping({"model": "expression", "expression": "x*y"})
    assert chart.is_analytic
    with pytest.raises(ConfigError):
        chart_from_mapping({"model": "nonsense"})
    with pytest.raises(ConfigError):
        chart_from_mapping({"kappa0": -1.0})
    with pytest.raises(ConfigError):
        chart_from_mapping({"model": "expression"})


# --------------------------------------------------------- domain guards


def test_regions_contain():
    d = Disk(0.0, 0.0, 1.0)
    assert d.contains(0.3, 0.4)
    assert not d.contains(0.8, 0.8)
    r = Rectangle(0.0, 2.0, -1.0, 1.0)
    assert r.contains(1.0, 0.0)
    assert not r.contains(2.5, 0.0)


def test_require_inside_poincare():
    chart = ConformalChart.poincare_disk()
    chart.require_inside(np.array([0.3]), np.array([-0.2]))
    with pytest.raises(DomainError):
        chart.require_inside(np.array([0.99]), np.array([0.3]))


def test_sphere_chart_curvature():
    chart = ConformalChart.sphere(0.25)
    assert gauss_curvature(chart, (0.4, -0.3)) == pytest.approx(0.25, abs=1e-12)
