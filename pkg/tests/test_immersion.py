"""Fundamental-form pipeline tests against a catenoid oracle plus the
identity suite on model cylinders.

The catenoid F = (cosh v cos u, cosh v sin u, v) in the flat product is
conformal with lam = cosh^2 v, minimal, and has closed-form data
nu = -tanh v, p = -1/2, K = -1/cosh^4 v, which pins down every sign
convention in induced_data independently of the bundled catalog.
"""

import math

import numpy as np
import pytest

from cmclab import catalog as cat
from cmclab import immersion as im
from cmclab.ambient import ConformalChart
from cmclab.errors import (DegenerateImmersionError, HypothesisError,
                           NotConformalError)
from cmclab.fields import AnalyticScalar

FLAT = ConformalChart.flat()
POINCARE = ConformalChart.poincare_disk()


def catenoid(log_lambda=True):
    F1 = AnalyticScalar.from_expression("cosh(y) * cos(x)")
    F2 = AnalyticScalar.from_expression("cosh(y) * sin(x)")
    h = AnalyticScalar.from_expression("y")
    ll = AnalyticScalar.from_expression("2 * log(cosh(y))") if log_lambda else None
    return im.ConformalImmersion.analytic(FLAT, F1, F2, h, (0.3, 2.2),
                                          (-1.0, 1.0), log_lambda=ll,
                                          label="catenoid")


# ------------------------------------------------------ catenoid oracle


def test_catenoid_fundamental_data():
    imm = catenoid()
    data = im.induced_data(imm, shape=(61, 61))
    U, V, du, dv = imm.parameter_grid((61, 61))
    assert data.analytic
    np.testing.assert_allclose(data.lam, np.cosh(V) ** 2, atol=1e-13)
    np.testing.assert_allclose(data.nu, -np.tanh(V), atol=1e-13)
    np.testing.assert_allclose(data.H, 0.0, atol=1e-13)
    np.testing.assert_allclose(data.p, -0.5 + 0.0j, atol=1e-13)
    np.testing.assert_allclose(data.K, -1.0 / np.cosh(V) ** 4, atol=1e-13)
    np.testing.assert_allclose(data.KI, data.K, atol=1e-13)  # flat ambient
    np.testing.assert_allclose(data.lam_z, -1j * np.cosh(V) * np.sinh(V),
                               atol=1e-13)
    assert data.mean_curvature_constant() == pytest.approx(0.0, abs=1e-13)


def test_catenoid_structure_residuals():
    data = im.induced_data(catenoid(), shape=(61, 61))
    report = im.verify_structure(data, tol=1.0)
    res = report.record_map()
    # everything with analytic jets sits at machine precision
    for cid in ("eq2_intrinsic_gauss", "eq3_height_gradient",
                "eq4_height_hopf", "eq5_height_laplacian", "eq7_codazzi"):
        assert res[cid].max_residual < 1e-9, cid
    # eq6 needs a stencil derivative of the sampled angle function, so it
    # is second order in h rather than exact
    assert res["eq6_angle_gradient"].max_residual < 5e-4


def test_catenoid_eq6_second_order():
    errs = []
    for n in (31, 61, 121):
        data = im.induced_data(catenoid(), shape=(n, n))
        rep = im.verify_structure(data, tol=1.0)
        errs.append(rep.record_map()["eq6_angle_gradient"].max_residual)
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) > 1.9


def test_catenoid_algebraic_identities():
    data = im.induced_data(catenoid(), shape=(61, 61))
    # 4|p|^2 = lam^2 (H^2 - K) for the Hopf coefficient
    assert np.nanmax(np.abs(data.hopf_identity_residual())) < 1e-12
    # <T,T> + nu^2 = 1
    assert np.nanmax(np.abs(data.vertical_decomposition_residual())) < 1e-12


def test_catenoid_without_log_lambda_degrades_gracefully():
    # the conformal factor falls back to stencil jets: second order, and
    # the default analytic tolerance correctly flags the loss
    imm = catenoid(log_lambda=False)
    errs = []
    for n in (31, 61):
        rep = im.verify_structure(im.induced_data(imm, shape=(n, n)), tol=1.0)
        errs.append(max(r.max_residual for r in rep.records))
    assert math.log2(errs[0] / errs[1]) > 1.9


# ----------------------------------------------------------- invariances


def test_flip_normal_negates_and_preserves_residuals():
    data = im.induced_data(catenoid(), shape=(41, 41))
    flipped = im.flip_normal(data)
    assert np.array_equal(flipped.nu, -data.nu)
    assert np.array_equal(flipped.H, -data.H)
    assert np.array_equal(flipped.p, -data.p)
    # second flip restores the original exactly
    back = im.flip_normal(flipped)
    assert np.array_equal(back.nu, data.nu)
    assert np.array_equal(back.p, data.p)
    # residual statistics are unchanged by the flip
    r0 = im.verify_structure(data, tol=1.0).record_map()
    r1 = im.verify_structure(flipped, tol=1.0).record_map()
    for cid in r0:
        assert r0[cid].max_residual == r1[cid].max_residual, cid


def test_vertical_translation_bitwise_invariant():
    imm = catenoid()
    data = im.induced_data(imm, shape=(41, 41))
    data_t = im.induced_data(imm.translate(1.7), shape=(41, 41))
    for name in ("lam", "nu", "H", "p", "K", "KI", "h_z", "kappa",
                 "lam_z", "h_zz", "h_zzbar", "T"):
        assert np.array_equal(getattr(data_t, name), getattr(data, name),
                              equal_nan=True), name


def test_nonpositive_convention_normalizes_nu():
    imm = cat.slice_surface(POINCARE)
    up = im.induced_data(imm, shape=(41, 41), convention="frame")
    down = im.induced_data(imm, shape=(41, 41), convention="nonpositive")
    assert abs(float(np.nanmean(down.nu))) == pytest.approx(1.0, abs=1e-12)
    assert float(np.nanmean(down.nu)) <= 0.0
    assert np.array_equal(np.abs(up.nu), np.abs(down.nu))
    with pytest.raises(ValueError):
        im.induced_data(imm, convention="sideways")


# ----------------------------------------------------- guard conditions


def test_not_conformal_rejected():
    u = AnalyticScalar.from_expression("x")
    v = AnalyticScalar.from_expression("y")
    h = AnalyticScalar.from_expression("x^2")  # graph: |X_u| != |X_v|
    imm = im.ConformalImmersion.analytic(FLAT, u, v, h, (-1, 1), (-1, 1))
    with pytest.raises(NotConformalError):
        im.induced_data(imm, shape=(17, 17))


def test_degenerate_rejected():
    zero = AnalyticScalar.constant(0.0)
    imm = im.ConformalImmersion.analytic(FLAT, zero, zero, zero,
                                         (-1, 1), (-1, 1))
    with pytest.raises(DegenerateImmersionError):
        im.induced_data(imm, shape=(9, 9))


# --------------------------------------- identities on model cylinders


@pytest.fixture(scope="module")
def hyperbolic_cylinder_data():
    imm = cat.vertical_cylinder(POINCARE, 0.75)
    return im.induced_data(imm, shape=(101, 101))


def test_ar_differential_value(hyperbolic_cylinder_data):
    q = im.ar_differential(hyperbolic_cylinder_data, -1.0)
    # 2Hp - c h_z^2 with H = 3/4: the coefficient is H^2 - 1/4 = 0.3125
    np.testing.assert_allclose(q.values, 0.3125, atol=1e-12)
    assert q.holo_max < 1e-12
    assert q.constant_H and q.kappa_matches_c


def test_gradient_identity_exact_cancellation(hyperbolic_cylinder_data):
    rep = im.nu_gradient_identity(hyperbolic_cylinder_data, -1.0)
    rec = rep.records[0]
    assert rec.check_id == "eq8_angle_gradient_norm"
    assert rec.max_residual < 1e-9
    assert rep.overall_pass


def test_laplacian_identity_and_jacobi_share_kernel(hyperbolic_cylinder_data):
    data = hyperbolic_cylinder_data
    assert im.nu_laplacian_identity(data).records[0].max_residual < 1e-9
    assert im.jacobi_residual(data).records[0].max_residual < 1e-9
    f1 = im.jacobi_residual_field(data)
    f2 = im.nu_laplacian_residual_field(data)
    assert np.array_equal(f1, f2, equal_nan=True)


def test_gradient_identity_guards(hyperbolic_cylinder_data):
    with pytest.raises(HypothesisError):
        im.nu_gradient_identity(hyperbolic_cylinder_data, 0.0)
    q_wrong = im.ar_differential(hyperbolic_cylinder_data, -2.0)
    with pytest.raises(HypothesisError):
        im.nu_gradient_identity(hyperbolic_cylinder_data, -1.0, q=q_wrong)


def test_ar_flag_reports_curvature_mismatch():
    data = im.induced_data(cat.vertical_cylinder(FLAT, 0.5), shape=(41, 41))
    q = im.ar_differential(data, -1.0)   # wrong c for a flat base
    assert q.constant_H and not q.kappa_matches_c


# ------------------------------------------------- comparison function


def test_f_m_spot_values():
    assert im.f_m_value(-1.0, 1.0 / math.sqrt(2.0), 1.0) == pytest.approx(
        -math.pi / 4.0, abs=1e-12)
    assert im.f_m_value(0.0, 0.75, 2.0) == 0.0
    # monotone increasing in nu on [-1, 0]
    nus = np.linspace(-1.0, 0.0, 25)
    vals = im.f_m_value(nus, 0.75, 1.0)
    assert np.all(np.diff(vals) > 0.0)
    assert np.all(vals <= 0.0)


def test_f_subharmonic_on_cylinders():
    for H in (0.75, 1.0 / math.sqrt(2.0), 1.0):
        data = im.induced_data(cat.vertical_cylinder(POINCARE, H),
                               shape=(61, 61))
        for m in (1.0, 2.0):
            prof = im.f_subharmonic(data, m=m, c=-1.0)
            assert prof.subharmonic_ok and prof.bounds_ok
            assert prof.min_laplacian >= -1e-8
            lower = (m / math.sqrt(4 * H * H - 1.0)) * math.asin(-1.0 / (2 * H))
            assert prof.lower_bound == pytest.approx(lower, rel=1e-12)


def test_f_subharmonic_requires_large_H():
    data = im.induced_data(cat.slice_surface(POINCARE), shape=(41, 41))
    with pytest.raises(HypothesisError):
        im.f_subharmonic(data, m=1.0)


# ------------------------------------------------------- file round trip


def test_save_load_round_trip(tmp_path):
    imm = catenoid()
    path = tmp_path / "catenoid.grid"
    im.save_immersion(imm, path, shape=(65, 65))
    back = im.load_immersion(path)
    assert back.kind == "grid"
    data = im.induced_data(back)
    # default tolerance for sampled data is C h^2; the reload must verify
    rep = im.verify_structure(data)
    assert rep.overall_pass
    # component samples survive the text format bitwise
    F1o, F2o, ho = imm.sample((65, 65))
    F1b, F2b, hb = back.sample()
    assert np.array_equal(F1o, F1b) and np.array_equal(hb, ho)
    # derived quantities pick up stencil error, second order in h
    orig = im.induced_data(imm, shape=(65, 65))
    assert np.nanmax(np.abs(data.nu - orig.nu)) < 1e-3


def test_load_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.grid"
    bad.write_text("not a grid file\n")
    with pytest.raises(Exception):
        im.load_immersion(bad)
