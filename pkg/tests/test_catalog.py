"""Model-surface catalog: descriptor checks, classification logic,
constructor guards."""

import math

import numpy as np
import pytest

from cmclab.ambient import ConformalChart
from cmclab.catalog import (MODEL_KINDS, check_descriptor, classify,
                            slice_surface, tilted_plane, vertical_cylinder,
                            vertical_plane)
from cmclab.errors import (CapabilityError, DomainError,
                           UnsupportedCurveError)
from cmclab.immersion import induced_data

FLAT = ConformalChart.flat()
POINCARE = ConformalChart.poincare_disk()


def test_model_kinds_registry():
    assert MODEL_KINDS == ("slice", "vertical_plane", "tilted_plane",
                           "vertical_cylinder")


# ------------------------------------------------- descriptor checks


@pytest.mark.parametrize("imm", [
    slice_surface(POINCARE),
    slice_surface(FLAT, t0=1.25),
    vertical_plane(POINCARE),
    vertical_plane(FLAT),
    tilted_plane(math.pi / 3),
    vertical_cylinder(FLAT, 0.5),
    vertical_cylinder(POINCARE, 0.75),
], ids=lambda im: im.label)
def test_descriptors_verify(imm):
    rep = check_descriptor(imm, shape=(61, 61))
    assert rep.overall_pass, [
        (r.check_id, r.max_residual) for r in rep.records if not r.passed]
    for rec in rep.records:
        assert rec.max_residual < 1e-9


def test_slice_expected_values():
    data = induced_data(slice_surface(POINCARE), shape=(41, 41),
                        convention="nonpositive")
    np.testing.assert_allclose(data.nu, -1.0, atol=1e-12)
    np.testing.assert_allclose(data.H, 0.0, atol=1e-12)
    np.testing.assert_allclose(data.p, 0.0, atol=1e-12)
    # the leaf is intrinsically the base: K(I) = kappa, extrinsic K = 0
    np.testing.assert_allclose(data.K, 0.0, atol=1e-12)
    np.testing.assert_allclose(data.KI, data.kappa, atol=1e-9)


def test_vertical_plane_expected_values():
    data = induced_data(vertical_plane(POINCARE), shape=(41, 41))
    np.testing.assert_allclose(data.nu, 0.0, atol=1e-12)
    np.testing.assert_allclose(data.H, 0.0, atol=1e-12)
    np.testing.assert_allclose(data.lam, 1.0, atol=1e-12)  # arclength strip
    np.testing.assert_allclose(data.KI, 0.0, atol=1e-9)


def test_tilted_plane_constant_angle():
    theta = math.pi / 3
    data = induced_data(tilted_plane(theta), shape=(41, 41),
                        convention="nonpositive")
    nu0 = float(np.mean(data.nu))
    assert abs(nu0) == pytest.approx(math.cos(theta), abs=1e-12)
    assert -1.0 < nu0 < 0.0
    np.testing.assert_allclose(data.H, 0.0, atol=1e-12)


def test_cylinder_expected_values():
    H = 0.75
    data = induced_data(vertical_cylinder(POINCARE, H), shape=(61, 61))
    np.testing.assert_allclose(data.nu, 0.0, atol=1e-12)
    np.testing.assert_allclose(data.H, H, atol=1e-12)
    np.testing.assert_allclose(data.K, 0.0, atol=1e-12)   # flat product line
    np.testing.assert_allclose(data.KI, 0.0, atol=1e-9)
    # Hopf coefficient of the cylinder: p = H/2 up to the vertical phase
    np.testing.assert_allclose(np.abs(data.p), H / 2.0, atol=1e-12)


# --------------------------------------------------------------- guards


def test_cylinder_threshold_guard():
    # curves of geodesic curvature 2H <= sqrt(-c) are not circles
    with pytest.raises(UnsupportedCurveError):
        vertical_cylinder(POINCARE, 0.5)
    with pytest.raises(UnsupportedCurveError):
        vertical_cylinder(POINCARE, 0.4)
    with pytest.raises(UnsupportedCurveError):
        vertical_cylinder(FLAT, 0.0)
    # just above the threshold is fine
    assert vertical_cylinder(POINCARE, 0.500001) is not None


def test_tilted_plane_needs_flat_chart():
    with pytest.raises(CapabilityError):
        tilted_plane(math.pi / 3, POINCARE)


def test_tilted_plane_angle_domain():
    with pytest.raises(DomainError):
        tilted_plane(0.0)            # horizontal: that is a slice
    with pytest.raises(DomainError):
        tilted_plane(-0.3)
    # theta = pi/2 is allowed and degenerates to the vertical plane
    data = induced_data(tilted_plane(math.pi / 2), shape=(21, 21))
    np.testing.assert_allclose(data.nu, 0.0, atol=1e-12)


def test_slice_bounds_shrink_with_curvature():
    # steeper hyperbolic charts keep the sample box inside the disk model
    s1 = slice_surface(ConformalChart.hyperbolic(-1.0))
    s4 = slice_surface(ConformalChart.hyperbolic(-4.0))
    assert s4.u_bounds[1] == pytest.approx(s1.u_bounds[1] / 2.0)


# --------------------------------------------------------- classification


def test_classify_minimal_cases():
    c = classify(0.0, 0.0)
    assert c.kinds == ("slice", "vertical_plane", "tilted_plane")
    assert not c.unclassified
    c = classify(0.0, -1.0)
    assert c.kinds == ("slice", "vertical_plane")


def test_classify_cylinder_and_threshold():
    c = classify(0.75, -1.0)
    assert c.kinds == ("vertical_cylinder",) and not c.unclassified
    # at or below 2H = sqrt(-c) nothing in the list applies
    for H in (0.5, 0.4, 0.1):
        c = classify(H, -1.0)
        assert c.unclassified and c.kinds == ()
        assert "sqrt(-c)/2" in c.note
    # flat and spherical bases have no threshold
    assert classify(0.3, 0.0).kinds == ("vertical_cylinder",)
    assert classify(0.3, 1.0).kinds == ("vertical_cylinder",)


def test_classify_orientation_normalization():
    c = classify(-0.75, -1.0)
    assert c.kinds == ("vertical_cylinder",)
    assert "orientation" in c.note
    assert c.H == 0.75


def test_classify_with_angle_signature():
    assert classify(0.0, 0.0, nu_constant=-1.0).kinds == ("slice",)
    assert classify(0.0, 0.0, nu_constant=0.0).kinds == ("vertical_plane",)
    assert classify(0.0, 0.0, nu_constant=0.5).kinds == ("tilted_plane",)
    assert classify(0.75, -1.0, nu_constant=0.0).kinds == ("vertical_cylinder",)
    # a tilted signature is impossible for the cylinder family
    c = classify(0.75, -1.0, nu_constant=0.5)
    assert c.kinds == ()
    with pytest.raises(DomainError):
        classify(0.0, 0.0, nu_constant=1.5)
