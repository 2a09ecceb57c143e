"""Model surfaces: slices, vertical/tilted planes, vertical cylinders.

Each constructor returns an analytic ConformalImmersion carrying a
ModelDescriptor with the expected invariant values (nu, H, p, K), plus a
closed-form log-lambda jet so intrinsic quantities are exact.  classify()
maps an (H, c) pair — optionally with a constant angle-function value —
to the set of model kinds the classification statements permit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ambient import ConformalChart
from .errors import CapabilityError, DomainError, UnsupportedCurveError
from .fields import AnalyticScalar, interior
from .immersion import ConformalImmersion, induced_data
from .reporting import CheckRecord, VerificationReport

MODEL_KINDS = ("slice", "vertical_plane", "tilted_plane", "vertical_cylinder")


@dataclass
class ModelDescriptor:
    """Declared invariants of a catalog surface."""

    kind: str
    parameters: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    convention: str = "frame"
    notes: str = ""


def _const(c: float) -> AnalyticScalar:
    return AnalyticScalar.constant(c)


def _zero():
    return lambda x, y: 0.0


def _linear_u() -> AnalyticScalar:
    return AnalyticScalar(lambda x, y: x, lambda x, y: 1.0, _zero(),
                          _zero(), _zero(), _zero(), label="u")


def _linear_v() -> AnalyticScalar:
    return AnalyticScalar(lambda x, y: y, _zero(), lambda x, y: 1.0,
                          _zero(), _zero(), _zero(), label="v")


def _scaled_v(c: float) -> AnalyticScalar:
    return AnalyticScalar(lambda x, y: c * y, _zero(), lambda x, y: c,
                          _zero(), _zero(), _zero(), label=f"{c:g}*v")


def _scale_scalar(scalar: AnalyticScalar, factor: float,
                  label: str = "") -> AnalyticScalar:
    parts = [lambda x, y, p=p: factor * np.asarray(p(x, y))
             for p in scalar._parts]
    return AnalyticScalar(*parts, label=label or f"{factor:g}*{scalar.label}")


def slice_surface(chart: ConformalChart, t0: float = 0.0,
                  bounds=None) -> ConformalImmersion:
    """The horizontal leaf chart x {t0}: F = identity, h constant.

    Expected (nonpositive normalization): nu = -1, H = 0, p = 0, K = 0,
    and intrinsic curvature equal to the chart curvature.
    """
    if bounds is None:
        if chart.model_tag == "hyperbolic":
            half = 0.6 / math.sqrt(-chart.kappa0)
        else:
            half = 1.0
        bounds = (-half, half)
    if not isinstance(chart.phi, AnalyticScalar):
        raise CapabilityError("slice over a grid chart is not analytic; "
                              "sample it explicitly instead")
    descriptor = ModelDescriptor(
        kind="slice",
        parameters={"t0": float(t0), "chart": chart.reference},
        expected={"nu": -1.0, "H": 0.0, "p": 0.0 + 0.0j, "K": 0.0,
                  "lam_is_metric": True},
        convention="nonpositive",
        notes="horizontal leaf; K(I) equals the base curvature")
    return ConformalImmersion.analytic(
        chart, _linear_u(), _linear_v(), _const(float(t0)),
        bounds, bounds,
        log_lambda=_scale_scalar(chart.phi, 2.0, label="2*phi"),
        descriptor=descriptor, label=f"slice(t0={t0:g})")


def vertical_plane(chart: ConformalChart, bounds=((-2.0, 2.0), (-2.0, 2.0))
                   ) -> ConformalImmersion:
    """Geodesic x R over a built-in geodesic through the chart origin.

    Supported charts: flat (a straight line) and hyperbolic (a diameter,
    parametrized by arclength).  Expected: lambda = 1, nu = 0, H = 0,
    p = 0, K = 0.
    """
    if chart.model_tag == "flat":
        F1 = _linear_u()
    elif chart.model_tag == "hyperbolic":
        a = math.sqrt(-chart.kappa0)

        def f(x, y):
            return np.tanh(0.5 * a * x) / a

        def fx(x, y):
            return 0.5 / np.cosh(0.5 * a * x) ** 2

        def fxx(x, y):
            c = np.cosh(0.5 * a * x)
            return -0.5 * a * np.tanh(0.5 * a * x) / c ** 2

        F1 = AnalyticScalar(f, fx, _zero(), fxx, _zero(), _zero(),
                            label="tanh(a*u/2)/a")
    else:
        raise CapabilityError(
            f"no built-in geodesic for chart model {chart.model_tag!r}")
    descriptor = ModelDescriptor(
        kind="vertical_plane",
        parameters={"chart": chart.reference},
        expected={"nu": 0.0, "H": 0.0, "p": 0.0 + 0.0j, "K": 0.0, "lam": 1.0},
        convention="frame",
        notes="arclength-by-height parametrization of geodesic x R")
    return ConformalImmersion.analytic(
        chart, F1, _const(0.0), _linear_v(), bounds[0], bounds[1],
        log_lambda=_const(0.0), descriptor=descriptor,
        label="vertical_plane")


def tilted_plane(theta: float, chart: Optional[ConformalChart] = None,
                 bounds=((-2.0, 2.0), (-2.0, 2.0))) -> ConformalImmersion:
    """The affine plane X(u, v) = (u, v cos(theta), v sin(theta)) in R2 x R.

    theta in (0, pi/2]; theta = pi/2 reproduces the flat vertical plane.
    Expected: constant nu = cos(theta), H = 0, p = 0, K = 0, lambda = 1.
    """
    if chart is None:
        chart = ConformalChart.flat()
    if chart.model_tag != "flat":
        raise CapabilityError("tilted planes exist only over the flat chart")
    if not (0.0 < theta <= 0.5 * math.pi):
        raise DomainError("tilt angle must lie in (0, pi/2]")
    descriptor = ModelDescriptor(
        kind="tilted_plane",
        parameters={"theta": float(theta), "chart": chart.reference},
        expected={"nu": math.cos(theta), "H": 0.0, "p": 0.0 + 0.0j,
                  "K": 0.0, "lam": 1.0},
        convention="frame",
        notes="4|h_z|^2 = sin^2(theta) = lambda (1 - nu^2)")
    return ConformalImmersion.analytic(
        chart, _linear_u(), _scaled_v(math.cos(theta)),
        _scaled_v(math.sin(theta)), bounds[0], bounds[1],
        log_lambda=_const(0.0), descriptor=descriptor,
        label=f"tilted_plane(theta={theta:g})")


def vertical_cylinder(chart: ConformalChart, H: float,
                      bounds=((-3.0, 3.0), (-3.0, 3.0))
                      ) -> ConformalImmersion:
    """Curve-of-constant-geodesic-curvature-2H x R, by arclength and height.

    Flat chart: a circle of radius 1/(2|H|), H != 0.  Hyperbolic chart
    with curvature -a^2: a circle of geodesic radius rho with
    a*coth(a*rho) = 2|H|, which exists only for 2|H| > a (horocycles and
    equidistants are not provided).  Expected: lambda = 1, nu = 0,
    p = H/2, K = 0.
    """
    H = float(H)
    if chart.model_tag == "flat":
        if H == 0.0:
            raise UnsupportedCurveError(
                "H = 0 gives a geodesic; use vertical_plane")
        r_c = 1.0 / (2.0 * abs(H))
        speed = 1.0 / r_c
        radius_note = {"euclidean_radius": r_c}
    elif chart.model_tag == "hyperbolic":
        a = math.sqrt(-chart.kappa0)
        if 2.0 * abs(H) <= a:
            raise UnsupportedCurveError(
                f"no circle of geodesic curvature {2 * abs(H):g} in curvature "
                f"{chart.kappa0:g} (needs 2|H| > {a:g}; horocycle and "
                f"equidistant cases are out of scope)")
        rho = math.atanh(a / (2.0 * abs(H))) / a
        r_c = math.tanh(0.5 * a * rho) / a
        speed = a / math.sinh(a * rho)
        radius_note = {"geodesic_radius": rho, "coordinate_radius": r_c}
    else:
        raise CapabilityError(
            "cylinders are built over flat or hyperbolic charts only")
    w = -math.copysign(speed, H)

    def mk(fn, dfn, d2fn):
        return AnalyticScalar(
            lambda x, y: r_c * fn(w * x),
            lambda x, y: r_c * w * dfn(w * x),
            _zero(),
            lambda x, y: r_c * w * w * d2fn(w * x),
            _zero(), _zero())

    F1 = mk(np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))
    F2 = mk(np.sin, np.cos, lambda t: -np.sin(t))
    descriptor = ModelDescriptor(
        kind="vertical_cylinder",
        parameters={"H": H, "chart": chart.reference, **radius_note},
        expected={"nu": 0.0, "H": H, "p": 0.5 * H + 0.0j, "K": 0.0,
                  "lam": 1.0},
        convention="frame",
        notes="parametrized on the universal cover; the arclength "
              f"parameter wraps with period {2 * math.pi / speed:.12g}")
    return ConformalImmersion.analytic(
        chart, F1, F2, _linear_v(), bounds[0], bounds[1],
        log_lambda=_const(0.0), descriptor=descriptor,
        label=f"vertical_cylinder(H={H:g})")


def check_descriptor(imm: ConformalImmersion, shape=(101, 101),
                     tol: float = 1e-9) -> VerificationReport:
    """Compare induced data against the declared descriptor values."""
    if imm.descriptor is None:
        raise CapabilityError("immersion carries no descriptor")
    desc = imm.descriptor
    data = induced_data(imm, shape=shape, convention=desc.convention)
    report = VerificationReport(
        name=f"descriptor:{desc.kind}",
        provenance={"chart": data.chart_reference, "shape": list(data.shape),
                    "kind": desc.kind})
    fields = {"nu": data.nu, "H": data.H, "p": data.p, "K": data.K,
              "lam": data.lam}
    for key, expected in desc.expected.items():
        if key not in fields:
            continue
        dev = np.abs(interior(fields[key], data.margin) - expected)
        report.add(CheckRecord(
            check_id=f"{desc.kind}.{key}", operation="check_descriptor",
            parameters={"expected": expected},
            max_residual=float(np.max(dev)),
            rms_residual=float(np.sqrt(np.mean(dev ** 2))),
            tolerance=tol, passed=bool(np.max(dev) <= tol)))
    return report


# ------------------------------------------------------- classification


@dataclass(frozen=True)
class Classification:
    """Model kinds permitted for a complete surface with the given (H, c)."""

    kinds: tuple
    unclassified: bool
    note: str
    H: float
    c: float


def classify(H: float, c: float,
             nu_constant: Optional[float] = None) -> Classification:
    """Which model surfaces the classification statements permit.

    H=0: slice or vertical plane over any base, plus the tilted plane
    over the flat one.  (H>0, c>=0) and (c<0, H > sqrt(-c)/2): vertical
    cylinder of geodesic curvature 2H.  (c<0, 0 < H <= sqrt(-c)/2):
    outside the hypotheses.  Negative H is normalized by reversing
    orientation.  A declared constant angle-function value, when given,
    filters the permitted kinds by their constant-nu signature.
    """
    H = float(H)
    c = float(c)
    note_parts = []
    if H < 0:
        H = -H
        note_parts.append("orientation flipped to make H >= 0")

    if H == 0.0 and c == 0.0:
        kinds = ("slice", "vertical_plane", "tilted_plane")
        note_parts.append("tilted planes occur only over the flat base")
    elif H == 0.0:
        kinds = ("slice", "vertical_plane")
    elif c >= 0:
        kinds = ("vertical_cylinder",)
    elif H > 0.5 * math.sqrt(-c):
        kinds = ("vertical_cylinder",)
    else:
        kinds = ()
        note_parts.append(
            f"H = {H:g} does not exceed sqrt(-c)/2 = {0.5 * math.sqrt(-c):g}; "
            "outside the classification hypotheses (entire graphs exist at "
            "the threshold)")

    if nu_constant is not None and kinds:
        nu0 = float(nu_constant)
        if abs(nu0) > 1.0 + 1e-12:
            raise DomainError("constant angle-function value must lie in [-1, 1]")

        def admits(kind):
            if kind == "slice":
                return abs(abs(nu0) - 1.0) <= 1e-12
            if kind in ("vertical_plane", "vertical_cylinder"):
                return abs(nu0) <= 1e-12
            return 1e-12 < abs(nu0) < 1.0 - 1e-12  # tilted_plane
        kinds = tuple(k for k in kinds if admits(k))
        if not kinds:
            note_parts.append(
                f"no permitted model has constant angle function {nu0:g}")

    return Classification(kinds=kinds, unclassified=not kinds,
                          note="; ".join(note_parts), H=H, c=c)
