"""Conformally parametrized surfaces in chart x R and their verification.

Given a conformal immersion X = (F, h) of a parameter rectangle into
M x R, this module computes the induced data (lambda, nu, H, p, K, K(I),
h_z, ...) through the orthonormal-frame / Christoffel pipeline and
checks, as numerical residuals, the six structure equations, the
angle-function gradient and Laplacian identities, the holomorphicity of
the quadratic differential Q = 2Hp - c h_z^2, and the subharmonicity of
the comparison functions f_m.

Complex derivatives follow d/dz = (d/du - i d/dv)/2 with z = u + iv.
Derived fields obtained by differencing computed fields are only trusted
one ring further inside the parameter grid; every residual statistic
carries that margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .ambient import ConformalChart, resolve_chart_reference
from .errors import (CapabilityError, ConfigError, DegenerateImmersionError,
                     HypothesisError, NotConformalError)
from .fields import (AnalyticScalar, Jet2, diff_x, diff_xx, diff_y, diff_yy,
                     grid_jet, interior, residual_stats)
from .reporting import CheckRecord, VerificationReport, record_from_stats

DEFAULT_SHAPE = (101, 101)
ANALYTIC_TOL = 1e-9
GRID_TOL_FACTOR = 50.0  # tolerance C*h^2 for second-order sampled surfaces


def _dz(f, du, dv):
    return 0.5 * (diff_x(f, du) - 1j * diff_y(f, dv))


def _dzbar(f, du, dv):
    return 0.5 * (diff_x(f, du) + 1j * diff_y(f, dv))


def _lap0(f, du, dv):
    return diff_xx(f, du) + diff_yy(f, dv)


class ConformalImmersion:
    """A parametrized surface X = (F1, F2, h) over a conformal chart.

    Components are either analytic (AnalyticScalar in the parameters
    (u, v), exact jets) or sampled grids (centered stencils, one ring of
    margin).  An analytic immersion may carry a closed-form jet of
    log(lambda) so the intrinsic curvature K(I) and lambda_z are exact.
    """

    def __init__(self, chart: ConformalChart, kind: str, components,
                 u_bounds, v_bounds, shape=None, log_lambda=None,
                 descriptor=None, label: str = ""):
        if kind not in ("analytic", "grid"):
            raise ValueError(f"unknown immersion kind {kind!r}")
        self.chart = chart
        self.kind = kind
        self.F1, self.F2, self.h = components
        self.u_bounds = (float(u_bounds[0]), float(u_bounds[1]))
        self.v_bounds = (float(v_bounds[0]), float(v_bounds[1]))
        self.shape = tuple(shape) if shape is not None else None
        self.log_lambda = log_lambda
        self.descriptor = descriptor
        self.label = label

    # ------------------------------------------------------ constructors

    @classmethod
    def analytic(cls, chart, F1, F2, h, u_bounds, v_bounds,
                 log_lambda=None, descriptor=None, label=""):
        return cls(chart, "analytic", (F1, F2, h), u_bounds, v_bounds,
                   log_lambda=log_lambda, descriptor=descriptor, label=label)

    @classmethod
    def from_grids(cls, chart, F1, F2, h, u_bounds, v_bounds,
                   descriptor=None, label=""):
        F1 = np.asarray(F1, dtype=float)
        F2 = np.asarray(F2, dtype=float)
        h = np.asarray(h, dtype=float)
        if not (F1.shape == F2.shape == h.shape) or F1.ndim != 2:
            raise ValueError("component grids must share one 2-d shape")
        if min(F1.shape) < 5:
            raise ValueError("grid immersions need at least 5 samples per axis")
        return cls(chart, "grid", (F1, F2, h), u_bounds, v_bounds,
                   shape=F1.shape, descriptor=descriptor, label=label)

    @property
    def is_analytic(self):
        return self.kind == "analytic"

    def grid_shape(self, shape=None):
        if self.kind == "grid":
            return self.shape
        return tuple(shape) if shape is not None else DEFAULT_SHAPE

    def parameter_grid(self, shape=None):
        nu, nv = self.grid_shape(shape)
        us = np.linspace(*self.u_bounds, nu)
        vs = np.linspace(*self.v_bounds, nv)
        du = (self.u_bounds[1] - self.u_bounds[0]) / (nu - 1)
        dv = (self.v_bounds[1] - self.v_bounds[0]) / (nv - 1)
        U, V = np.meshgrid(us, vs, indexing="ij")
        return U, V, du, dv

    def component_jets(self, shape=None):
        """Jets of (F1, F2, h) on the sample grid, plus grid metadata."""
        U, V, du, dv = self.parameter_grid(shape)
        if self.kind == "analytic":
            jets = tuple(c.jet(U, V) for c in (self.F1, self.F2, self.h))
            margin = 0
        else:
            jets = tuple(grid_jet(c, du, dv) for c in (self.F1, self.F2, self.h))
            margin = 1
        return jets, U, V, du, dv, margin

    def translate(self, t0: float) -> "ConformalImmersion":
        """Vertical translation h -> h + t0; all induced data is unchanged."""
        t0 = float(t0)
        if self.kind == "grid":
            return ConformalImmersion(
                self.chart, "grid", (self.F1, self.F2, self.h + t0),
                self.u_bounds, self.v_bounds, shape=self.shape,
                descriptor=self.descriptor, label=self.label)
        h = self.h
        shifted = AnalyticScalar(
            lambda x, y, _f=h: _f(x, y) + t0,
            h._parts[1], h._parts[2], h._parts[3], h._parts[4], h._parts[5],
            label=f"{h.label}+{t0:g}")
        return ConformalImmersion(
            self.chart, "analytic", (self.F1, self.F2, shifted),
            self.u_bounds, self.v_bounds, log_lambda=self.log_lambda,
            descriptor=self.descriptor, label=self.label)

    def sample(self, shape=None):
        """Component values on the parameter grid (no derivatives)."""
        U, V, du, dv = self.parameter_grid(shape)
        if self.kind == "analytic":
            vals = tuple(np.asarray(c(U, V), dtype=float) for c in
                         (self.F1, self.F2, self.h))
        else:
            vals = (self.F1, self.F2, self.h)
        return U, V, vals

    def __repr__(self):
        return (f"ConformalImmersion({self.label or self.kind}, "
                f"chart={self.chart.reference})")


@dataclass
class FundamentalData:
    """Per-sample induced geometry of a conformal immersion.

    Arrays share the parameter-grid shape.  ``margin`` is the ring of
    untrusted samples for the base fields; intrinsic quantities (KI,
    lam_z) may carry one more ring (``margin_intrinsic``) when log-lambda
    had to be differenced.
    """

    lam: np.ndarray
    nu: np.ndarray
    H: np.ndarray
    p: np.ndarray
    K: np.ndarray
    KI: np.ndarray
    h_z: np.ndarray
    kappa: np.ndarray
    T: np.ndarray
    lam_z: np.ndarray
    h_zz: np.ndarray
    h_zzbar: np.ndarray
    conf_residual: np.ndarray
    du: float
    dv: float
    margin: int
    margin_intrinsic: int
    analytic: bool
    convention: str
    chart_reference: str
    shape: tuple

    def stats(self, arr, extra_margin: int = 0):
        return residual_stats(arr, self.margin + extra_margin)

    @property
    def grid_h(self) -> float:
        return max(self.du, self.dv)

    def mean_curvature_constant(self, tol: float = 1e-8) -> float:
        """The constant value of H, or HypothesisError if H is not constant."""
        core = interior(self.H, self.margin)
        h0 = float(np.mean(core))
        if np.max(np.abs(core - h0)) > tol:
            raise HypothesisError(
                f"mean curvature is not constant (spread "
                f"{np.max(np.abs(core - h0)):.3e} about {h0:.6g})")
        return h0

    def hopf_identity_residual(self) -> np.ndarray:
        """4|p|^2 - lam^2 (H^2 - K); vanishes identically."""
        return 4.0 * np.abs(self.p) ** 2 - self.lam ** 2 * (self.H ** 2 - self.K)

    def vertical_decomposition_residual(self) -> np.ndarray:
        """<T,T> + nu^2 - 1 for the splitting of the vertical field."""
        t2 = np.sum(self.T ** 2, axis=0)
        return t2 + self.nu ** 2 - 1.0


def default_tolerance(data: FundamentalData) -> float:
    """Residual tolerance: near machine precision for analytic inputs,
    C*h^2 for second-order sampled inputs."""
    if data.analytic:
        return ANALYTIC_TOL
    return GRID_TOL_FACTOR * data.grid_h ** 2


def induced_data(imm: ConformalImmersion, shape=None, convention: str = "frame",
                 tol_conf: Optional[float] = None,
                 degenerate_tol: float = 1e-12) -> FundamentalData:
    """First and second fundamental forms of an immersion, sampled.

    The normal is the positively oriented frame normal by default;
    ``convention="flipped"`` negates it, ``convention="nonpositive"``
    flips it whenever the mean angle function would be positive
    (normalizing nu <= 0 as in the classification statements).

    Raises DegenerateImmersionError when lambda is not positive and
    NotConformalError when the conformality residual exceeds ``tol_conf``
    (defaults: 1e-8 analytic, 10*h^2 sampled).
    """
    if convention not in ("frame", "flipped", "nonpositive"):
        raise ValueError(f"unknown convention {convention!r}")
    (jF1, jF2, jh), U, V, du, dv, margin = imm.component_jets(shape)
    chart = imm.chart

    pts_x, pts_y = jF1.f, jF2.f
    chart.require_inside(pts_x, pts_y)
    pj = chart.phi.jet(pts_x, pts_y)
    e_phi = np.exp(pj.f)
    e2phi = e_phi ** 2

    # metric coefficients of the pullback
    E = e2phi * (jF1.fx ** 2 + jF2.fx ** 2) + jh.fx ** 2
    G = e2phi * (jF1.fy ** 2 + jF2.fy ** 2) + jh.fy ** 2
    Fuv = e2phi * (jF1.fx * jF1.fy + jF2.fx * jF2.fy) + jh.fx * jh.fy
    lam = 0.5 * (E + G)
    conf_residual = 0.25 * np.sqrt((E - G) ** 2 + 4.0 * Fuv ** 2)

    lam_min = float(np.min(interior(lam, margin)))
    if not np.isfinite(lam_min) or lam_min <= degenerate_tol:
        raise DegenerateImmersionError(
            f"induced factor not positive (min lambda = {lam_min:.3e})")
    if tol_conf is None:
        tol_conf = 1e-8 if imm.is_analytic else 10.0 * max(du, dv) ** 2
    conf_max = float(np.max(interior(conf_residual, margin)))
    if conf_max > tol_conf:
        raise NotConformalError(
            f"conformality residual {conf_max:.3e} exceeds tolerance "
            f"{tol_conf:.3e}")

    # orthonormal ambient frame (e^-phi dx, e^-phi dy, dt): tangent vectors
    a1, a2, a3 = e_phi * jF1.fx, e_phi * jF2.fx, jh.fx
    b1, b2, b3 = e_phi * jF1.fy, e_phi * jF2.fy, jh.fy
    n1 = a2 * b3 - a3 * b2
    n2 = a3 * b1 - a1 * b3
    n3 = a1 * b2 - a2 * b1
    nn = np.sqrt(n1 ** 2 + n2 ** 2 + n3 ** 2)
    N1, N2, N3 = n1 / nn, n2 / nn, n3 / nn

    # covariant second derivatives of the map; the only Christoffel
    # symbols of the product metric live in the conformal base factor.
    px, py = pj.fx, pj.fy

    def cov(fa_1, fb_1, fa_2, fb_2, f1_ab, f2_ab, h_ab):
        gx = f1_ab + px * fa_1 * fb_1 + py * (fa_1 * fb_2 + fa_2 * fb_1) \
            - px * fa_2 * fb_2
        gy = f2_ab - py * fa_1 * fb_1 + px * (fa_1 * fb_2 + fa_2 * fb_1) \
            + py * fa_2 * fb_2
        return e_phi * gx, e_phi * gy, h_ab

    Duu = cov(jF1.fx, jF1.fx, jF2.fx, jF2.fx, jF1.fxx, jF2.fxx, jh.fxx)
    Duv = cov(jF1.fx, jF1.fy, jF2.fx, jF2.fy, jF1.fxy, jF2.fxy, jh.fxy)
    Dvv = cov(jF1.fy, jF1.fy, jF2.fy, jF2.fy, jF1.fyy, jF2.fyy, jh.fyy)

    def form(D):
        return D[0] * N1 + D[1] * N2 + D[2] * N3

    II_uu, II_uv, II_vv = form(Duu), form(Duv), form(Dvv)

    nu = N3
    if convention == "flipped" or (
            convention == "nonpositive"
            and float(np.nanmean(interior(nu, margin))) > 0.0):
        N1, N2, N3 = -N1, -N2, -N3
        nu = N3
        II_uu, II_uv, II_vv = -II_uu, -II_uv, -II_vv

    H = (II_uu + II_vv) / (2.0 * lam)
    p = 0.25 * (II_uu - II_vv) - 0.5j * II_uv
    K = (II_uu * II_vv - II_uv ** 2) / lam ** 2
    kappa = -np.exp(-2.0 * pj.f) * (pj.fxx + pj.fyy)

    h_z = 0.5 * (jh.fx - 1j * jh.fy)
    h_zz = 0.25 * (jh.fxx - jh.fyy) - 0.5j * jh.fxy
    h_zzbar = 0.25 * (jh.fxx + jh.fyy)

    # intrinsic curvature and lambda_z: exact when a log-lambda jet is
    # attached, otherwise one extra differencing ring.
    if imm.is_analytic and imm.log_lambda is not None:
        lj = imm.log_lambda.jet(U, V)
        lam_jet = np.exp(lj.f)
        mismatch = float(np.max(np.abs(lam_jet - lam)))
        if mismatch > 1e-7 * max(1.0, float(np.max(np.abs(lam)))):
            raise ConfigError(
                f"attached log-lambda jet disagrees with the induced factor "
                f"(max |diff| = {mismatch:.3e})")
        KI = -(lj.fxx + lj.fyy) / (2.0 * lam)
        lam_z = lam * 0.5 * (lj.fx - 1j * lj.fy)
        margin_intrinsic = margin
    else:
        log_lam = np.log(lam)
        KI = -_lap0(log_lam, du, dv) / (2.0 * lam)
        lam_z = _dz(lam, du, dv)
        margin_intrinsic = margin + 1

    T = np.stack([-nu * N1, -nu * N2, 1.0 - nu * N3])

    return FundamentalData(
        lam=lam, nu=nu, H=H, p=p, K=K, KI=KI, h_z=h_z, kappa=kappa, T=T,
        lam_z=lam_z, h_zz=h_zz, h_zzbar=h_zzbar, conf_residual=conf_residual,
        du=du, dv=dv, margin=margin, margin_intrinsic=margin_intrinsic,
        analytic=imm.is_analytic, convention=convention,
        chart_reference=chart.reference, shape=lam.shape)


def flip_normal(data: FundamentalData) -> FundamentalData:
    """Reverse the unit normal: (nu, H, p) negate; K, KI, T unchanged."""
    return replace(
        data, nu=-data.nu, H=-data.H, p=-data.p, T=data.T.copy(),
        convention={"frame": "flipped", "flipped": "frame"}.get(
            data.convention, "flipped"))


# ----------------------------------------------------- structure equations


def _structure_residuals(data: FundamentalData):
    """The six structure-equation residual fields with their margins."""
    lam, nu, H, p = data.lam, data.nu, data.H, data.p
    h_z = data.h_z
    du, dv = data.du, data.dv

    nu_z = _dz(nu, du, dv)
    p_zbar = _dzbar(p, du, dv)
    H_z = _dz(H, du, dv)

    m, mi = data.margin, data.margin_intrinsic
    # NaN borders on sampled data are intentional; complex division by
    # them trips the invalid flag even though the result is a quiet NaN.
    with np.errstate(invalid="ignore", divide="ignore"):
        return [
            ("eq2_intrinsic_gauss",
             data.KI - (data.K + data.kappa * nu ** 2), mi),
            ("eq3_height_gradient",
             np.abs(h_z) ** 2 - 0.25 * lam * (1.0 - nu ** 2), m),
            ("eq4_height_hopf",
             data.h_zz - ((data.lam_z / lam) * h_z + p * nu), max(m, mi)),
            ("eq5_height_laplacian",
             data.h_zzbar - 0.5 * lam * H * nu, m),
            ("eq6_angle_gradient",
             nu_z + H * h_z + (2.0 / lam) * p * np.conj(h_z), m + 1),
            ("eq7_codazzi",
             p_zbar - 0.5 * lam * (H_z + data.kappa * nu * h_z), m + 1),
        ]


def verify_structure(data: FundamentalData,
                     tol: Optional[float] = None) -> VerificationReport:
    """Residual report for the six structure equations of the immersion.

    Each record carries max and RMS of |residual| over the trusted
    interior.  Default tolerance: 1e-9 for analytic data, C*h^2 for
    sampled data.
    """
    if tol is None:
        tol = default_tolerance(data)
    report = VerificationReport(
        name="structure-equations",
        provenance={"chart": data.chart_reference,
                    "shape": list(data.shape),
                    "convention": data.convention})
    params = {"analytic": data.analytic, "h": data.grid_h}
    for check_id, res, margin in _structure_residuals(data):
        mx, rms = residual_stats(np.abs(res), margin)
        report.add(record_from_stats(check_id, "verify_structure", params,
                                     mx, rms, tol))
    return report


# ------------------------------------------------ quadratic differential


@dataclass
class QField:
    """The quadratic-differential coefficient Q = 2Hp - c h_z^2."""

    values: np.ndarray
    c: float
    Q_zbar: np.ndarray
    holo_max: float
    holo_rms: float
    margin: int
    constant_H: bool
    kappa_matches_c: bool


def ar_differential(data: FundamentalData, c: float) -> QField:
    """Q per sample plus its anti-holomorphicity residual |Q_zbar|.

    The residual is a meaningful holomorphicity check when H is constant
    and the base curvature equals c on the projection; both conditions
    are reported as flags, and the residual is reported regardless.
    """
    c = float(c)
    Q = 2.0 * data.H * data.p - c * data.h_z ** 2
    Q_zbar = _dzbar(Q, data.du, data.dv)
    holo_max, holo_rms = residual_stats(np.abs(Q_zbar), data.margin + 1)
    core_H = interior(data.H, data.margin)
    core_k = interior(data.kappa, data.margin)
    constant_H = bool(np.max(np.abs(core_H - np.mean(core_H))) < 1e-8)
    kappa_matches = bool(np.max(np.abs(core_k - c)) < 1e-8)
    return QField(values=Q, c=c, Q_zbar=Q_zbar, holo_max=holo_max,
                  holo_rms=holo_rms, margin=data.margin + 1,
                  constant_H=constant_H, kappa_matches_c=kappa_matches)


# ------------------------------------------- angle-function identities


def _jacobi_coefficient(data: FundamentalData) -> np.ndarray:
    """4H^2 + kappa(1 - nu^2) - 2K, the zeroth-order Jacobi coefficient.

    Shared by the angle-function Laplacian identity and the Jacobi
    residual so the two produce bitwise-identical values.
    """
    return 4.0 * data.H ** 2 + data.kappa * (1.0 - data.nu ** 2) - 2.0 * data.K


def _angle_laplacian(data: FundamentalData) -> np.ndarray:
    """Intrinsic Laplacian of nu: (4/lam) d2(nu)/dz dzbar = lap0(nu)/lam."""
    return _lap0(data.nu, data.du, data.dv) / data.lam


def _jacobi_residual_field(data: FundamentalData) -> np.ndarray:
    return _angle_laplacian(data) + _jacobi_coefficient(data) * data.nu


def nu_gradient_identity(data: FundamentalData, c: float,
                         q: Optional[QField] = None,
                         tol: Optional[float] = None) -> VerificationReport:
    """Residual of the closed form for ||grad nu||^2 (requires c != 0).

    ||grad nu||^2 = (4/lam)|nu_z|^2 is compared against
    (c/4)(4H^2 + c(1-nu^2) - 2K)^2 - c(K^2 + 4|Q|^2/lam^2).
    """
    c = float(c)
    if c == 0.0:
        raise HypothesisError("the gradient identity requires c != 0")
    data.mean_curvature_constant()
    if q is None:
        q = ar_differential(data, c)
    elif q.c != c:
        raise HypothesisError(f"Q field was built with c={q.c:g}, not {c:g}")
    nu_z = _dz(data.nu, data.du, data.dv)
    grad2 = (4.0 / data.lam) * np.abs(nu_z) ** 2
    bracket = 4.0 * data.H ** 2 + c * (1.0 - data.nu ** 2) - 2.0 * data.K
    rhs = 0.25 * c * bracket ** 2 \
        - c * (data.K ** 2 + 4.0 * np.abs(q.values) ** 2 / data.lam ** 2)
    res = grad2 - rhs
    if tol is None:
        tol = default_tolerance(data)
    mx, rms = residual_stats(np.abs(res), data.margin + 1)
    report = VerificationReport(
        name="angle-gradient-identity",
        provenance={"chart": data.chart_reference, "shape": list(data.shape)})
    report.add(record_from_stats(
        "eq8_angle_gradient_norm", "nu_gradient_identity",
        {"c": c, "analytic": data.analytic}, mx, rms, tol,
        values={"holo_max": q.holo_max}))
    return report


def nu_laplacian_identity(data: FundamentalData,
                          tol: Optional[float] = None) -> VerificationReport:
    """Residual of the angle-function Laplacian identity
    Delta nu + (4H^2 + kappa(1-nu^2) - 2K) nu = 0."""
    res = _jacobi_residual_field(data)
    if tol is None:
        tol = default_tolerance(data)
    mx, rms = residual_stats(np.abs(res), data.margin + 1)
    report = VerificationReport(
        name="angle-laplacian-identity",
        provenance={"chart": data.chart_reference, "shape": list(data.shape)})
    report.add(record_from_stats(
        "eq9_angle_laplacian", "nu_laplacian_identity",
        {"analytic": data.analytic}, mx, rms, tol))
    return report


def jacobi_residual(data: FundamentalData,
                    tol: Optional[float] = None) -> VerificationReport:
    """Residual of the Jacobi equation J(nu) = Delta nu + (|A|^2 + Ric(N)) nu.

    |A|^2 + Ric(N) = (4H^2 - 2K) + kappa(1 - nu^2) is the same zeroth-order
    coefficient as in the Laplacian identity; both operations evaluate one
    shared kernel, so their residual fields coincide exactly.
    """
    res = _jacobi_residual_field(data)
    if tol is None:
        tol = default_tolerance(data)
    mx, rms = residual_stats(np.abs(res), data.margin + 1)
    A2 = 4.0 * data.H ** 2 - 2.0 * data.K
    ric = data.kappa * (1.0 - data.nu ** 2)
    m = data.margin
    report = VerificationReport(
        name="jacobi-equation",
        provenance={"chart": data.chart_reference, "shape": list(data.shape)})
    report.add(record_from_stats(
        "jacobi_equation", "jacobi_residual",
        {"analytic": data.analytic}, mx, rms, tol,
        values={"A2_mean": float(np.mean(interior(A2, m))),
                "ric_mean": float(np.mean(interior(ric, m)))}))
    return report


def jacobi_residual_field(data: FundamentalData) -> np.ndarray:
    """The raw Jacobi residual field (for exact-equality comparisons)."""
    return _jacobi_residual_field(data)


def nu_laplacian_residual_field(data: FundamentalData) -> np.ndarray:
    """The raw Laplacian-identity residual field; identical to the Jacobi one."""
    return _jacobi_residual_field(data)


# --------------------------------------------------- subharmonic profile


@dataclass
class SubharmonicProfile:
    """f_m(nu) with its Laplacian, bounds and subharmonicity flags."""

    m: float
    H: float
    f: np.ndarray
    lap_f: np.ndarray
    min_laplacian: float
    lower_bound: float
    bounds_ok: bool
    subharmonic_ok: bool
    margin: int


def f_m_value(nu, H: float, m: float):
    """The comparison function f_m(nu) = (m/sqrt(4H^2-1)) asin(nu/sqrt(4H^2-1+nu^2)).

    The statement's radicand 4H^2 - (1 - nu^2) equals 4H^2 - 1 + nu^2;
    the latter grouping is used here.
    """
    root = math.sqrt(4.0 * H * H - 1.0)
    return (m / root) * np.arcsin(nu / np.sqrt(4.0 * H * H - 1.0 + nu ** 2))


def f_subharmonic(data: FundamentalData, m: float, c: float = -1.0,
                  tol: float = 1e-8) -> SubharmonicProfile:
    """Evaluate f_m(nu) and check its subharmonicity on the samples.

    Hypotheses enforced: c = -1 normalization, constant H > 1/2,
    nu <= 0 at every trusted sample, kappa >= -1 on the projection.
    """
    if m <= 0:
        raise HypothesisError("m must be positive")
    if c != -1.0:
        raise HypothesisError(
            "the subharmonicity statement is normalized to c = -1")
    H = data.mean_curvature_constant()
    if not H > 0.5:
        raise HypothesisError(f"requires H > 1/2, got H = {H:.6g}")
    core_nu = interior(data.nu, data.margin)
    if float(np.max(core_nu)) > 1e-12:
        raise HypothesisError(
            f"angle function has a positive sample "
            f"(max nu = {float(np.max(core_nu)):.3e}); normalize nu <= 0")
    core_kappa = interior(data.kappa, data.margin)
    if float(np.min(core_kappa)) < -1.0 - 1e-9:
        raise HypothesisError(
            f"base curvature dips below -1 "
            f"(min kappa = {float(np.min(core_kappa)):.6g})")

    f = f_m_value(data.nu, H, m)
    lap_f = _lap0(f, data.du, data.dv) / data.lam
    min_lap = float(np.min(interior(lap_f, data.margin + 1)))
    lower = (m / math.sqrt(4.0 * H * H - 1.0)) * math.asin(-1.0 / (2.0 * H))
    fmax = float(np.max(interior(f, data.margin)))
    fmin = float(np.min(interior(f, data.margin)))
    bounds_ok = (fmin >= lower - 1e-12) and (fmax <= 1e-12)
    return SubharmonicProfile(
        m=float(m), H=H, f=f, lap_f=lap_f, min_laplacian=min_lap,
        lower_bound=lower, bounds_ok=bounds_ok,
        subharmonic_ok=bool(min_lap >= -tol), margin=data.margin + 1)


# ------------------------------------------------------------ file format

_GRID_MAGIC = "# cmclab immersion grid v1"


def save_immersion(imm: ConformalImmersion, path, shape=None) -> str:
    """Write an immersion as a plain-text grid file.

    Header: chart reference, parameter bounds, grid shape; body: rows of
    (u, v, F1, F2, h) in u-major order at 17 significant digits.
    """
    U, V, (F1, F2, h) = imm.sample(shape)
    nu, nv = U.shape
    rows = np.column_stack([U.ravel(), V.ravel(), np.asarray(F1).ravel(),
                            np.asarray(F2).ravel(), np.asarray(h).ravel()])
    header = "\n".join([
        _GRID_MAGIC.lstrip("# "),
        f"chart: {imm.chart.reference}",
        f"bounds: {imm.u_bounds[0]:.17g} {imm.u_bounds[1]:.17g} "
        f"{imm.v_bounds[0]:.17g} {imm.v_bounds[1]:.17g}",
        f"shape: {nu} {nv}",
        "columns: u v F1 F2 h",
    ])
    np.savetxt(path, rows, fmt="%.17g", header=header)
    return str(path)


def load_immersion(path, chart: Optional[ConformalChart] = None
                   ) -> ConformalImmersion:
    """Read a grid file back as a (sampled) immersion.

    The chart is rebuilt from the header reference unless one is passed
    explicitly (required for grid-backed charts, which have no
    resolvable reference).
    """
    meta = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            text = line.lstrip("#").strip()
            if ":" in text:
                key, value = text.split(":", 1)
                meta[key.strip()] = value.strip()
    try:
        u0, u1, v0, v1 = map(float, meta["bounds"].split())
        nu, nv = map(int, meta["shape"].split())
        chart_ref = meta["chart"]
    except KeyError as exc:
        raise ConfigError(f"immersion grid file missing header field {exc}") \
            from None
    if chart is None:
        chart = resolve_chart_reference(chart_ref)
    data = np.loadtxt(path)
    if data.shape != (nu * nv, 5):
        raise ConfigError(
            f"grid file body has shape {data.shape}, expected ({nu * nv}, 5)")
    F1 = data[:, 2].reshape(nu, nv)
    F2 = data[:, 3].reshape(nu, nv)
    h = data[:, 4].reshape(nu, nv)
    return ConformalImmersion.from_grids(chart, F1, F2, h, (u0, u1), (v0, v1),
                                         label=f"loaded:{path}")
