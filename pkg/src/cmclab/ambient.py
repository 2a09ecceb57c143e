"""Base surfaces as conformal metrics on planar domains.

A surface ``M`` is described by a single chart with metric
``g = e^{2 phi} (dx^2 + dy^2)``.  The conformal exponent ``phi`` is either
analytic (closed-form jets) or sampled on a grid (centered stencils).
Constant-curvature models use the standard factor

    phi = log 2 - log(1 + kappa0 * (x^2 + y^2)),

which has Gauss curvature exactly ``kappa0``; for ``kappa0 = -1`` this is
the Poincare disk ``phi = log(2 / (1 - x^2 - y^2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, DomainError
from .fields import AnalyticScalar, GridScalar, Jet2


# ------------------------------------------------------------ domains


@dataclass(frozen=True)
class Rectangle:
    """Closed coordinate rectangle [x0, x1] x [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise DomainError("rectangle bounds must satisfy x0 < x1, y0 < y1")

    def contains(self, x, y):
        return ((np.asarray(x) >= self.x0) & (np.asarray(x) <= self.x1)
                & (np.asarray(y) >= self.y0) & (np.asarray(y) <= self.y1))

    def describe(self):
        return f"rect({self.x0:g},{self.x1:g},{self.y0:g},{self.y1:g})"


@dataclass(frozen=True)
class Disk:
    """Open coordinate disk of given center and radius."""

    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("disk radius must be positive")

    def contains(self, x, y):
        dx = np.asarray(x) - self.cx
        dy = np.asarray(y) - self.cy
        return dx * dx + dy * dy < self.radius ** 2

    def describe(self):
        return f"disk({self.cx:g},{self.cy:g},{self.radius:g})"


@dataclass(frozen=True)
class Plane:
    """The whole coordinate plane (unbounded charts)."""

    def contains(self, x, y):
        return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=bool)

    def describe(self):
        return "plane"


Region = Union[Rectangle, Disk, Plane]


def _model_phi(kappa0: float) -> AnalyticScalar:
    """Analytic jet of phi = log 2 - log(1 + kappa0 r^2)."""
    k = float(kappa0)

    def s(x, y):
        return 1.0 + k * (x * x + y * y)

    return AnalyticScalar(
        lambda x, y: np.log(2.0) - np.log(s(x, y)),
        lambda x, y: -2.0 * k * x / s(x, y),
        lambda x, y: -2.0 * k * y / s(x, y),
        lambda x, y: -2.0 * k / s(x, y) + 4.0 * k * k * x * x / s(x, y) ** 2,
        lambda x, y: 4.0 * k * k * x * y / s(x, y) ** 2,
        lambda x, y: -2.0 * k / s(x, y) + 4.0 * k * k * y * y / s(x, y) ** 2,
        label=f"log(2) - log(1 + {k:g}*(x^2+y^2))",
    )


class ConformalChart:
    """A base surface ``M`` with metric ``e^{2 phi}(dx^2 + dy^2)``.

    Parameters
    ----------
    phi : AnalyticScalar or GridScalar
        Conformal exponent with two derivatives.
    domain : Rectangle, Disk or Plane
        Coordinate domain on which the chart is valid.
    model_tag : str
        One of ``flat``, ``hyperbolic``, ``sphere``, ``custom``.
    kappa0 : float, optional
        Constant curvature for model charts; ``None`` for custom charts.
    """

    def __init__(self, phi, domain: Region, model_tag: str = "custom",
                 kappa0: Optional[float] = None, label: str = ""):
        if model_tag not in ("flat", "hyperbolic", "sphere", "custom"):
            raise ConfigError(f"unknown model_tag {model_tag!r}")
        self.phi = phi
        self.domain = domain
        self.model_tag = model_tag
        self.kappa0 = None if kappa0 is None else float(kappa0)
        self.label = label or model_tag

    # ---------------------------------------------------- constructors

    @classmethod
    def flat(cls, domain: Optional[Region] = None) -> "ConformalChart":
        """Euclidean plane, phi identically 0."""
        return cls(AnalyticScalar.constant(0.0), domain or Plane(),
                   model_tag="flat", kappa0=0.0, label="flat")

    @classmethod
    def hyperbolic(cls, kappa0: float = -1.0) -> "ConformalChart":
        """Disk model of the complete surface with curvature kappa0 < 0."""
        if kappa0 >= 0:
            raise DomainError("hyperbolic model needs kappa0 < 0")
        radius = 1.0 / math.sqrt(-kappa0)
        return cls(_model_phi(kappa0), Disk(0.0, 0.0, radius),
                   model_tag="hyperbolic", kappa0=kappa0,
                   label=f"hyperbolic(kappa0={kappa0:g})")

    @classmethod
    def poincare_disk(cls) -> "ConformalChart":
        """The Poincare disk: curvature -1, phi = log(2/(1-x^2-y^2))."""
        return cls.hyperbolic(-1.0)

    @classmethod
    def sphere(cls, kappa0: float = 1.0) -> "ConformalChart":
        """Stereographic-type chart of the sphere with curvature kappa0 > 0."""
        if kappa0 <= 0:
            raise DomainError("sphere model needs kappa0 > 0")
        return cls(_model_phi(kappa0), Plane(), model_tag="sphere",
                   kappa0=kappa0, label=f"sphere(kappa0={kappa0:g})")

    @classmethod
    def constant_curvature(cls, kappa0: float) -> "ConformalChart":
        if kappa0 < 0:
            return cls.hyperbolic(kappa0)
        if kappa0 > 0:
            return cls.sphere(kappa0)
        return cls.flat()

    @classmethod
    def from_expression(cls, text: str,
                        domain: Optional[Region] = None) -> "ConformalChart":
        """Custom chart with phi given as an expression in x and y."""
        return cls(AnalyticScalar.from_expression(text), domain or Plane(),
                   model_tag="custom", label=f"expr:{text}")

    @classmethod
    def from_grid(cls, values, x0: float, y0: float, hx: float, hy: float,
                  label: str = "grid") -> "ConformalChart":
        """Custom chart with phi sampled on a uniform grid."""
        values = np.asarray(values, dtype=float)
        phi = GridScalar(values, x0, y0, hx, hy, label=label)
        nx, ny = values.shape
        domain = Rectangle(x0, x0 + (nx - 1) * hx, y0, y0 + (ny - 1) * hy)
        return cls(phi, domain, model_tag="custom", label=label)

    # ------------------------------------------------------- queries

    def contains(self, x, y):
        return self.domain.contains(x, y)

    def require_inside(self, x, y):
        inside = self.contains(x, y)
        if not np.all(inside):
            raise DomainError(
                f"{int(np.size(inside) - np.count_nonzero(inside))} point(s) "
                f"outside chart domain {self.domain.describe()}")

    def phi_jet(self, x, y) -> Jet2:
        """Jet of the conformal exponent; domain-checked."""
        self.require_inside(x, y)
        return self.phi.jet(x, y)

    def metric_factor(self, x, y):
        """e^{2 phi}: the area density of the metric."""
        self.require_inside(x, y)
        return np.exp(2.0 * self.phi(x, y))

    @property
    def is_analytic(self) -> bool:
        return isinstance(self.phi, AnalyticScalar)

    @property
    def reference(self) -> str:
        """Short parseable description, used in file headers and reports."""
        if self.model_tag == "flat":
            return "flat"
        if self.model_tag == "hyperbolic":
            return f"hyperbolic:{self.kappa0:g}"
        if self.model_tag == "sphere":
            return f"sphere:{self.kappa0:g}"
        if isinstance(self.phi, AnalyticScalar) and self.label.startswith("expr:"):
            return self.label
        return "grid"

    def __repr__(self):
        return f"ConformalChart({self.label}, domain={self.domain.describe()})"


def resolve_chart_reference(text: str) -> ConformalChart:
    """Rebuild a chart from a reference string (see ConformalChart.reference).

    Accepted forms: ``flat``, ``poincare``, ``hyperbolic:<kappa0>``,
    ``sphere:<kappa0>``, ``expr:<expression>``.  Grid charts are not
    reconstructible from a reference and raise ConfigError.
    """
    text = text.strip()
    if text == "flat":
        return ConformalChart.flat()
    if text == "poincare":
        return ConformalChart.poincare_disk()
    if text.startswith("hyperbolic:"):
        return ConformalChart.hyperbolic(float(text.split(":", 1)[1]))
    if text.startswith("sphere:"):
        return ConformalChart.sphere(float(text.split(":", 1)[1]))
    if text.startswith("expr:"):
        return ConformalChart.from_expression(text.split(":", 1)[1])
    raise ConfigError(f"cannot resolve chart reference {text!r}")


def _domain_from_mapping(entry) -> Region:
    kind = entry.get("kind", "rect")
    if kind == "rect":
        return Rectangle(*map(float, entry["bounds"]))
    if kind == "disk":
        cx, cy = entry.get("center", (0.0, 0.0))
        return Disk(float(cx), float(cy), float(entry["radius"]))
    if kind == "plane":
        return Plane()
    raise ConfigError(f"unknown domain kind {kind!r}")


def chart_from_mapping(entry) -> ConformalChart:
    """Build a chart from a config mapping (the [chart] table of a file)."""
    try:
        model = entry["model"]
    except KeyError:
        raise ConfigError("chart config needs a 'model' key") from None
    if model == "flat":
        domain = _domain_from_mapping(entry["domain"]) if "domain" in entry else None
        return ConformalChart.flat(domain)
    if model == "poincare":
        return ConformalChart.poincare_disk()
    if model == "hyperbolic":
        return ConformalChart.hyperbolic(float(entry.get("kappa0", -1.0)))
    if model == "sphere":
        return ConformalChart.sphere(float(entry.get("kappa0", 1.0)))
    if model == "expression":
        domain = _domain_from_mapping(entry["domain"]) if "domain" in entry else None
        try:
            return ConformalChart.from_expression(entry["expression"], domain)
        except KeyError:
            raise ConfigError("expression chart needs an 'expression' key") from None
    if model == "grid":
        try:
            values = np.loadtxt(entry["values_file"], dtype=float)
            x0, y0 = map(float, entry["origin"])
            hx, hy = map(float, entry["spacing"])
        except KeyError as exc:
            raise ConfigError(f"grid chart config missing {exc}") from None
        return ConformalChart.from_grid(values, x0, y0, hx, hy)
    raise ConfigError(f"unknown chart model {model!r}")


def chart_from_config(path) -> ConformalChart:
    """Load a chart from a TOML config file with a [chart] table."""
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"chart config parse error: {exc}") from None
    if "chart" not in data:
        raise ConfigError("config file has no [chart] table")
    return chart_from_mapping(data["chart"])


# ---------------------------------------------------------- curvature


def gauss_curvature(chart: ConformalChart, point):
    """Gauss curvature kappa = -e^{-2 phi} (phi_xx + phi_yy) at a point.

    ``point`` may be a coordinate pair or a pair of arrays; the return
    value matches (scalar for a pair).  Points must be interior to the
    chart domain; grid charts additionally refuse queries within one
    spacing of the sampled boundary.
    """
    x, y = point
    jet = chart.phi_jet(x, y)
    kappa = -np.exp(-2.0 * jet.f) * (jet.fxx + jet.fyy)
    return float(kappa) if np.ndim(kappa) == 0 else kappa


@dataclass
class CurvatureSummary:
    """Sampled curvature field with its observed infimum."""

    kappa_field: np.ndarray
    c_inf: float
    resolution: int
    region: Region
    xs: np.ndarray = field(repr=False, default=None)
    ys: np.ndarray = field(repr=False, default=None)


def curvature_infimum(chart: ConformalChart, region: Region,
                      resolution: int = 101) -> CurvatureSummary:
    """Sampled infimum of the Gauss curvature over a coordinate region.

    The infimum is observed on a resolution x resolution sample grid, not
    proven; the resolution travels with the result.  Disk regions are
    sampled on their bounding box and masked (NaN outside the disk).
    """
    if resolution < 2:
        raise DomainError("curvature_infimum needs resolution >= 2")
    if isinstance(region, Rectangle):
        bx0, bx1, by0, by1 = region.x0, region.x1, region.y0, region.y1
    elif isinstance(region, Disk):
        bx0, bx1 = region.cx - region.radius, region.cx + region.radius
        by0, by1 = region.cy - region.radius, region.cy + region.radius
    else:
        raise DomainError("curvature_infimum needs a bounded region")
    xs = np.linspace(bx0, bx1, resolution)
    ys = np.linspace(by0, by1, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    if isinstance(region, Disk):
        mask = region.contains(X, Y)
        if not mask.any():
            raise DomainError("region contains no sample points")
        kappa = np.full(X.shape, np.nan)
        chart.require_inside(X[mask], Y[mask])
        kappa[mask] = gauss_curvature(chart, (X[mask], Y[mask]))
        c_inf = float(np.nanmin(kappa))
    else:
        chart.require_inside(X, Y)
        kappa = gauss_curvature(chart, (X, Y))
        c_inf = float(np.min(kappa))
    return CurvatureSummary(kappa, c_inf, resolution, region, xs, ys)


# ------------------------------------------------------ ball geometry


@dataclass(frozen=True)
class BallGeometry:
    """Boundary length and volume of a geodesic ball; iterable as a pair."""

    boundary_length: float
    volume: float

    @property
    def ratio(self) -> float:
        """Isoperimetric quotient A(boundary)/V(ball)."""
        return self.boundary_length / self.volume

    def __iter__(self):
        return iter((self.boundary_length, self.volume))


def ball_geometry(kappa0: float, delta: float) -> BallGeometry:
    """Closed-form boundary length and volume of a geodesic ball.

    Parameters
    ----------
    kappa0 : float
        Constant curvature of the model surface (any real value).
    delta : float
        Geodesic radius; for kappa0 > 0 it must stay below the
        injectivity radius pi/sqrt(kappa0).

    Returns
    -------
    BallGeometry
        For kappa0 = -1: (2 pi sinh d, 2 pi (cosh d - 1)); kappa0 = 0:
        (2 pi d, pi d^2); kappa0 = +1: (2 pi sin d, 2 pi (1 - cos d)).
        Other values scale accordingly.
    """
    if not (delta > 0):
        raise DomainError("ball radius must be positive")
    k = float(kappa0)
    if k < 0:
        a = math.sqrt(-k)
        length = 2.0 * math.pi * math.sinh(a * delta) / a
        volume = 2.0 * math.pi * (math.cosh(a * delta) - 1.0) / (a * a)
    elif k == 0:
        length = 2.0 * math.pi * delta
        volume = math.pi * delta * delta
    else:
        b = math.sqrt(k)
        if delta >= math.pi / b:
            raise DomainError(
                f"spherical ball radius {delta:g} exceeds injectivity radius "
                f"{math.pi / b:g}")
        length = 2.0 * math.pi * math.sin(b * delta) / b
        volume = 2.0 * math.pi * (1.0 - math.cos(b * delta)) / k
    return BallGeometry(length, volume)
