"""Dirichlet spectra of geodesic balls and the cylinder stability operator.

Two independent discretizations are provided for the ball problem — a
radial shooting method (fast, high accuracy) and a 2D polar finite-volume
eigensolve (slower, used as a cross-check) — plus Cheeger-constant
bookkeeping for ball families and the flat stability operator
Delta + (4H^2 + kappa0) on rectangles, whose Dirichlet spectrum decides
instability of bounded pieces of vertical cylinders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .ambient import ball_geometry
from .errors import DomainError, NoInstabilityError, SearchError

_J01 = 2.404825557695773  # first zero of the Bessel function J0


@dataclass
class SpectrumResult:
    """Eigenvalue output with an honest discretization error estimate."""

    lambda1: float
    lambda2: Optional[float]
    eigenfunction: np.ndarray
    iterations: int
    discretization_error_estimate: float
    method: str = ""


@dataclass
class SpectralProblem:
    """Dispatchable description of a supported eigenproblem.

    kind = "ball": Dirichlet ball of geodesic radius ``delta`` in the
    curvature-``kappa0`` model.  kind = "stability": operator
    Delta + (4H^2 + kappa0) on the flat rectangle (0, L) x (-r, r).
    """

    kind: str
    kappa0: float = -1.0
    delta: Optional[float] = None
    H: Optional[float] = None
    L: Optional[float] = None
    r: Optional[float] = None
    resolution: int = 0


def solve_spectral(problem: SpectralProblem) -> SpectrumResult:
    if problem.kind == "ball":
        if problem.delta is None:
            raise DomainError("ball problems need a radius delta")
        n = problem.resolution or 2048
        return dirichlet_lambda1_ball(problem.kappa0, problem.delta, n)
    if problem.kind == "stability":
        if None in (problem.H, problem.L, problem.r):
            raise DomainError("stability problems need H, L and r")
        n = problem.resolution or 101
        return stability_spectrum(problem.H, problem.kappa0,
                                  problem.L, problem.r, n)
    raise DomainError(f"unknown spectral problem kind {problem.kind!r}")


# ------------------------------------------------------------ ball spectrum


def _sn_pair(kappa0: float):
    """(sn, sn') for the constant-curvature radial metric dr^2 + sn^2 dt^2."""
    if kappa0 < 0:
        a = math.sqrt(-kappa0)
        return (lambda r: math.sinh(a * r) / a,
                lambda r: math.cosh(a * r))
    if kappa0 > 0:
        b = math.sqrt(kappa0)
        return (lambda r: math.sin(b * r) / b,
                lambda r: math.cos(b * r))
    return (lambda r: r, lambda r: 1.0)


def _shoot(kappa0: float, delta: float, lam: float, n: int, m: int) -> float:
    """f(delta) for the radial mode f'' + (sn'/sn) f' + (lam - m^2/sn^2) f = 0.

    Integrates the regularized system f' = g/sn, g' = (m^2/sn - lam*sn) f
    with RK4 from a series start at r0 = 10 h; g = sn f' vanishes fast
    enough at the origin that no singularity is met.
    """
    sn, _ = _sn_pair(kappa0)
    h = delta / n
    r0 = min(10.0 * h, 0.1 * delta)
    k = kappa0
    if m == 0:
        c2 = -lam / 4.0
        c4 = lam * lam / 64.0 - lam * k / 96.0
        f = 1.0 + c2 * r0 ** 2 + c4 * r0 ** 4
        g = 2.0 * c2 * r0 ** 2 + (4.0 * c4 - c2 * k / 3.0) * r0 ** 4
    elif m == 1:
        c3 = k / 12.0 - lam / 8.0
        f = r0 + c3 * r0 ** 3
        g = r0 + (3.0 * c3 - k / 6.0) * r0 ** 3
    else:
        raise DomainError("only azimuthal orders m = 0, 1 are implemented")

    steps = n
    hh = (delta - r0) / steps
    m2 = float(m * m)

    def rhs(r, f, g):
        s = sn(r)
        return g / s, (m2 / s - lam * s) * f

    r = r0
    for _ in range(steps):
        k1f, k1g = rhs(r, f, g)
        k2f, k2g = rhs(r + 0.5 * hh, f + 0.5 * hh * k1f, g + 0.5 * hh * k1g)
        k3f, k3g = rhs(r + 0.5 * hh, f + 0.5 * hh * k2f, g + 0.5 * hh * k2g)
        k4f, k4g = rhs(r + hh, f + hh * k3f, g + hh * k3g)
        f += hh * (k1f + 2.0 * k2f + 2.0 * k3f + k4f) / 6.0
        g += hh * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0
        r += hh
    return f


def _shoot_profile(kappa0: float, delta: float, lam: float, n: int):
    """Radial profile (r, f) of the m = 0 mode at a fixed lam."""
    sn, _ = _sn_pair(kappa0)
    h = delta / n
    r0 = min(10.0 * h, 0.1 * delta)
    c2 = -lam / 4.0
    c4 = lam * lam / 64.0 - lam * kappa0 / 96.0
    f = 1.0 + c2 * r0 ** 2 + c4 * r0 ** 4
    g = 2.0 * c2 * r0 ** 2 + (4.0 * c4 - c2 * kappa0 / 3.0) * r0 ** 4
    hh = (delta - r0) / n
    rs = [0.0, r0]
    fs = [1.0, f]

    def rhs(r, f, g):
        s = sn(r)
        return g / s, -lam * s * f

    r = r0
    for _ in range(n):
        k1f, k1g = rhs(r, f, g)
        k2f, k2g = rhs(r + 0.5 * hh, f + 0.5 * hh * k1f, g + 0.5 * hh * k1g)
        k3f, k3g = rhs(r + 0.5 * hh, f + 0.5 * hh * k2f, g + 0.5 * hh * k2g)
        k4f, k4g = rhs(r + hh, f + hh * k3f, g + hh * k3g)
        f += hh * (k1f + 2.0 * k2f + 2.0 * k3f + k4f) / 6.0
        g += hh * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0
        r += hh
        rs.append(r)
        fs.append(f)
    return np.array(rs), np.array(fs)


def _first_root(kappa0: float, delta: float, n: int, m: int):
    """Smallest lam with f(delta; lam) = 0: upward scan, then bisection.

    Radial eigenvalues cluster with spacing of order (pi/delta)^2 on deep
    balls, so the bracket is advanced by a deliberately smaller step —
    a doubling search can overshoot the whole first sign-change window
    and silently converge to a higher eigenvalue.
    """
    base = (_J01 / delta) ** 2

    lo = 0.25 * base
    grow = 0
    while _shoot(kappa0, delta, lo, n, m) <= 0.0:
        lo *= 0.5
        grow += 1
        if grow > 80:
            raise SearchError("no positive shot below the initial bracket")

    step = 0.4 * (math.pi / delta) ** 2
    hi = lo + step
    scans = 0
    while _shoot(kappa0, delta, hi, n, m) > 0.0:
        lo = hi
        hi += step
        scans += 1
        if scans > 200000:
            raise SearchError("no sign change found while scanning upward")

    iterations = 0
    while hi - lo > 1e-13 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _shoot(kappa0, delta, mid, n, m) > 0.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
        if iterations > 200:
            break
    return 0.5 * (lo + hi), iterations


def dirichlet_lambda1_ball(kappa0: float, delta: float,
                           n: int = 2048) -> SpectrumResult:
    """First Dirichlet eigenvalue of the geodesic ball, by radial shooting.

    lambda2 is the first eigenvalue of the m = 1 azimuthal mode, which is
    the true second ball eigenvalue.  The error estimate is a Richardson
    comparison against the half-resolution run.
    """
    if delta <= 0:
        raise DomainError("ball radius must be positive")
    if kappa0 > 0 and delta >= math.pi / math.sqrt(kappa0):
        raise DomainError("ball radius exceeds the injectivity radius")
    if n < 64:
        raise DomainError("shooting needs at least 64 radial steps")

    lam1, it1 = _first_root(kappa0, delta, n, m=0)
    lam1_half, _ = _first_root(kappa0, delta, n // 2, m=0)
    lam2, _ = _first_root(kappa0, delta, n, m=1)

    rs, prof = _shoot_profile(kappa0, delta, lam1, min(n, 512))
    eig = np.vstack([rs, prof])

    return SpectrumResult(
        lambda1=float(lam1), lambda2=float(lam2), eigenfunction=eig,
        iterations=it1,
        discretization_error_estimate=abs(lam1 - lam1_half) / 15.0,
        method="radial shooting / bisection")


def dirichlet_lambda1_ball_2d(kappa0: float, delta: float,
                              n: int = 96) -> SpectrumResult:
    """Cross-check of the ball eigenvalue on a 2D polar finite-volume grid.

    Assembles the flux form of -Delta0 on the conformal coordinate disk
    (symmetric positive definite) against the conformal area weight and
    runs deterministic inverse-power iteration.  Expect O(h^2) accuracy —
    this corroborates the shooting value, it does not replace it.
    """
    if delta <= 0:
        raise DomainError("ball radius must be positive")
    # coordinate radius of the geodesic ball in the model chart
    if kappa0 < 0:
        a = math.sqrt(-kappa0)
        R = math.tanh(0.5 * a * delta) / a
    elif kappa0 > 0:
        b = math.sqrt(kappa0)
        if delta >= math.pi / b:
            raise DomainError("ball radius exceeds the injectivity radius")
        R = math.tan(0.5 * b * delta) / b
    else:
        # the model factor is e^phi = 2/(1 + kappa0 r^2), so the flat
        # member of the family carries a factor 2: arclength = 2 R
        R = 0.5 * delta

    nr = nt = int(n)
    hr = R / nr
    ht = 2.0 * math.pi / nt
    r_f = hr * np.arange(nr + 1)
    r_c = hr * (np.arange(nr) + 0.5)

    idx = np.arange(nr * nt).reshape(nr, nt)
    rows, cols, vals = [], [], []

    def link(i_a, j_a, i_b, j_b, w):
        rows.extend([idx[i_a, j_a], idx[i_b, j_b],
                     idx[i_a, j_a], idx[i_b, j_b]])
        cols.extend([idx[i_b, j_b], idx[i_a, j_a],
                     idx[i_a, j_a], idx[i_b, j_b]])
        vals.extend([-w, -w, w, w])

    jp = (np.arange(nt) + 1) % nt
    for i in range(nr):
        for j in range(nt):
            if i + 1 < nr:
                link(i, j, i + 1, j, r_f[i + 1] / hr * ht)
            link(i, j, i, jp[j], hr / (ht * r_c[i]))
    # Dirichlet rim: ghost value 0 at half spacing beyond the last center
    for j in range(nt):
        k = idx[nr - 1, j]
        rows.append(k)
        cols.append(k)
        vals.append(r_f[nr] * (2.0 / hr) * ht)

    A = coo_matrix((vals, (rows, cols)),
                   shape=(nr * nt, nr * nt)).tocsc()
    th = ht * np.arange(nt)
    X = r_c[:, None] * np.cos(th)
    Y = r_c[:, None] * np.sin(th)
    rho2 = X ** 2 + Y ** 2
    e2phi = (2.0 / (1.0 + kappa0 * rho2)) ** 2
    Mw = (e2phi * r_c[:, None] * hr * ht).ravel()

    lu = splu(A, permc_spec="COLAMD")
    x = np.ones(nr * nt)
    x /= math.sqrt(float(x @ (Mw * x)))
    lam_old = 0.0
    iterations = 0
    for iterations in range(1, 501):
        x = lu.solve(Mw * x)
        x /= math.sqrt(float(x @ (Mw * x)))
        lam = float(x @ A.dot(x))
        if abs(lam - lam_old) <= 1e-12 * max(1.0, abs(lam)):
            break
        lam_old = lam
    eig = x.reshape(nr, nt)
    if eig.sum() < 0:
        eig = -eig
    return SpectrumResult(
        lambda1=lam, lambda2=None, eigenfunction=eig,
        iterations=iterations,
        discretization_error_estimate=float("nan"),
        method="polar finite volumes / inverse power")


# ------------------------------------------------------------------ Cheeger


@dataclass(frozen=True)
class CheegerEstimate:
    """Isoperimetric ratio data for one geodesic ball."""

    delta: float
    boundary_length: float
    volume: float
    cheeger_constant: float
    lower_bound: float  # h^2 / 4


def cheeger_ball_family(kappa0: float, deltas) -> list:
    """Cheeger constants h(B_delta) for a family of geodesic balls.

    For the rotationally symmetric models the ratio L(t)/V(t) is
    monotone decreasing in t, so the infimum over centered sub-balls is
    attained at the full ball; a sampled minimum keeps the computation
    honest if that ever fails to hold.
    """
    deltas = list(deltas)
    if not deltas:
        raise DomainError("cheeger_ball_family needs at least one radius")
    out = []
    for delta in deltas:
        if delta <= 0:
            raise DomainError("ball radii must be positive")
        length, volume = ball_geometry(kappa0, delta)
        ratio = length / volume
        for t in np.linspace(0.05 * delta, delta, 40):
            lt, vt = ball_geometry(kappa0, float(t))
            ratio = min(ratio, lt / vt)
        out.append(CheegerEstimate(
            delta=float(delta), boundary_length=length, volume=volume,
            cheeger_constant=ratio, lower_bound=0.25 * ratio * ratio))
    return out


@dataclass(frozen=True)
class CheegerCheck:
    """Outcome of the lower-bound comparison lambda1 >= h^2/4."""

    lambda1: float
    lower_bound: float
    satisfied: bool
    slack: float


def cheeger_inequality_check(estimate, lambda1: float,
                             tol: float = 1e-12) -> CheegerCheck:
    """Verify lambda1 >= h^2/4 for a ball's Cheeger estimate."""
    if hasattr(estimate, "lower_bound"):
        bound = float(estimate.lower_bound)
    else:
        h = float(estimate)
        bound = 0.25 * h * h
    slack = float(lambda1) - bound
    return CheegerCheck(lambda1=float(lambda1), lower_bound=bound,
                        satisfied=bool(slack >= -tol), slack=slack)


# ------------------------------------------------- cylinder stability


def _rect_laplacian(nx: int, ny: int, hx: float, hy: float):
    """SPD 5-point -Delta with Dirichlet boundary, interior nodes only."""
    m = nx * ny
    idx = np.arange(m).reshape(nx, ny)
    cx, cy = 1.0 / hx ** 2, 1.0 / hy ** 2
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [np.full(m, 2.0 * (cx + cy))]
    for di, dj, c in ((1, 0, cx), (0, 1, cy)):
        a = idx[: nx - di if di else nx, : ny - dj if dj else ny]
        b = idx[di:, dj:]
        rows.extend([a.ravel(), b.ravel()])
        cols.extend([b.ravel(), a.ravel()])
        vals.extend([np.full(a.size, -c), np.full(a.size, -c)])
    return coo_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(m, m)).tocsc()


def _inverse_power(A, m: int, deflate=None, tol: float = 1e-12,
                   max_iter: int = 800):
    lu = splu(A, permc_spec="COLAMD")
    if deflate is None:
        x = np.ones(m)
    else:
        # an asymmetric start: the all-ones vector is orthogonal to the
        # odd overtones, so deflated iteration from it would skip them
        x = 1.0 + np.arange(m) / m
        x -= (x @ deflate) * deflate
    x /= np.linalg.norm(x)
    mu_old = 0.0
    its = 0
    for its in range(1, max_iter + 1):
        x = lu.solve(x)
        if deflate is not None:
            x -= (x @ deflate) * deflate
        x /= np.linalg.norm(x)
        mu = float(x @ A.dot(x))
        if abs(mu - mu_old) <= tol * max(1.0, abs(mu)):
            break
        mu_old = mu
    return mu, x, its


def stability_spectrum(H: float, kappa0: float, L: float, r: float,
                       grid: int = 101) -> SpectrumResult:
    """Dirichlet spectrum of Delta + (4H^2 + kappa0) on (0, L) x (-r, r).

    The rectangle is a bounded piece of a vertical cylinder in intrinsic
    (flat) coordinates; negative lambda1 means the piece is unstable.
    The reported eigenvalues are those of -Delta minus the constant
    potential, computed by inverse-power iteration on the SPD Laplacian
    (so the shift cannot mislead the iteration when the operator is
    indefinite).  lambda2 comes from one deflation step.
    """
    if L <= 0 or r <= 0:
        raise DomainError("the rectangle needs positive side lengths")
    if grid < 8:
        raise DomainError("stability grids need at least 8 nodes per side")
    a = 4.0 * H * H + kappa0
    nx = ny = int(grid)
    hx = L / (nx + 1)
    hy = 2.0 * r / (ny + 1)
    A = _rect_laplacian(nx, ny, hx, hy)
    mu1, v1, it1 = _inverse_power(A, nx * ny)
    mu2, v2, it2 = _inverse_power(A, nx * ny, deflate=v1)

    # Richardson estimate against a half-resolution grid (order 2)
    nh = max(8, nx // 2)
    Ah = _rect_laplacian(nh, nh, L / (nh + 1), 2.0 * r / (nh + 1))
    mu1_half, _, _ = _inverse_power(Ah, nh * nh)
    est = abs(mu1 - mu1_half) / 3.0

    eig = v1.reshape(nx, ny)
    if eig.sum() < 0:
        eig = -eig
    return SpectrumResult(
        lambda1=mu1 - a, lambda2=mu2 - a, eigenfunction=eig,
        iterations=it1 + it2, discretization_error_estimate=est,
        method="5-point finite differences / inverse power")


def rectangle_lambda1_closed_form(L: float, r: float) -> float:
    """First Dirichlet eigenvalue of -Delta on (0, L) x (-r, r)."""
    return math.pi ** 2 * (1.0 / L ** 2 + 1.0 / (2.0 * r) ** 2)


@dataclass(frozen=True)
class InstabilityCheck:
    """Sign test of lambda1(Delta + 4H^2 + kappa0) on a rectangle."""

    lambda1: float
    potential: float  # 4H^2 + kappa0
    unstable: bool


def instability_condition(H: float, kappa0: float, L: float,
                          r: float) -> InstabilityCheck:
    """Closed-form instability test for the (0, L) x (-r, r) piece."""
    a = 4.0 * H * H + kappa0
    lam = rectangle_lambda1_closed_form(L, r) - a
    return InstabilityCheck(lambda1=lam, potential=a, unstable=bool(lam < 0))


@dataclass(frozen=True)
class MinimalSquare:
    """Smallest unstable square piece of a vertical cylinder."""

    side: float
    closed_form: float
    potential: float


def minimal_unstable_square(H: float, kappa0: float,
                            tol: float = 1e-6) -> MinimalSquare:
    """Side of the smallest unstable square, by bisection to ``tol``.

    Squares are (0, s) x (-s/2, s/2); instability needs the potential
    4H^2 + kappa0 to be positive, otherwise NoInstabilityError.
    """
    a = 4.0 * H * H + kappa0
    if a <= 0:
        raise NoInstabilityError(
            f"4H^2 + kappa0 = {a:.6g} <= 0: no square piece is unstable")
    closed = math.pi * math.sqrt(2.0 / a)

    def unstable(s):
        return instability_condition(H, kappa0, s, 0.5 * s).unstable

    lo, hi = closed / 4.0, closed * 4.0
    while unstable(lo):
        lo *= 0.5
        if lo < 1e-12:
            raise SearchError("bisection bracket collapsed at zero")
    while not unstable(hi):
        hi *= 2.0
        if hi > 1e12:
            raise SearchError("no unstable square found while expanding")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return MinimalSquare(side=0.5 * (lo + hi), closed_form=closed,
                         potential=a)
