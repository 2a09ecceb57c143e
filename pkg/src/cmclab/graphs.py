"""Prescribed-mean-curvature graphs and the flux obstruction.

Solves the Dirichlet problem for the divergence-form equation

    e^{-2 phi} div0( grad0 u / W ) = 2 H,   W = sqrt(1 + e^{-2 phi} |grad0 u|^2)

on coordinate disks (polar face-flux grid) or rectangles (Cartesian
face-flux grid) of a conformal chart, by damped Newton iteration with an
exact sparse Jacobian.  The discretization is conservative: summing the
cell equations telescopes interior face fluxes away, so the divergence-
theorem identity 2H V(Omega) = flux(boundary) — and with it the
non-existence mechanism 2H V <= A — holds at the discrete level up to
quadrature error.

Geodesic balls of the constant-curvature models are realized as
coordinate disks via the exact radius map (tanh for hyperbolic charts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import quad
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .ambient import ConformalChart, Disk, Rectangle
from .errors import (CapabilityError, DivergenceError, DomainError,
                     HypothesisError, LinearSolveError, SearchError)

HField = Union[float, Callable]


@dataclass
class SolverParams:
    """Newton-iteration controls for the graph equation."""

    max_iterations: int = 40
    damping: int = 20          # maximum step halvings per iteration
    residual_tol: float = 1e-10
    gradient_cap: float = 1e6  # metric gradient beyond which we declare failure


@dataclass
class GraphProblem:
    """Dirichlet data for the prescribed-mean-curvature equation."""

    chart: ConformalChart
    domain: Union[Disk, Rectangle]
    H: HField
    boundary_data: Union[float, Callable] = 0.0
    resolution: int = 65
    solver: SolverParams = field(default_factory=SolverParams)

    def __post_init__(self):
        if self.resolution < 4:
            raise DomainError("graph problems need resolution >= 4")
        if self.solver.residual_tol <= 0:
            raise DomainError("residual_tol must be positive")

    def h_values(self, x, y):
        if callable(self.H):
            return np.broadcast_to(
                np.asarray(self.H(x, y), dtype=float), np.shape(x)).copy()
        return np.full(np.shape(x), float(self.H))

    def boundary_values(self, x, y):
        if callable(self.boundary_data):
            return np.broadcast_to(
                np.asarray(self.boundary_data(x, y), dtype=float),
                np.shape(x)).copy()
        return np.full(np.shape(x), float(self.boundary_data))


def coordinate_ball_radius(chart: ConformalChart, delta: float) -> float:
    """Coordinate radius of the geodesic ball of radius delta (model charts)."""
    if delta <= 0:
        raise DomainError("geodesic radius must be positive")
    if chart.model_tag == "flat":
        return float(delta)
    if chart.model_tag == "hyperbolic":
        a = math.sqrt(-chart.kappa0)
        return math.tanh(0.5 * a * delta) / a
    if chart.model_tag == "sphere":
        b = math.sqrt(chart.kappa0)
        if delta >= math.pi / b:
            raise DomainError("ball radius exceeds the injectivity radius")
        return math.tan(0.5 * b * delta) / b
    raise CapabilityError("geodesic balls are only realized on model charts")


def geodesic_ball_problem(chart: ConformalChart, delta: float, H: HField,
                          resolution: int = 65, boundary_data=0.0,
                          solver: Optional[SolverParams] = None) -> GraphProblem:
    """GraphProblem on the geodesic ball of radius delta about the origin."""
    disk = Disk(0.0, 0.0, coordinate_ball_radius(chart, delta))
    return GraphProblem(chart=chart, domain=disk, H=H,
                        boundary_data=boundary_data, resolution=resolution,
                        solver=solver or SolverParams())


@dataclass
class GraphSolution:
    """Solved (or stalled) height field with solver diagnostics."""

    u: np.ndarray
    W: np.ndarray
    converged: bool
    final_residual: float
    iterations: int
    max_gradient: float
    residual_history: list
    problem: GraphProblem
    grid_kind: str                  # "polar" or "cartesian"
    x: np.ndarray = None            # sample coordinates (same shape as u)
    y: np.ndarray = None
    # polar extras used by the flux diagnostics
    face_radii: np.ndarray = None   # (n_r + 1,) coordinate radii of faces
    flux_profile: np.ndarray = None  # metric flux through each face circle
    boundary_values: np.ndarray = None
    failure_note: str = ""


# ====================================================== polar discretization


class _PolarScheme:
    """Cell-centered face-flux scheme on a coordinate disk.

    Cells live at (r_i, theta_j) = ((i+1/2) h_r, j h_t); the center face
    carries zero flux and the outer face applies Dirichlet data at half a
    cell spacing.  All W factors are evaluated at faces from the face-
    normal difference and a transverse average, which is what makes the
    cell equations telescope.
    """

    def __init__(self, problem: GraphProblem):
        disk = problem.domain
        chart = problem.chart
        n = problem.resolution
        self.nr = n
        self.nt = n
        self.R = disk.radius
        self.cx, self.cy = disk.cx, disk.cy
        self.hr = self.R / self.nr
        self.ht = 2.0 * math.pi / self.nt
        self.r_f = self.hr * np.arange(self.nr + 1)
        self.r_c = self.hr * (np.arange(self.nr) + 0.5)
        self.th = self.ht * np.arange(self.nt)
        self.jp = (np.arange(self.nt) + 1) % self.nt
        self.jm = (np.arange(self.nt) - 1) % self.nt

        ct, st = np.cos(self.th), np.sin(self.th)
        ct_h = np.cos(self.th + 0.5 * self.ht)
        st_h = np.sin(self.th + 0.5 * self.ht)

        def beta(x, y):
            chart.require_inside(x, y)
            return np.exp(-2.0 * np.asarray(chart.phi(x, y), dtype=float))

        # cell centers
        Xc = self.cx + self.r_c[:, None] * ct
        Yc = self.cy + self.r_c[:, None] * st
        chart.require_inside(Xc, Yc)
        phi_c = np.asarray(chart.phi(Xc, Yc), dtype=float)
        self.beta_c = np.exp(-2.0 * phi_c)
        self.area_weight = np.exp(2.0 * phi_c) * self.r_c[:, None] \
            * self.hr * self.ht
        self.H_c = problem.h_values(Xc, Yc)
        self.Xc, self.Yc = Xc, Yc

        # interior radial faces i = 1..nr-1
        rf = self.r_f[1:self.nr]
        self.beta_rf = beta(self.cx + rf[:, None] * ct,
                            self.cy + rf[:, None] * st)
        # boundary faces
        xb = self.cx + self.R * ct
        yb = self.cy + self.R * st
        self.beta_bf = beta(xb, yb)
        self.g = problem.boundary_values(xb, yb)
        self.g_t = (self.g[self.jp] - self.g[self.jm]) / (2.0 * self.ht * self.R)
        # angular faces at (r_c[i], theta_j + ht/2)
        self.beta_af = beta(self.cx + self.r_c[:, None] * ct_h,
                            self.cy + self.r_c[:, None] * st_h)

    # ------------------------------------------------------------ residual

    def residual(self, u):
        nr, nt = self.nr, self.nt
        hr, ht = self.hr, self.ht
        jp, jm = self.jp, self.jm
        rf_col = self.r_f[1:nr, None]

        d = (u[1:, :] - u[:-1, :]) / hr
        t = (u[1:, :][:, jp] + u[:-1, :][:, jp]
             - u[1:, :][:, jm] - u[:-1, :][:, jm]) / (4.0 * ht * rf_col)
        W_int = np.sqrt(1.0 + self.beta_rf * (d * d + t * t))
        Fr_int = d / W_int

        d_b = (self.g - u[-1, :]) * (2.0 / hr)
        W_b = np.sqrt(1.0 + self.beta_bf * (d_b * d_b + self.g_t * self.g_t))
        Fr_b = d_b / W_b

        Fr = np.zeros((nr + 1, nt))
        Fr[1:nr, :] = Fr_int
        Fr[nr, :] = Fr_b

        q = (u[:, jp] - u) / (ht * self.r_c[:, None])
        tr = np.empty_like(q)
        tr[1:-1, :] = (u[2:, :] + u[2:, :][:, jp]
                       - u[:-2, :] - u[:-2, :][:, jp]) / (4.0 * hr)
        tr[0, :] = (u[1, :] + u[1, jp] - u[0, :] - u[0, jp]) / (2.0 * hr)
        tr[-1, :] = (self.g + self.g[jp]
                     - u[-2, :] - u[-2, :][jp]) / (3.0 * hr)
        W_a = np.sqrt(1.0 + self.beta_af * (q * q + tr * tr))
        Ft = q / W_a

        div = (self.r_f[1:, None] * Fr[1:, :]
               - self.r_f[:-1, None] * Fr[:-1, :]) / (self.r_c[:, None] * hr) \
            + (Ft - Ft[:, jm]) / (self.r_c[:, None] * ht)
        res = self.beta_c * div - 2.0 * self.H_c

        grad2 = 0.0
        for b, gx, gy in ((self.beta_rf, d, t), (self.beta_af, q, tr),
                          (self.beta_bf, d_b, self.g_t)):
            grad2 = max(grad2, float(np.max(b * (gx * gx + gy * gy))))
        aux = {"d": d, "t": t, "W_int": W_int, "d_b": d_b, "W_b": W_b,
               "q": q, "tr": tr, "W_a": W_a, "Fr": Fr,
               "max_gradient": math.sqrt(grad2)}
        return res, aux

    # ------------------------------------------------------------ jacobian

    def jacobian(self, u, aux):
        nr, nt = self.nr, self.nt
        hr, ht = self.hr, self.ht
        jp, jm = self.jp, self.jm
        J = np.arange(nt)

        rows, cols, vals = [], [], []

        def idx(i, j):
            return i * nt + j

        def emit(cell_i, cell_j, node_i, node_j, val):
            ci, cj, ni, nj, vv = np.broadcast_arrays(
                cell_i, cell_j, node_i, node_j, val)
            rows.append(idx(ci, cj).ravel())
            cols.append(idx(ni, nj).ravel())
            vals.append(vv.ravel())

        # ---- interior radial faces i = 1..nr-1
        d, t, W = aux["d"], aux["t"], aux["W_int"]
        dFdd = (1.0 + self.beta_rf * t * t) / W ** 3
        dFdt = -self.beta_rf * d * t / W ** 3
        fi = np.arange(1, nr)[:, None]
        jj = np.broadcast_to(J, (nr - 1, nt))
        rf_col = self.r_f[1:nr, None]
        c_t = 1.0 / (4.0 * ht * rf_col)
        for cell_i, sign in ((fi, -1.0), (fi - 1, +1.0)):
            coef = sign * self.beta_c[cell_i, jj] \
                * rf_col / (self.r_c[cell_i] * hr)
            emit(cell_i, jj, fi, jj, coef * dFdd / hr)
            emit(cell_i, jj, fi - 1, jj, -coef * dFdd / hr)
            for node_i in (fi, fi - 1):
                emit(cell_i, jj, node_i, jp[jj], coef * dFdt * c_t)
                emit(cell_i, jj, node_i, jm[jj], -coef * dFdt * c_t)

        # ---- boundary faces (only cell nr-1 depends, through d)
        d_b, W_b = aux["d_b"], aux["W_b"]
        dFdd_b = (1.0 + self.beta_bf * self.g_t * self.g_t) / W_b ** 3
        last = np.full(nt, nr - 1)
        coef_b = self.beta_c[nr - 1, :] * self.R / (self.r_c[nr - 1] * hr)
        emit(last, J, last, J, coef_b * dFdd_b * (-2.0 / hr))

        # ---- angular faces (i, j+1/2)
        q, tr, W_a = aux["q"], aux["tr"], aux["W_a"]
        dFdq = (1.0 + self.beta_af * tr * tr) / W_a ** 3
        dFdtr = -self.beta_af * q * tr / W_a ** 3
        ii = np.arange(nr)[:, None]
        jj_all = np.broadcast_to(J, (nr, nt))
        c_q = 1.0 / (ht * self.r_c[:, None])
        for cell_j, sign in ((jj_all, +1.0), (jp[jj_all], -1.0)):
            coef = sign * self.beta_c[ii, cell_j] / (self.r_c[:, None] * ht)
            emit(ii, cell_j, ii, jp[jj_all], coef * dFdq * c_q)
            emit(ii, cell_j, ii, jj_all, -coef * dFdq * c_q)
            # transverse (radial) dependencies of W at angular faces
            mid = slice(1, nr - 1)
            for node_j in (jj_all, jp[jj_all]):
                emit(ii[mid], cell_j[mid], ii[mid] + 1, node_j[mid],
                     coef[mid] * dFdtr[mid] / (4.0 * hr))
                emit(ii[mid], cell_j[mid], ii[mid] - 1, node_j[mid],
                     -coef[mid] * dFdtr[mid] / (4.0 * hr))
                emit(ii[:1], cell_j[:1], ii[:1] + 1, node_j[:1],
                     coef[:1] * dFdtr[:1] / (2.0 * hr))
                emit(ii[:1], cell_j[:1], ii[:1], node_j[:1],
                     -coef[:1] * dFdtr[:1] / (2.0 * hr))
                emit(ii[-1:], cell_j[-1:], ii[-1:] - 1, node_j[-1:],
                     -coef[-1:] * dFdtr[-1:] / (3.0 * hr))

        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        n = nr * nt
        return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()

    def initial_guess(self):
        blend = (self.r_c[:, None] / self.R) ** 2
        return blend * self.g[None, :]

    def nodal_w(self, u):
        """W at cell centers from face-averaged gradients (diagnostic)."""
        d_full = np.zeros((self.nr + 1, self.nt))
        d_full[1:self.nr, :] = (u[1:, :] - u[:-1, :]) / self.hr
        d_full[self.nr, :] = (self.g - u[-1, :]) * (2.0 / self.hr)
        ur = 0.5 * (d_full[:-1, :] + d_full[1:, :])
        ut = (u[:, self.jp] - u[:, self.jm]) / (2.0 * self.ht)
        g2 = ur ** 2 + (ut / self.r_c[:, None]) ** 2
        return np.sqrt(1.0 + self.beta_c * g2)


# ================================================== cartesian discretization


class _CartesianScheme:
    """Node-centered face-flux scheme on a coordinate rectangle.

    Nodes include the boundary, where u is pinned to the Dirichlet data;
    interior nodes carry the conservation equation with W evaluated at
    the four surrounding faces.
    """

    def __init__(self, problem: GraphProblem):
        rect = problem.domain
        chart = problem.chart
        n = problem.resolution
        self.nx = n
        self.ny = n
        self.hx = (rect.x1 - rect.x0) / (n - 1)
        self.hy = (rect.y1 - rect.y0) / (n - 1)
        self.xs = rect.x0 + self.hx * np.arange(n)
        self.ys = rect.y0 + self.hy * np.arange(n)
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        chart.require_inside(X, Y)
        phi = np.asarray(chart.phi(X, Y), dtype=float)
        self.beta_n = np.exp(-2.0 * phi)
        self.X, self.Y = X, Y
        self.H_n = problem.h_values(X, Y)
        self.g_mask = np.zeros((n, n), dtype=bool)
        self.g_mask[0, :] = self.g_mask[-1, :] = True
        self.g_mask[:, 0] = self.g_mask[:, -1] = True
        self.g_full = problem.boundary_values(X, Y) * self.g_mask

        def beta(x, y):
            return np.exp(-2.0 * np.asarray(chart.phi(x, y), dtype=float))

        self.beta_fx = beta(0.5 * (X[:-1, :] + X[1:, :]), Y[:-1, :])
        self.beta_fy = beta(X[:, :-1], 0.5 * (Y[:, :-1] + Y[:, 1:]))

        self.int_idx = -np.ones((n, n), dtype=int)
        interior = ~self.g_mask
        self.int_idx[interior] = np.arange(interior.sum())
        self.n_unknown = int(interior.sum())
        self.interior = interior

    def full_field(self, u_int):
        u = self.g_full.copy()
        u[self.interior] = u_int
        return u

    def _faces(self, u):
        hx, hy = self.hx, self.hy
        dx = (u[1:, :] - u[:-1, :]) / hx                       # (nx-1, ny)
        tx = np.full_like(dx, np.nan)
        tx[:, 1:-1] = (u[1:, 2:] + u[:-1, 2:]
                       - u[1:, :-2] - u[:-1, :-2]) / (4.0 * hy)
        tx[:, 0] = (u[1:, 1] + u[:-1, 1] - u[1:, 0] - u[:-1, 0]) / (2.0 * hy)
        tx[:, -1] = (u[1:, -1] + u[:-1, -1] - u[1:, -2] - u[:-1, -2]) / (2.0 * hy)
        Wx = np.sqrt(1.0 + self.beta_fx * (dx * dx + tx * tx))

        dy = (u[:, 1:] - u[:, :-1]) / hy                       # (nx, ny-1)
        ty = np.full_like(dy, np.nan)
        ty[1:-1, :] = (u[2:, 1:] + u[2:, :-1]
                       - u[:-2, 1:] - u[:-2, :-1]) / (4.0 * hx)
        ty[0, :] = (u[1, 1:] + u[1, :-1] - u[0, 1:] - u[0, :-1]) / (2.0 * hx)
        ty[-1, :] = (u[-1, 1:] + u[-1, :-1] - u[-2, 1:] - u[-2, :-1]) / (2.0 * hx)
        Wy = np.sqrt(1.0 + self.beta_fy * (dy * dy + ty * ty))
        return dx, tx, Wx, dy, ty, Wy

    def residual(self, u_int):
        u = self.full_field(u_int)
        dx, tx, Wx, dy, ty, Wy = self._faces(u)
        Fx = dx / Wx
        Fy = dy / Wy
        div = (Fx[1:, 1:-1] - Fx[:-1, 1:-1]) / self.hx \
            + (Fy[1:-1, 1:] - Fy[1:-1, :-1]) / self.hy
        res_grid = self.beta_n[1:-1, 1:-1] * div - 2.0 * self.H_n[1:-1, 1:-1]
        g2 = max(float(np.max(self.beta_fx * (dx * dx + tx * tx))),
                 float(np.max(self.beta_fy * (dy * dy + ty * ty))))
        aux = {"u": u, "dx": dx, "tx": tx, "Wx": Wx,
               "dy": dy, "ty": ty, "Wy": Wy,
               "max_gradient": math.sqrt(g2)}
        return res_grid.ravel(), aux

    def jacobian(self, u_int, aux):
        nx, ny = self.nx, self.ny
        hx, hy = self.hx, self.hy
        dx, tx, Wx = aux["dx"], aux["tx"], aux["Wx"]
        dy, ty, Wy = aux["dy"], aux["ty"], aux["Wy"]
        dFdd_x = (1.0 + self.beta_fx * tx * tx) / Wx ** 3
        dFdt_x = -self.beta_fx * dx * tx / Wx ** 3
        dFdd_y = (1.0 + self.beta_fy * ty * ty) / Wy ** 3
        dFdt_y = -self.beta_fy * dy * ty / Wy ** 3

        rows, cols, vals = [], [], []
        eq_idx = self.int_idx[1:-1, 1:-1]

        def emit(cells, node_i, node_j, val):
            node = self.int_idx[node_i, node_j]
            keep = node >= 0
            rows.append(cells[keep])
            cols.append(node[keep])
            vals.append(np.broadcast_to(val, cells.shape)[keep])

        I, Jn = np.meshgrid(np.arange(1, nx - 1), np.arange(1, ny - 1),
                            indexing="ij")

        # x-faces left (i-1/2) and right (i+1/2) of each interior node
        for face_i, sign in ((I, +1.0), (I - 1, -1.0)):
            coef = sign * self.beta_n[I, Jn] / hx
            dd = dFdd_x[face_i, Jn]
            dt = dFdt_x[face_i, Jn]
            emit(eq_idx, face_i + 1, Jn, coef * dd / hx)
            emit(eq_idx, face_i, Jn, -coef * dd / hx)
            # transverse stencil of tx at interior columns is centered
            for ni in (face_i + 1, face_i):
                emit(eq_idx, ni, Jn + 1, coef * dt / (4.0 * hy))
                emit(eq_idx, ni, Jn - 1, -coef * dt / (4.0 * hy))

        # y-faces below (j-1/2) and above (j+1/2)
        for face_j, sign in ((Jn, +1.0), (Jn - 1, -1.0)):
            coef = sign * self.beta_n[I, Jn] / hy
            dd = dFdd_y[I, face_j]
            dt = dFdt_y[I, face_j]
            emit(eq_idx, I, face_j + 1, coef * dd / hy)
            emit(eq_idx, I, face_j, -coef * dd / hy)
            for nj in (face_j + 1, face_j):
                emit(eq_idx, I + 1, nj, coef * dt / (4.0 * hx))
                emit(eq_idx, I - 1, nj, -coef * dt / (4.0 * hx))

        rows = np.concatenate([r.ravel() for r in rows])
        cols = np.concatenate([c.ravel() for c in cols])
        vals = np.concatenate([v.ravel() for v in vals])
        m = self.n_unknown
        return coo_matrix((vals, (rows, cols)), shape=(m, m)).tocsc()

    def initial_guess(self):
        # harmonic extension of the boundary data; starting from zero can
        # saturate the face fluxes and stall Newton when g is large
        m = self.n_unknown
        if m == 0:
            return np.zeros(0)
        I, Jn = np.meshgrid(np.arange(1, self.nx - 1),
                            np.arange(1, self.ny - 1), indexing="ij")
        eq = self.int_idx[I, Jn].ravel()
        cx, cy = 1.0 / self.hx ** 2, 1.0 / self.hy ** 2
        rows = [eq]
        cols = [eq]
        vals = [np.full(eq.size, -2.0 * (cx + cy))]
        b = np.zeros(m)
        for di, dj, c in ((1, 0, cx), (-1, 0, cx), (0, 1, cy), (0, -1, cy)):
            nb = self.int_idx[I + di, Jn + dj].ravel()
            gv = self.g_full[I + di, Jn + dj].ravel()
            inside = nb >= 0
            rows.append(eq[inside])
            cols.append(nb[inside])
            vals.append(np.full(int(inside.sum()), c))
            np.subtract.at(b, eq[~inside], c * gv[~inside])
        lap = coo_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(m, m)).tocsc()
        return splu(lap, permc_spec="COLAMD").solve(b)

    def nodal_w(self, u):
        ux = np.gradient(u, self.hx, axis=0)
        uy = np.gradient(u, self.hy, axis=1)
        return np.sqrt(1.0 + self.beta_n * (ux ** 2 + uy ** 2))


# ============================================================ newton driver


def _newton(scheme, params: SolverParams):
    u = scheme.initial_guess()
    res, aux = scheme.residual(u)
    res_flat = np.ravel(res)
    r_max = float(np.max(np.abs(res_flat)))
    r_two = float(np.linalg.norm(res_flat))
    history = [r_max]
    converged = r_max <= params.residual_tol
    iterations = 0
    note = ""
    max_grad = aux["max_gradient"]

    while not converged and iterations < params.max_iterations:
        jac = scheme.jacobian(u, aux)
        try:
            lu = splu(jac, permc_spec="COLAMD")
            step = lu.solve(-res_flat)
        except RuntimeError as exc:
            raise LinearSolveError(f"sparse factorization failed: {exc}") \
                from None
        if not np.all(np.isfinite(step)):
            raise DivergenceError("non-finite Newton step",
                                  iteration=iterations)
        step = step.reshape(np.shape(u))

        alpha, accepted = 1.0, False
        for _ in range(params.damping + 1):
            u_try = u + alpha * step
            if not np.all(np.isfinite(u_try)):
                raise DivergenceError("non-finite iterate",
                                      iteration=iterations)
            res_try, aux_try = scheme.residual(u_try)
            rt_flat = np.ravel(res_try)
            rt_two = float(np.linalg.norm(rt_flat))
            if np.isfinite(rt_two) and rt_two < r_two:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            note = "residual stagnation (damping exhausted)"
            break

        u, res_flat, aux = u_try, rt_flat, aux_try
        r_two = rt_two
        r_max = float(np.max(np.abs(res_flat)))
        history.append(r_max)
        iterations += 1
        max_grad = max(max_grad, aux["max_gradient"])
        if aux["max_gradient"] > params.gradient_cap:
            note = (f"metric gradient {aux['max_gradient']:.3e} breached the "
                    f"cap {params.gradient_cap:.3e}")
            break
        if r_max <= params.residual_tol:
            converged = True

    return u, aux, r_max, history, iterations, bool(converged), max_grad, note


def solve_graph(problem: GraphProblem) -> GraphSolution:
    """Damped-Newton solve of the graph equation on the problem domain.

    Returns the last iterate with diagnostics either way; ``converged``
    is true only when the max-norm residual meets ``residual_tol``.
    Raises DivergenceError on a non-finite iterate and LinearSolveError
    if the Jacobian cannot be factorized.
    """
    if isinstance(problem.domain, Disk):
        scheme = _PolarScheme(problem)
        kind = "polar"
    elif isinstance(problem.domain, Rectangle):
        scheme = _CartesianScheme(problem)
        kind = "cartesian"
    else:
        raise CapabilityError("graph domains are disks or rectangles")

    u, aux, r_max, history, iterations, converged, max_grad, note = \
        _newton(scheme, problem.solver)

    if kind == "polar":
        Fr = aux["Fr"]
        flux_profile = scheme.r_f * scheme.ht * Fr.sum(axis=1)
        sol = GraphSolution(
            u=u, W=scheme.nodal_w(u), converged=converged,
            final_residual=r_max, iterations=iterations,
            max_gradient=max_grad, residual_history=history,
            problem=problem, grid_kind=kind, x=scheme.Xc, y=scheme.Yc,
            face_radii=scheme.r_f.copy(), flux_profile=flux_profile,
            boundary_values=scheme.g.copy(), failure_note=note)
    else:
        u_full = aux["u"]
        sol = GraphSolution(
            u=u_full, W=scheme.nodal_w(u_full), converged=converged,
            final_residual=r_max, iterations=iterations,
            max_gradient=max_grad, residual_history=history,
            problem=problem, grid_kind=kind, x=scheme.X, y=scheme.Y,
            failure_note=note)
    sol._scheme = scheme
    return sol


# ======================================================= metric quadrature


def _is_radial_model(chart: ConformalChart, disk: Disk) -> bool:
    return (chart.model_tag in ("flat", "hyperbolic", "sphere")
            and abs(disk.cx) < 1e-15 and abs(disk.cy) < 1e-15)


def _gauss_nodes(a: float, b: float, n: int = 96):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w


def metric_disk_volume(chart: ConformalChart, disk: Disk) -> float:
    """V of a coordinate disk in the chart metric, by quadrature."""
    if _is_radial_model(chart, disk):
        val, _ = quad(lambda r: 2.0 * math.pi * r
                      * float(np.exp(2.0 * chart.phi(r, 0.0))),
                      0.0, disk.radius, epsabs=1e-13, epsrel=1e-13, limit=200)
        return float(val)
    rs, wr = _gauss_nodes(0.0, disk.radius, 160)
    ts, wt = _gauss_nodes(0.0, 2.0 * math.pi, 160)
    Rm, Tm = np.meshgrid(rs, ts, indexing="ij")
    X = disk.cx + Rm * np.cos(Tm)
    Y = disk.cy + Rm * np.sin(Tm)
    dens = np.exp(2.0 * np.asarray(chart.phi(X, Y), dtype=float)) * Rm
    return float(np.einsum("i,j,ij->", wr, wt, dens))


def metric_disk_perimeter(chart: ConformalChart, disk: Disk) -> float:
    """Length of the disk's boundary circle in the chart metric."""
    if _is_radial_model(chart, disk):
        return float(2.0 * math.pi * disk.radius
                     * np.exp(chart.phi(disk.radius, 0.0)))
    ts, wt = _gauss_nodes(0.0, 2.0 * math.pi, 512)
    X = disk.cx + disk.radius * np.cos(ts)
    Y = disk.cy + disk.radius * np.sin(ts)
    dens = np.exp(np.asarray(chart.phi(X, Y), dtype=float)) * disk.radius
    return float(np.dot(wt, dens))


def metric_rect_volume(chart: ConformalChart, rect: Rectangle) -> float:
    xs, wx = _gauss_nodes(rect.x0, rect.x1, 160)
    ys, wy = _gauss_nodes(rect.y0, rect.y1, 160)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    dens = np.exp(2.0 * np.asarray(chart.phi(X, Y), dtype=float))
    return float(np.einsum("i,j,ij->", wx, wy, dens))


def metric_rect_perimeter(chart: ConformalChart, rect: Rectangle) -> float:
    total = 0.0
    edges = [((rect.x0, rect.x1), lambda s: (s, np.full_like(s, rect.y0))),
             ((rect.x0, rect.x1), lambda s: (s, np.full_like(s, rect.y1))),
             ((rect.y0, rect.y1), lambda s: (np.full_like(s, rect.x0), s)),
             ((rect.y0, rect.y1), lambda s: (np.full_like(s, rect.x1), s))]
    for (a, b), param in edges:
        ss, ws = _gauss_nodes(a, b, 256)
        X, Y = param(ss)
        total += float(np.dot(ws, np.exp(
            np.asarray(chart.phi(X, Y), dtype=float))))
    return total


# ===================================================== obstruction checks


@dataclass(frozen=True)
class NecessaryCondition:
    """The solvability bound 2 inf(H) V(Omega) <= A(boundary)."""

    lhs: float
    area: float
    ok: bool
    volume: float
    h_inf: float

    def __iter__(self):
        return iter((self.lhs, self.area, self.ok))


def _h_infimum(problem_h, chart, domain) -> float:
    if not callable(problem_h):
        return float(problem_h)
    if isinstance(domain, Disk):
        rs = np.linspace(0.0, domain.radius, 201)[1:]
        ts = np.linspace(0.0, 2.0 * math.pi, 201)
        Rm, Tm = np.meshgrid(rs, ts, indexing="ij")
        X = domain.cx + Rm * np.cos(Tm)
        Y = domain.cy + Rm * np.sin(Tm)
    else:
        xs = np.linspace(domain.x0, domain.x1, 201)
        ys = np.linspace(domain.y0, domain.y1, 201)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
    return float(np.min(np.asarray(problem_h(X, Y), dtype=float)))


def necessary_condition(chart: ConformalChart, domain, H: HField
                        ) -> NecessaryCondition:
    """Evaluates 2 inf(H) V(Omega) <= A(boundary) by metric quadrature.

    The infimum of the prescribed field is used, which covers the
    constant-H case (inf H = H) and the variable-H variant alike.
    """
    if isinstance(domain, Disk):
        vol = metric_disk_volume(chart, domain)
        area = metric_disk_perimeter(chart, domain)
    elif isinstance(domain, Rectangle):
        vol = metric_rect_volume(chart, domain)
        area = metric_rect_perimeter(chart, domain)
    else:
        raise CapabilityError("necessary_condition expects a disk or rectangle")
    h_inf = _h_infimum(H, chart, domain)
    lhs = 2.0 * h_inf * vol
    return NecessaryCondition(lhs=lhs, area=area, ok=bool(lhs <= area),
                              volume=vol, h_inf=h_inf)


def critical_radius(chart: ConformalChart, H: float, tol: float = 1e-6,
                    delta_max: float = 64.0) -> float:
    """Geodesic radius where the solvability bound flips, by bisection.

    Searches the ok -> not-ok transition of necessary_condition over
    geodesic balls centered at the chart origin.  Raises SearchError if
    the bound never fails up to ``delta_max``.
    """
    if H <= 0:
        raise SearchError("the bound cannot fail for H <= 0")

    def ok(delta):
        disk = Disk(0.0, 0.0, coordinate_ball_radius(chart, delta))
        return necessary_condition(chart, disk, H).ok

    lo = min(tol, 1e-3)
    if not ok(lo):
        raise SearchError(f"bound already fails at delta = {lo:g}")
    hi = 2.0 * lo
    while ok(hi):
        hi *= 2.0
        if hi > delta_max:
            raise SearchError(
                f"necessary condition holds for all delta <= {delta_max:g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ========================================================= flux diagnostics


@dataclass(frozen=True)
class FluxDiagnostics:
    """Divergence-theorem bookkeeping on a concentric sub-disk.

    ``flux`` comes from the conservative face fluxes of the scheme, for
    which the identity 2 H V = flux telescopes exactly up to volume
    quadrature error.  ``nodal_flux`` re-integrates the flux through the
    nearest cell-center ring from independent centered differences; its
    ``nodal_defect`` reflects the genuine O(h^2) error of the solution
    and is the right quantity for convergence-order measurements.
    """

    volume: float
    boundary_area: float
    flux: float
    ratio: float
    necessary_ok: bool
    identity_defect: float
    h_inf: float
    nodal_ring_radius: float = float("nan")
    nodal_flux: float = float("nan")
    nodal_defect: float = float("nan")


def flux_check(sol: GraphSolution, subdomain: Optional[Disk] = None,
               defect_tol: Optional[float] = None) -> FluxDiagnostics:
    """Compare the solved boundary flux with 2 H V on a concentric sub-disk.

    V and A come from metric quadrature; the flux is the discrete face
    flux of the conservative scheme, interpolated linearly between face
    radii.  A defect above ``defect_tol`` (default: a generous O(h^2)
    allowance) raises HypothesisError, since it indicates the solution
    does not actually satisfy the discrete equation.
    """
    if sol.grid_kind != "polar":
        raise CapabilityError("flux diagnostics require a disk solution")
    if not sol.converged:
        raise HypothesisError("flux_check needs a converged solution")
    domain = sol.problem.domain
    if subdomain is None:
        subdomain = domain
    if abs(subdomain.cx - domain.cx) > 1e-14 \
            or abs(subdomain.cy - domain.cy) > 1e-14:
        raise DomainError("flux sub-disks must be concentric with the domain")
    if subdomain.radius > domain.radius * (1.0 + 1e-12):
        raise DomainError("sub-disk exits the solved region")

    r_s = min(subdomain.radius, domain.radius)
    radii = sol.face_radii
    flux = float(np.interp(r_s, radii, sol.flux_profile))

    chart = sol.problem.chart
    disk_s = Disk(domain.cx, domain.cy, r_s)
    vol = metric_disk_volume(chart, disk_s)
    area = metric_disk_perimeter(chart, disk_s)
    h_inf = _h_infimum(sol.problem.H, chart, disk_s)
    lhs = 2.0 * h_inf * vol
    defect = abs(lhs - flux)

    if defect_tol is None:
        h = radii[1] - radii[0]
        defect_tol = 200.0 * h * h * max(1.0, abs(lhs))
    if defect > defect_tol:
        raise HypothesisError(
            f"flux identity defect {defect:.3e} exceeds the quadrature "
            f"allowance {defect_tol:.3e}")

    # independent nodal reconstruction at the nearest usable center ring
    scheme = getattr(sol, "_scheme", None)
    ring_r = nodal_flux = nodal_defect = float("nan")
    if scheme is not None:
        i = int(np.searchsorted(scheme.r_c, r_s, side="right")) - 1
        i = min(max(i, 1), scheme.nr - 2)
        u = sol.u
        ur = (u[i + 1, :] - u[i - 1, :]) / (2.0 * scheme.hr)
        ut = (u[i, scheme.jp] - u[i, scheme.jm]) / (2.0 * scheme.ht)
        ring_r = float(scheme.r_c[i])
        w = np.sqrt(1.0 + scheme.beta_c[i, :]
                    * (ur ** 2 + (ut / ring_r) ** 2))
        nodal_flux = float(np.sum(ur / w) * ring_r * scheme.ht)
        vol_ring = metric_disk_volume(chart, Disk(domain.cx, domain.cy,
                                                  ring_r))
        h_ring = _h_infimum(sol.problem.H, chart,
                            Disk(domain.cx, domain.cy, ring_r))
        nodal_defect = abs(2.0 * h_ring * vol_ring - nodal_flux)

    return FluxDiagnostics(volume=vol, boundary_area=area, flux=flux,
                           ratio=flux / area, necessary_ok=bool(lhs <= area),
                           identity_defect=defect, h_inf=h_inf,
                           nodal_ring_radius=ring_r, nodal_flux=nodal_flux,
                           nodal_defect=nodal_defect)


# ===================================================== geometry round trip


def graph_to_geometry(sol: GraphSolution):
    """Recompute (H, nu) of the solved graph by independent differences.

    Centered nodal differences (not the solver's face fluxes) feed a
    non-conservative evaluation of the operator; the outermost two rings
    are NaN.  nu = 1/W for the upward normal.
    """
    if not sol.converged:
        raise HypothesisError("graph_to_geometry needs a converged solution")
    scheme = sol._scheme
    u = sol.u
    if sol.grid_kind == "polar":
        r = scheme.r_c[:, None]
        ur = np.full_like(u, np.nan)
        ur[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2.0 * scheme.hr)
        ut = (u[:, scheme.jp] - u[:, scheme.jm]) / (2.0 * scheme.ht)
        W = np.sqrt(1.0 + scheme.beta_c * (ur ** 2 + (ut / r) ** 2))
        qr = ur / W
        qt = (ut / r) / W
        div = np.full_like(u, np.nan)
        rqr = r * qr
        div[1:-1, :] = (rqr[2:, :] - rqr[:-2, :]) / (2.0 * scheme.hr * r[1:-1])
        div += (qt[:, scheme.jp] - qt[:, scheme.jm]) / (2.0 * scheme.ht * r)
        H_rec = 0.5 * scheme.beta_c * div
        nu = 1.0 / W
        return H_rec, nu
    # cartesian
    hx, hy = scheme.hx, scheme.hy
    ux = np.full_like(u, np.nan)
    uy = np.full_like(u, np.nan)
    ux[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2.0 * hx)
    uy[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2.0 * hy)
    W = np.sqrt(1.0 + scheme.beta_n * (ux ** 2 + uy ** 2))
    qx, qy = ux / W, uy / W
    div = np.full_like(u, np.nan)
    div[1:-1, 1:-1] = (qx[2:, 1:-1] - qx[:-2, 1:-1]) / (2.0 * hx) \
        + (qy[1:-1, 2:] - qy[1:-1, :-2]) / (2.0 * hy)
    H_rec = 0.5 * scheme.beta_n * div
    nu = 1.0 / W
    return H_rec, nu


# ============================================================== file format


def save_solution(sol: GraphSolution, path) -> str:
    """Write a solution as plain text: header plus (x, y, u, W) rows."""
    rows = np.column_stack([sol.x.ravel(), sol.y.ravel(),
                            sol.u.ravel(), sol.W.ravel()])
    dom = sol.problem.domain
    header = "\n".join([
        "cmclab graph solution v1",
        f"chart: {sol.problem.chart.reference}",
        f"domain: {dom.describe()}",
        f"grid_kind: {sol.grid_kind}",
        f"shape: {sol.u.shape[0]} {sol.u.shape[1]}",
        f"converged: {str(bool(sol.converged)).lower()}",
        f"final_residual: {sol.final_residual:.17g}",
        f"iterations: {sol.iterations}",
        f"max_gradient: {sol.max_gradient:.17g}",
        "columns: x y u W",
    ])
    np.savetxt(path, rows, fmt="%.17g", header=header)
    return str(path)


def load_solution(path) -> dict:
    """Read a solution file back as arrays plus its header metadata."""
    meta = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            text = line.lstrip("#").strip()
            if ":" in text:
                key, value = text.split(":", 1)
                meta[key.strip()] = value.strip()
    body = np.loadtxt(path)
    out = dict(meta)
    if "shape" in meta:
        n0, n1 = map(int, meta["shape"].split())
        out["x"] = body[:, 0].reshape(n0, n1)
        out["y"] = body[:, 1].reshape(n0, n1)
        out["u"] = body[:, 2].reshape(n0, n1)
        out["W"] = body[:, 3].reshape(n0, n1)
    return out
