"""Scalar fields with two derivatives: analytic jets and grid stencils.

Everything downstream (curvature, fundamental forms, structure residuals)
consumes a ``Jet2``: value, gradient and Hessian of a scalar evaluated on
an array of points.  Analytic fields supply exact jets; gridded fields
fall back to centered second-order stencils and mark the boundary ring
with NaN so consumers can keep honest error bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .expressions import parse_expression


class BoundaryStencilError(ValueError):
    """A derivative was requested too close to the edge of a sampled grid."""


@dataclass
class Jet2:
    """Value, first and second derivatives of a scalar field."""

    f: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    fxx: np.ndarray
    fxy: np.ndarray
    fyy: np.ndarray

    def laplacian(self):
        return self.fxx + self.fyy


class AnalyticScalar:
    """Scalar field backed by closed-form callables for all jet entries."""

    def __init__(self, f, fx, fy, fxx, fxy, fyy, label: str = ""):
        self._parts = (f, fx, fy, fxx, fxy, fyy)
        self.label = label

    @classmethod
    def from_expression(cls, text: str) -> "AnalyticScalar":
        root = parse_expression(text)
        dx = root.diff("x")
        dy = root.diff("y")
        return cls(root, dx, dy, dx.diff("x"), dx.diff("y"), dy.diff("y"),
                   label=text)

    @classmethod
    def constant(cls, value: float) -> "AnalyticScalar":
        c = float(value)
        zero = lambda x, y: np.zeros(np.broadcast(x, y).shape)
        return cls(lambda x, y: np.full(np.broadcast(x, y).shape, c),
                   zero, zero, zero, zero, zero, label=repr(c))

    def jet(self, x, y) -> Jet2:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        vals = [np.broadcast_to(np.asarray(p(x, y), dtype=float),
                                np.broadcast(x, y).shape).copy()
                for p in self._parts]
        return Jet2(*vals)

    def __call__(self, x, y):
        return self._parts[0](np.asarray(x, dtype=float), np.asarray(y, dtype=float))


# ------------------------------------------------- centered finite stencils
#
# All stencils are centered and second order.  Rather than degrade to
# one-sided differences at array edges, the edge ring is set to NaN; the
# caller tracks the valid margin.

def diff_x(f: np.ndarray, h: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[1:-1, :] = (f[2:, :] - f[:-2, :]) / (2.0 * h)
    return out


def diff_y(f: np.ndarray, h: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * h)
    return out


def diff_xx(f: np.ndarray, h: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[1:-1, :] = (f[2:, :] - 2.0 * f[1:-1, :] + f[:-2, :]) / (h * h)
    return out


def diff_yy(f: np.ndarray, h: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[:, 1:-1] = (f[:, 2:] - 2.0 * f[:, 1:-1] + f[:, :-2]) / (h * h)
    return out


def diff_xy(f: np.ndarray, hx: float, hy: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[1:-1, 1:-1] = (f[2:, 2:] - f[2:, :-2] - f[:-2, 2:] + f[:-2, :-2]) \
        / (4.0 * hx * hy)
    return out


def grid_jet(f: np.ndarray, hx: float, hy: float) -> Jet2:
    """Full second-order jet of a sampled field; NaN on the outer ring."""
    return Jet2(f.copy(), diff_x(f, hx), diff_y(f, hy),
                diff_xx(f, hx), diff_xy(f, hx, hy), diff_yy(f, hy))


def interior(arr: np.ndarray, margin: int) -> np.ndarray:
    """View of ``arr`` with ``margin`` rings stripped from every edge."""
    if margin == 0:
        return arr
    if 2 * margin >= min(arr.shape[:2]):
        raise BoundaryStencilError(
            f"margin {margin} leaves no interior for shape {arr.shape}")
    return arr[margin:-margin, margin:-margin]


def residual_stats(arr: np.ndarray, margin: int = 0):
    """(max, rms) of |arr| over the interior; rejects NaN contamination."""
    core = interior(np.abs(np.asarray(arr)), margin)
    if np.any(~np.isfinite(core)):
        raise BoundaryStencilError(
            "non-finite values inside the trusted interior region")
    return float(core.max()), float(np.sqrt(np.mean(core ** 2)))


class GridScalar:
    """Scalar sampled on a uniform rectangular grid.

    Jets for off-node points come from bilinear interpolation of the
    node-wise stencil jets, so queries must stay at least one spacing
    away from the sampled boundary.
    """

    def __init__(self, values: np.ndarray, x0: float, y0: float,
                 hx: float, hy: float, label: str = "grid"):
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != 2 or min(self.values.shape) < 5:
            raise ValueError("grid fields need a 2-d array, at least 5x5")
        self.x0, self.y0 = float(x0), float(y0)
        self.hx, self.hy = float(hx), float(hy)
        self.label = label
        self._jets = grid_jet(self.values, self.hx, self.hy)

    @property
    def shape(self):
        return self.values.shape

    def _locate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        gx = (x - self.x0) / self.hx
        gy = (y - self.y0) / self.hy
        nx, ny = self.values.shape
        # interpolation cell corners must avoid the NaN boundary ring
        if np.any(gx < 1.0) or np.any(gx > nx - 2.0) \
                or np.any(gy < 1.0) or np.any(gy > ny - 2.0):
            raise BoundaryStencilError(
                "query point within one grid spacing of the sampled boundary")
        ix = np.clip(np.floor(gx).astype(int), 1, nx - 3)
        iy = np.clip(np.floor(gy).astype(int), 1, ny - 3)
        return ix, iy, gx - ix, gy - iy

    def _bilinear(self, comp, ix, iy, tx, ty):
        c00 = comp[ix, iy]
        c10 = comp[ix + 1, iy]
        c01 = comp[ix, iy + 1]
        c11 = comp[ix + 1, iy + 1]
        return (c00 * (1 - tx) * (1 - ty) + c10 * tx * (1 - ty)
                + c01 * (1 - tx) * ty + c11 * tx * ty)

    def jet(self, x, y) -> Jet2:
        ix, iy, tx, ty = self._locate(x, y)
        j = self._jets
        return Jet2(*(self._bilinear(c, ix, iy, tx, ty)
                      for c in (j.f, j.fx, j.fy, j.fxx, j.fxy, j.fyy)))

    def __call__(self, x, y):
        ix, iy, tx, ty = self._locate(x, y)
        return self._bilinear(self.values, ix, iy, tx, ty)
