"""Conformal base charts: metric factors, curvature, geodesic balls.

Every base metric here is conformal, g = e^{2 phi}(dx^2 + dy^2), so one
scalar field phi determines everything.  This walk-through checks the
computed Gauss curvature against the constant-curvature models and the
closed-form geodesic-ball geometry against small-radius expansions.
"""

import math

import numpy as np

from cmclab.ambient import (ConformalChart, Rectangle, ball_geometry,
                            curvature_infimum, gauss_curvature)

print("=== constant-curvature model charts ===")
for kappa0 in (-1.0, 0.0, 1.0):
    chart = ConformalChart.constant_curvature(kappa0)
    xs = np.linspace(-0.4, 0.4, 9)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    K = gauss_curvature(chart, (X, Y))
    print(f"kappa0 = {kappa0:+.0f}: chart {chart.reference!r:16s} "
          f"max |K - kappa0| = {np.max(np.abs(K - kappa0)):.2e}")

print()
print("=== a variable-curvature chart from an expression ===")
# e^{2 phi} with phi = x^2 gives K = -e^{-2 phi} lap(phi) = -2 e^{-2 x^2}
chart = ConformalChart.from_expression("x^2")
xs = np.linspace(-1.0, 1.0, 201)
K = gauss_curvature(chart, (xs, np.zeros_like(xs)))
print(f"K(0, 0)        = {gauss_curvature(chart, (0.0, 0.0)):+.6f}"
      "  (expect -2)")
print(f"min K on line  = {K.min():+.6f}")
summary = curvature_infimum(chart, Rectangle(-1.0, 1.0, -1.0, 1.0))
print(f"curvature_infimum over [-1,1]^2 box: {summary.c_inf:+.6f}")

print()
print("=== geodesic balls: closed forms vs small-radius expansion ===")
print("A(B_delta) ~ 2 pi delta (1 - kappa0 delta^2 / 6)")
print("V(B_delta) ~ pi delta^2 (1 - kappa0 delta^2 / 12)")
for kappa0 in (-1.0, 0.0, 1.0):
    delta = 0.05
    geom = ball_geometry(kappa0, delta)
    area_series = 2 * math.pi * delta * (1 - kappa0 * delta ** 2 / 6)
    vol_series = math.pi * delta ** 2 * (1 - kappa0 * delta ** 2 / 12)
    print(f"kappa0 = {kappa0:+.0f}: |A - series| = "
          f"{abs(geom.boundary_length - area_series):.2e}, "
          f"|V - series| = {abs(geom.volume - vol_series):.2e}")

print()
print("=== hyperbolic balls grow exponentially; the ratio A/V -> 1 ===")
print("delta   boundary length      volume          A/V")
for delta in (1.0, 2.0, 5.0, 10.0):
    geom = ball_geometry(-1.0, delta)
    print(f"{delta:5.1f}   {geom.boundary_length:14.6f}  "
          f"{geom.volume:14.6f}   {geom.ratio:.6f}")
print("(the limit A/V -> sqrt(-kappa0) is what makes the flux obstruction")
print(" on hyperbolic bases saturate instead of growing without bound)")
