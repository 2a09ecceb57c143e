"""Parser/derivative tests for the small expression language."""

import math

import numpy as np
import pytest

from cmclab.expressions import ExpressionError, parse_expression


def test_arithmetic_and_precedence():
    n = parse_expression("2*x^2 - y/4 + 1")
    assert n(3.0, 8.0) == pytest.approx(2 * 9 - 2 + 1)
    # unary minus binds looser than the power
    assert parse_expression("-x^2")(3.0, 0.0) == -9.0
    # power is right-associative
    assert parse_expression("2^3^2")(0.0, 0.0) == 512.0
    assert parse_expression("(2^3)^2")(0.0, 0.0) == 64.0


def test_known_functions():
    cases = {
        "sin(x)": math.sin(0.7),
        "cos(y)": math.cos(-0.2),
        "exp(x*y)": math.exp(-0.14),
        "log(1 + x^2)": math.log(1.49),
        "sqrt(x^2 + y^2)": math.hypot(0.7, -0.2),
        "tanh(x)": math.tanh(0.7),
        "sinh(y)": math.sinh(-0.2),
        "cosh(x)": math.cosh(0.7),
        "tan(y)": math.tan(-0.2),
    }
    for text, want in cases.items():
        assert parse_expression(text)(0.7, -0.2) == pytest.approx(want, rel=1e-14)


def test_vectorized_evaluation():
    n = parse_expression("sin(x)*cos(y) + x*y")
    xs = np.linspace(-1.0, 1.0, 11)
    ys = np.linspace(0.0, 2.0, 11)
    vals = n(xs, ys)
    assert vals.shape == (11,)
    np.testing.assert_allclose(vals, np.sin(xs) * np.cos(ys) + xs * ys,
                               rtol=1e-14)


def test_derivatives_match_closed_forms():
    # d/dx of the conformal factor used for constant-curvature charts
    n = parse_expression("log(2) - log(1 + x^2 + y^2)")
    dx = n.diff("x")
    dy = n.diff("y")
    x, y = 0.5, 0.25
    denom = 1.0 + x * x + y * y
    assert dx(x, y) == pytest.approx(-2 * x / denom, rel=1e-13)
    assert dy(x, y) == pytest.approx(-2 * y / denom, rel=1e-13)
    # second derivative through repeated diff
    dxx = dx.diff("x")
    want = (-2 * denom + 2 * x * 2 * x) / denom ** 2
    assert dxx(x, y) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("text, dvar, point, want", [
    ("tanh(x)", "x", (0.3, 0.0), 1 - math.tanh(0.3) ** 2),
    ("x^3 * y", "x", (2.0, 5.0), 3 * 4.0 * 5.0),
    ("x^3 * y", "y", (2.0, 5.0), 8.0),
    ("sqrt(x)", "x", (4.0, 0.0), 0.25),
    ("exp(2*x)", "x", (0.1, 0.0), 2 * math.exp(0.2)),
    ("sin(x*y)", "y", (0.4, 0.7), 0.4 * math.cos(0.28)),
])
def test_derivative_table(text, dvar, point, want):
    d = parse_expression(text).diff(dvar)
    assert d(*point) == pytest.approx(want, rel=1e-13)


def test_derivative_against_finite_difference():
    rng = np.random.default_rng(7)
    n = parse_expression("exp(x*y) * sin(x) + tanh(y - x^2)")
    dx = n.diff("x")
    h = 1e-6
    for _ in range(5):
        x, y = rng.uniform(-1, 1, size=2)
        fd = (n(x + h, y) - n(x - h, y)) / (2 * h)
        assert dx(x, y) == pytest.approx(fd, rel=2e-9, abs=2e-9)


@pytest.mark.parametrize("bad", ["x +", "foo(x)", "1 2", "(x", "z * 2", ""])
def test_parse_errors(bad):
    with pytest.raises(ExpressionError):
        parse_expression(bad)


def test_error_messages_carry_position():
    with pytest.raises(ExpressionError, match="position 3"):
        parse_expression("x +")
    with pytest.raises(ExpressionError, match="unknown name"):
        parse_expression("q + 1")
