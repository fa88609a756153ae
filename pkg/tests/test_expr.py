import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from djopt.expr import (
    Add,
    Call,
    Const,
    DomainError,
    ExprSyntaxError,
    Mul,
    Neg,
    Pow,
    Var,
    differentiate_at,
    evaluate,
    parse,
    pretty,
    second_directional,
)
from djopt.numeric_core import DimensionMismatch

from helpers import fd_gradient, fd_hessian, random_expression


def test_parse_examples():
    assert parse("x1^2 + x2^2") == Add(Pow(Var(1), 2), Pow(Var(2), 2))
    assert parse("sin(x1)*x2") == Mul(Call("sin", Var(1)), Var(2))


def test_syntax_error_points_at_the_operator():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x1 + * x2")
    assert info.value.position == 5
    assert (info.value.line, info.value.column) == (1, 6)


@pytest.mark.parametrize("text", ["", "x1 +", "(x1", "x0", "foo(x1)", "x1 ^ x2", "x1 x2", "2..3"])
def test_malformed_inputs_raise(text):
    with pytest.raises(ExprSyntaxError):
        parse(text)


def test_precedence_of_power_over_unary_minus():
    assert parse("-x1^2") == Neg(Pow(Var(1), 2))
    assert evaluate(parse("-x1^2"), [3.0]) == -9.0
    assert evaluate(parse("2*x1^2"), [3.0]) == 18.0


def test_rational_constants_are_exact():
    assert parse("0.1") == Const(Fraction(1, 10))


def test_derivative_examples():
    m = differentiate_at(["x1*x2"], [2, 3])
    assert m.value[0] == 6
    assert np.array_equal(m.jacobian[0], [3, 2])
    assert np.array_equal(m.hessians[0], [[0, 1], [1, 0]])
    m = differentiate_at(["exp(x1)"], [0])
    assert (m.value[0], m.jacobian[0, 0], m.hessians[0][0, 0]) == (1.0, 1.0, 1.0)


def test_domain_errors():
    with pytest.raises(DomainError):
        differentiate_at(["log(x1)"], [0.0])
    with pytest.raises(DomainError):
        differentiate_at(["1 / (x1 - 1)"], [1.0])
    with pytest.raises(DomainError):
        evaluate(parse("log(x1 - 2)"), [1.0])


def test_variable_outside_point_dimension():
    with pytest.raises(DimensionMismatch):
        differentiate_at(["x3"], [1.0, 2.0])


def test_second_directional_examples():
    ident = differentiate_at(["x1", "x2"], [0.3, -0.7])
    assert np.array_equal(second_directional(ident, [1, 1]), [0, 0])
    m = differentiate_at(["x1^2", "x1*x2"], [0.5, 0.5])
    assert np.array_equal(second_directional(m, [1, 1]), [2, 2])
    with pytest.raises(DimensionMismatch):
        second_directional(m, [1, 1, 1])


def test_jacobian_shape_and_hessian_symmetry():
    rng = np.random.default_rng(0)
    exprs = [random_expression(rng, 3) for _ in range(4)]
    m = differentiate_at(exprs, rng.uniform(-2, 2, 3))
    assert m.jacobian.shape == (4, 3)
    for H in m.hessians:
        assert np.array_equal(H, H.T)


@given(seed=st.integers(0, 100_000))
def test_derivatives_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    text = random_expression(rng, n)
    x = rng.uniform(-2, 2, n)
    e = parse(text)
    m = differentiate_at([e], x)
    fun = lambda p: evaluate(e, p)  # noqa: E731
    scale = max(1.0, abs(m.value[0]))
    g_fd = fd_gradient(fun, x)
    H_fd = fd_hessian(fun, x)
    assert np.max(np.abs(m.jacobian[0] - g_fd)) <= 1e-6 * max(scale, np.max(np.abs(g_fd)))
    assert np.max(np.abs(m.hessians[0] - H_fd)) <= 1e-6 * max(scale, np.max(np.abs(H_fd)))


@given(seed=st.integers(0, 100_000))
def test_second_directional_matches_jacobian_differences(seed):
    rng = np.random.default_rng(seed)
    n = 3
    exprs = [random_expression(rng, n, 2) for _ in range(2)]
    x = rng.uniform(-1, 1, n)
    u = rng.normal(size=n)
    h = 1e-5
    jac_diff = (differentiate_at(exprs, x + h * u).jacobian - differentiate_at(exprs, x - h * u).jacobian) / (2 * h)
    got = second_directional(differentiate_at(exprs, x), u)
    assert np.allclose(got, jac_diff @ u, rtol=1e-6, atol=1e-6)


@given(seed=st.integers(0, 100_000))
def test_pretty_parse_round_trip(seed):
    rng = np.random.default_rng(seed)
    e = parse(random_expression(rng, 3))
    canonical = pretty(e)
    assert parse(canonical) == e
    assert pretty(parse(canonical)) == canonical


@pytest.mark.parametrize("text", ["x1^2 + x2^2", "-x1^2", "2 * x1^2", "x1 - (x2 - x3)", "x1 / (x2 * x3)",
                                  "sin(x1) * x2", "(-x1)^3", "0.5 * x1", "exp(-x1)", "x1^-2"])
def test_canonical_corpus_is_fixed_by_pretty(text):
    assert pretty(parse(text)) == text


def test_evaluate_agrees_with_math():
    x = [0.3, -1.2]
    assert evaluate(parse("exp(x1) * cos(x2) - log(2 + x2)"), x) == pytest.approx(
        math.exp(0.3) * math.cos(-1.2) - math.log(0.8))
