"""Exact bivariate polynomial algebra."""

from fractions import Fraction

import numpy as np
import pytest

from quadmini.poly import MAX_DEGREE, ONE, X, Y, ZERO, Poly2


def _random_poly(rng, deg=3):
    return Poly2(
        {
            (i, j): Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5)))
            for i in range(deg + 1)
            for j in range(deg + 1)
        }
    )


def test_binomial_expansion_is_exact():
    assert (X + Y) ** 2 == X**2 + 2 * X * Y + Y**2
    assert (X - Y) * (X + Y) == X**2 - Y**2


def test_scalar_arithmetic_coerces_to_fractions():
    p = (1 - X) * (1 - Y) - Fraction(1, 2)
    assert p.eval_exact(0, 0) == Fraction(1, 2)
    assert p.eval_exact(1, Fraction(2, 3)) == Fraction(-1, 2)


def test_product_rule_on_random_polynomials():
    rng = np.random.default_rng(20260815)
    for _ in range(8):
        p, q = _random_poly(rng), _random_poly(rng)
        assert (p * q).diff("x") == p.diff("x") * q + p * q.diff("x")
        assert (p * q).diff("y") == p.diff("y") * q + p * q.diff("y")


@pytest.mark.parametrize("i", range(5))
@pytest.mark.parametrize("j", range(5))
def test_monomial_integrals(i, j):
    assert (X**i * Y**j).integrate_unit_square() == Fraction(1, (i + 1) * (j + 1))


def test_vectorized_call_matches_exact_evaluation():
    rng = np.random.default_rng(7)
    p = _random_poly(rng)
    xs = np.array([0.0, 0.25, 0.5, 1.0])
    ys = np.array([1.0, 0.75, 0.125, 0.0])
    vals = p(xs, ys)
    assert vals.shape == xs.shape
    for k in range(xs.size):
        exact = p.eval_exact(Fraction(xs[k]), Fraction(ys[k]))
        assert vals[k] == pytest.approx(float(exact), rel=1e-14, abs=1e-14)


def test_call_broadcasts_grids():
    grid = np.linspace(0.0, 1.0, 6).reshape(2, 3)
    assert (X * Y)(grid, grid).shape == (2, 3)


def test_fixing_a_variable_restricts_the_polynomial():
    p = (X - Y) ** 3
    a = Fraction(1, 3)
    assert p.fix_x(a).eval_exact(0, Fraction(1, 2)) == p.eval_exact(a, Fraction(1, 2))
    assert p.fix_y(a).eval_exact(a, 0) == 0  # x = y kills (x - y)^3


def test_degree_bookkeeping():
    assert (X**2 * Y).degree == (2, 1)
    assert ZERO.degree == (0, 0)
    assert ZERO.is_zero and (X * 0).is_zero
    assert ONE == 1


def test_degree_cap_guards_runaway_products():
    top = X**MAX_DEGREE  # at the cap: fine
    with pytest.raises(ValueError):
        top * X


def test_power_rejects_bad_exponents():
    with pytest.raises(ValueError):
        X ** (-1)
    with pytest.raises(ValueError):
        X**0.5


def test_diff_rejects_unknown_variable():
    with pytest.raises(ValueError):
        X.diff("z")
