"""Exact bivariate polynomial arithmetic over the rationals.

Everything downstream that has to be exact -- bubble definitions, the
macro-patch coupling matrices, reference-element integrals, manufactured
right-hand sides -- is built on this module.  Coefficients are
``fractions.Fraction``, so arithmetic never rounds; floating point enters
only through :meth:`Poly2.__call__`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Union

import numpy as np

#: Exact scalar type used throughout the package.
Rational = Fraction

Scalar = Union[int, Fraction]

#: Per-variable degree cap.  Everything built here stays at degree <= 8 per
#: variable (bubble squared); the cap guards against runaway products.
MAX_DEGREE = 16


def _as_fraction(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    raise TypeError(f"exact coefficient expected (int or Fraction), got {type(value).__name__}")


class Poly2:
    """Sparse bivariate polynomial ``sum c_ij * x^i * y^j`` with exact coefficients.

    Zero coefficients are never stored, so ``p.coeffs == q.coeffs`` iff the
    polynomials are identical.  Instances are treated as immutable.
    """

    __slots__ = ("coeffs", "_grid")

    def __init__(self, coeffs: Mapping[tuple[int, int], Scalar] | None = None):
        clean: dict[tuple[int, int], Fraction] = {}
        for (i, j), raw in (coeffs or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent ({i}, {j})")
            c = _as_fraction(raw)
            if c:
                clean[(int(i), int(j))] = c
        self.coeffs = clean
        self._grid: np.ndarray | None = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: Scalar) -> "Poly2":
        return cls({(0, 0): value})

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> tuple[int, int]:
        """Per-variable degrees (0, 0) for the zero polynomial."""
        if not self.coeffs:
            return (0, 0)
        return (max(i for i, _ in self.coeffs), max(j for _, j in self.coeffs))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Poly2):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly2.constant(other).coeffs
        return NotImplemented

    __hash__ = None  # mutable coefficient dict; not hashable

    def __repr__(self) -> str:
        if not self.coeffs:
            return "Poly2(0)"
        terms = []
        for (i, j), c in sorted(self.coeffs.items()):
            body = (f"x{'' if i == 1 else f'^{i}'}" if i else "") + (
                f"y{'' if j == 1 else f'^{j}'}" if j else ""
            )
            terms.append(f"{c}" + (f"*{body}" if body else ""))
        return "Poly2(" + " + ".join(terms) + ")"

    # -- exact arithmetic ----------------------------------------------------

    def __add__(self, other: "Poly2 | Scalar") -> "Poly2":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            s = out.get(key, Fraction(0)) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2({key: -c for key, c in self.coeffs.items()})

    def __sub__(self, other: "Poly2 | Scalar") -> "Poly2":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: "Poly2 | Scalar") -> "Poly2":
        return (-self) + other

    def __mul__(self, other: "Poly2 | Scalar") -> "Poly2":
        if isinstance(other, (int, Fraction, np.integer)):
            c = _as_fraction(other)
            return Poly2({key: c * v for key, v in self.coeffs.items()})
        if not isinstance(other, Poly2):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Poly2()
        di = self.degree[0] + other.degree[0]
        dj = self.degree[1] + other.degree[1]
        if di > MAX_DEGREE or dj > MAX_DEGREE:
            raise ValueError(f"product degree ({di}, {dj}) exceeds cap {MAX_DEGREE}")
        out: dict[tuple[int, int], Fraction] = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                key = (i1 + i2, j1 + j2)
                s = out.get(key, Fraction(0)) + c1 * c2
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return Poly2(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly2":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Poly2.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    # -- calculus ------------------------------------------------------------

    def diff(self, var: str) -> "Poly2":
        """Exact partial derivative with respect to ``"x"`` or ``"y"``."""
        if var == "x":
            return Poly2({(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i})
        if var == "y":
            return Poly2({(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j})
        raise ValueError(f"var must be 'x' or 'y', got {var!r}")

    def integrate_unit_square(self) -> Fraction:
        """Exact value of the integral over (0,1)^2 by the termwise power rule."""
        total = Fraction(0)
        for (i, j), c in self.coeffs.items():
            total += c / ((i + 1) * (j + 1))
        return total

    # -- evaluation ------------------------------------------------------------

    def __call__(self, x, y):
        """Evaluate in floating point; accepts scalars or numpy arrays.

        Horner in x with inner Horner in y on a cached dense coefficient
        grid, so repeated quadrature-point evaluation is vectorized.
        """
        if self._grid is None:
            di, dj = self.degree
            grid = np.zeros((di + 1, dj + 1))
            for (i, j), c in self.coeffs.items():
                grid[i, j] = float(c)
            self._grid = grid
        grid = self._grid
        xa = np.asarray(x, dtype=float)
        ya = np.asarray(y, dtype=float)
        acc = np.zeros(np.broadcast(xa, ya).shape)
        for row in grid[::-1]:
            row_val = np.zeros_like(acc)
            for c in row[::-1]:
                row_val = row_val * ya + c
            acc = acc * xa + row_val
        if acc.ndim == 0:
            return float(acc)
        return acc

    def eval_exact(self, x: Scalar, y: Scalar) -> Fraction:
        """Evaluate with exact rational arithmetic (oracle for __call__)."""
        xf, yf = _as_fraction(x), _as_fraction(y)
        total = Fraction(0)
        for (i, j), c in self.coeffs.items():
            total += c * xf**i * yf**j
        return total

    def fix_x(self, value: Scalar) -> "Poly2":
        """Substitute x = value exactly, leaving a polynomial in y."""
        v = _as_fraction(value)
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in self.coeffs.items():
            key = (0, j)
            s = out.get(key, Fraction(0)) + c * v**i
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return Poly2(out)

    def fix_y(self, value: Scalar) -> "Poly2":
        """Substitute y = value exactly, leaving a polynomial in x."""
        v = _as_fraction(value)
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in self.coeffs.items():
            key = (i, 0)
            s = out.get(key, Fraction(0)) + c * v**j
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return Poly2(out)


def _coerce(value) -> "Poly2":
    if isinstance(value, Poly2):
        return value
    if isinstance(value, (int, Fraction, np.integer)):
        return Poly2.constant(value)
    return NotImplemented


#: The coordinate monomials; bubbles and manufactured solutions are built
#: from these by plain arithmetic.
X = Poly2({(1, 0): 1})
Y = Poly2({(0, 1): 1})
ONE = Poly2({(0, 0): 1})
ZERO = Poly2()
