"""Reference-square basis functions and tensor Gauss quadrature.

The reference element is the unit square (0,1)^2.  Vertex ordering is
counterclockwise from the lower-left corner -- LL, LR, UR, UL -- and that
ordering is the package-wide convention for element connectivity, local
degrees of freedom and quadrature tensors.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .poly import ONE, Poly2, X, Y


class BubbleKind(str, Enum):
    """The four interior bubble enrichments of the velocity space.

    Only CORNER and LINEAR yield a stable pairing with continuous bilinear
    pressure; STANDARD and QUADSYM leave a spurious pressure mode (see the
    stability module).
    """

    STANDARD = "standard"
    CORNER = "corner"
    LINEAR = "linear"
    QUADSYM = "quadsym"


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Legendre rule on the unit square."""

    points: np.ndarray  # (m, 2)
    weights: np.ndarray  # (m,), positive, summing to 1


@lru_cache(maxsize=None)
def q1_basis() -> tuple[Poly2, Poly2, Poly2, Poly2]:
    """Bilinear hat functions, ordered LL, LR, UR, UL.

    Each is 1 at its own vertex, 0 at the other three, and they sum to the
    constant 1.
    """
    return (
        (ONE - X) * (ONE - Y),
        X * (ONE - Y),
        X * Y,
        (ONE - X) * Y,
    )


@lru_cache(maxsize=None)
def bubble(kind: BubbleKind) -> Poly2:
    """Interior bubble of the requested kind, exactly as a `Poly2`.

    Every variant vanishes identically on the boundary of the unit square
    and equals 1 at the centroid (1/2, 1/2).
    """
    kind = BubbleKind(kind)
    base = X * Y * (ONE - X) * (ONE - Y)
    if kind is BubbleKind.STANDARD:
        return 16 * base
    if kind is BubbleKind.CORNER:
        return 64 * (ONE - X) * (ONE - Y) * base
    if kind is BubbleKind.LINEAR:
        return 8 * (ONE + X + Y) * base
    if kind is BubbleKind.QUADSYM:
        return (X**2 + Y**2 - X - Y + Fraction(33, 2)) * base
    raise ValueError(f"unknown bubble kind {kind!r}")


@lru_cache(maxsize=None)
def velocity_basis(kind: BubbleKind) -> tuple[Poly2, ...]:
    """Scalar velocity shape functions on the reference square: 4 hats + bubble."""
    return q1_basis() + (bubble(kind),)


def gauss_rule(n: int) -> QuadratureRule:
    """n x n tensor Gauss-Legendre rule on (0,1)^2, exact for degree <= 2n-1 per variable."""
    if not 1 <= n <= 8:
        raise ValueError(f"gauss_rule supports 1 <= n <= 8, got {n}")
    nodes, weights = np.polynomial.legendre.leggauss(n)
    x1 = 0.5 * (nodes + 1.0)
    w1 = 0.5 * weights
    xx, yy = np.meshgrid(x1, x1, indexing="ij")
    points = np.column_stack([xx.ravel(), yy.ravel()])
    w = np.outer(w1, w1).ravel()
    return QuadratureRule(points=points, weights=w)


def tabulate(functions, rule: QuadratureRule) -> np.ndarray:
    """Values of each function at the rule's points, shape (len(functions), m)."""
    x, y = rule.points[:, 0], rule.points[:, 1]
    return np.array([f(x, y) for f in functions])


def tabulate_gradients(functions, rule: QuadratureRule) -> np.ndarray:
    """Reference gradients at the rule's points, shape (2, len(functions), m)."""
    x, y = rule.points[:, 0], rule.points[:, 1]
    dx = np.array([f.diff("x")(x, y) for f in functions])
    dy = np.array([f.diff("y")(x, y) for f in functions])
    return np.stack([dx, dy])
