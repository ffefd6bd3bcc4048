"""Direct solution of the assembled saddle-point system with residual certification.

The block operator solved here is

    [ A   -B^T   0 ] [u]   [load - lift_u]
    [-B    0     w ] [p] = [lift_p       ]
    [ 0   w^T    0 ] [s]   [0            ]

which is the weak Stokes system with the divergence rows negated for
symmetry and one scalar multiplier s enforcing the zero-mean pressure
condition w . p = 0.  A pairing without a discrete inf-sup bound (the
standard bubble) leaves an extra pressure null vector that the multiplier
does not absorb, so the factorization exposes it as a (near-)zero pivot.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .assembly import SaddleSystem

#: A U-factor pivot below this times the largest pivot flags singularity.
PIVOT_RTOL = 1e-12
#: Certified solves must reproduce the right-hand side to this relative residual.
RESIDUAL_TOL = 1e-10


class SolveStatus(Enum):
    SOLVED = "solved"
    SINGULAR = "singular"


class SingularSystemError(RuntimeError):
    """Raised by drivers when a solve reports a singular system."""


@dataclass(frozen=True)
class SolveOutcome:
    """Solution fields (interior velocity dofs, zero-mean pressure) plus certificate."""

    velocity: np.ndarray
    pressure: np.ndarray
    multiplier: float
    relative_residual: float
    status: SolveStatus


def block_operator(system: SaddleSystem) -> tuple[sp.csc_matrix, np.ndarray]:
    """Symmetric indefinite block matrix and right-hand side for `solve_saddle`."""
    if not system.reduced or not system.mean_attached:
        raise ValueError("system must have Dirichlet data applied and mean constraint attached")
    w = sp.csc_matrix(system.mean_weights[:, None])
    matrix = sp.bmat(
        [[system.A, -system.B.T, None], [-system.B, None, w], [None, w.T, None]],
        format="csc",
    )
    n_u = system.A.shape[0]
    lift_u, lift_p = system.lift[:n_u], system.lift[n_u:]
    rhs = np.concatenate([system.load - lift_u, lift_p, [0.0]])
    return matrix, rhs


def solve_saddle(system: SaddleSystem) -> SolveOutcome:
    """Factorize and solve; returns SINGULAR instead of an uncertified solution.

    Singularity is declared on an exactly singular factorization, a U pivot
    below PIVOT_RTOL relative to the largest, a non-finite solution, or a
    residual that misses the certification tolerance.
    """
    matrix, rhs = block_operator(system)
    n_u = system.A.shape[0]
    p = system.pressure_count

    def failed() -> SolveOutcome:
        return SolveOutcome(
            velocity=np.zeros(n_u),
            pressure=np.zeros(p),
            multiplier=0.0,
            relative_residual=np.inf,
            status=SolveStatus.SINGULAR,
        )

    try:
        lu = splu(matrix)
    except RuntimeError:  # "Factor is exactly singular"
        return failed()
    pivots = np.abs(lu.U.diagonal())
    if pivots.min() < PIVOT_RTOL * pivots.max():
        return failed()
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        return failed()

    pressure = x[n_u : n_u + p]
    # The constraint row holds w.p = 0 to machine precision; project the
    # leftover roundoff out.  Interior momentum rows are blind to constant
    # pressure shifts, so the residual is unaffected.
    area = float(system.mean_weights.sum())
    pressure = pressure - (system.mean_weights @ pressure) / area
    outcome = SolveOutcome(
        velocity=x[:n_u],
        pressure=pressure,
        multiplier=float(x[-1]),
        relative_residual=0.0,
        status=SolveStatus.SOLVED,
    )
    residual = verify_residual(system, outcome)
    if residual > RESIDUAL_TOL:
        return failed()
    return SolveOutcome(
        velocity=outcome.velocity,
        pressure=outcome.pressure,
        multiplier=outcome.multiplier,
        relative_residual=residual,
        status=SolveStatus.SOLVED,
    )


def verify_residual(system: SaddleSystem, outcome: SolveOutcome) -> float:
    """Relative residual ||Mx - b|| / ||b|| of the full block system (0 if b = x = 0)."""
    matrix, rhs = block_operator(system)
    x = np.concatenate([outcome.velocity, outcome.pressure, [outcome.multiplier]])
    defect = np.linalg.norm(matrix @ x - rhs)
    scale = np.linalg.norm(rhs)
    if scale == 0.0:
        return float(defect)
    return float(defect / scale)
