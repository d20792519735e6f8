"""PSD-affine feasibility via alternating projections with Dykstra correction.

Problems have the form: find Hermitian X >= 0 with M vec(X) = b, where vec
is the isometric real vectorization of the Hermitian space. The iteration
alternates the Frobenius-nearest PSD projection with the Euclidean
projection onto the affine set, with Dykstra's correction terms so the
candidate sequence converges to a point of the intersection whenever one
exists.

Infeasibility detection is heuristic: when the best combined residual
stops improving (plateau) at a level well above the feasibility tolerance,
the problem is declared not feasible at tolerance. No dual certificate is
produced; near-boundary instances come back as inconclusive instead.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import devectorize_hermitian, project_psd, vectorize_hermitian

__all__ = [
    "Status",
    "AffineConstraintSet",
    "SolverConfig",
    "FeasibilityReport",
    "project_affine",
    "solve",
]


class Status(enum.Enum):
    FEASIBLE = "feasible"
    NOT_FEASIBLE_AT_TOLERANCE = "not-feasible-at-tolerance"
    ITERATION_LIMIT = "iteration-limit"


@dataclass(frozen=True)
class AffineConstraintSet:
    """Affine constraints M vec(X) = b over Hermitian ``dim x dim`` matrices.

    The pseudo-inverse of M is precomputed once; constraint rows need not be
    linearly independent, and an inconsistent system simply projects onto its
    least-squares affine set (the reported residual then never reaches the
    feasibility tolerance). Singular values below ``rcond`` times the largest
    are treated as rank noise: constraint matrices assembled from numerical
    channel data carry O(1e-15) junk directions that would otherwise be
    inverted and wreck the projection.
    """

    dim: int
    matrix: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    rcond: float = 1e-10
    pinv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.rhs, dtype=float)
        if m.ndim != 2 or m.shape[1] != self.dim * self.dim:
            raise ValueError(
                f"constraint matrix shape {m.shape} does not match dim {self.dim}"
            )
        if m.shape[0] < 1:
            raise ValueError("constraint set needs at least one row")
        if b.shape != (m.shape[0],):
            raise ValueError(f"rhs length {b.shape} does not match {m.shape[0]} rows")
        if not (np.isfinite(m).all() and np.isfinite(b).all()):
            raise ValueError("constraints contain non-finite entries")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "pinv", np.linalg.pinv(m, rcond=self.rcond))

    def residual(self, x: np.ndarray) -> float:
        """Euclidean residual ||M vec(X) - b|| of a Hermitian matrix."""
        return float(np.linalg.norm(self.matrix @ vectorize_hermitian(x) - self.rhs))


@dataclass(frozen=True)
class SolverConfig:
    eps_feas: float = 1e-7
    max_iter: int = 20000
    eps_plateau: float = 1e-12
    initial_point: str = "affine_zero"

    def __post_init__(self):
        if self.eps_feas <= 0:
            raise ValueError("eps_feas must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.initial_point != "affine_zero":
            raise ValueError(f"unknown initial point policy {self.initial_point!r}")


@dataclass(frozen=True)
class FeasibilityReport:
    status: Status
    solution: np.ndarray | None
    residual_affine: float
    residual_psd: float
    iterations: int


def project_affine(x: np.ndarray, constraints: AffineConstraintSet) -> np.ndarray:
    """Euclidean projection of a Hermitian matrix onto {X : M vec(X) = b}."""
    v = vectorize_hermitian(x)
    v = v - constraints.pinv @ (constraints.matrix @ v - constraints.rhs)
    return devectorize_hermitian(v)


def _psd_defect(x: np.ndarray) -> float:
    w = np.linalg.eigvalsh(0.5 * (x + x.conj().T))
    return max(0.0, -float(w[0]))


def solve(constraints: AffineConstraintSet, config: SolverConfig = SolverConfig()) -> FeasibilityReport:
    """Decide feasibility of the PSD cone intersected with the affine set.

    The candidate tracked for the verdict is the PSD-projected iterate, which
    is exactly positive semidefinite by construction, so its affine residual
    alone measures distance from feasibility. Residual improvement is
    checkpointed every 1000 iterations; a plateau with best residual at
    least ``10 * eps_feas`` is declared not feasible, a plateau below that
    is inconclusive (iteration limit), as is exhausting ``max_iter``.
    """
    m, b, mp = constraints.matrix, constraints.rhs, constraints.pinv

    def proj_affine_mat(h: np.ndarray) -> np.ndarray:
        v = vectorize_hermitian(h)
        return devectorize_hermitian(v - mp @ (m @ v - b))

    x = proj_affine_mat(np.zeros((constraints.dim, constraints.dim)))
    p = np.zeros_like(x)
    q = np.zeros_like(x)

    best = np.inf
    best_candidate = x
    checkpoints: list[float] = []
    status = Status.ITERATION_LIMIT
    iterations = config.max_iter

    for it in range(1, config.max_iter + 1):
        y = project_psd(x + p)
        p = x + p - y
        r_aff = float(np.linalg.norm(m @ vectorize_hermitian(y) - b))
        if r_aff < best:
            best = r_aff
            best_candidate = y
        if r_aff < config.eps_feas:
            status = Status.FEASIBLE
            iterations = it
            break
        x_new = proj_affine_mat(y + q)
        q = y + q - x_new
        x = x_new
        if it % 1000 == 0:
            checkpoints.append(best)
            if len(checkpoints) >= 2 and checkpoints[-2] - checkpoints[-1] < config.eps_plateau:
                iterations = it
                if best >= 10.0 * config.eps_feas:
                    status = Status.NOT_FEASIBLE_AT_TOLERANCE
                break

    # Residuals are re-measured from the candidate matrix itself, never from
    # solver internals.
    candidate = best_candidate
    r_aff = constraints.residual(candidate)
    r_psd = _psd_defect(candidate)
    solution = candidate if status is Status.FEASIBLE else None
    if status is Status.FEASIBLE and not (r_aff < config.eps_feas and r_psd < config.eps_feas):
        # Defensive: the PSD-projected candidate should always satisfy both.
        status = Status.ITERATION_LIMIT
        solution = None
    return FeasibilityReport(status, solution, r_aff, r_psd, iterations)
