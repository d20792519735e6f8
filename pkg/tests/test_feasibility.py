import numpy as np
import pytest

from chancompat.feasibility import (
    AffineConstraintSet,
    SolverConfig,
    Status,
    project_affine,
    solve,
)
from chancompat.linalg import dag, frob, vectorize_hermitian


def trace_constraint(d, value):
    """Single row enforcing Tr X = value in vectorized coordinates."""
    row = vectorize_hermitian(np.eye(d))
    return AffineConstraintSet(d, row.reshape(1, -1), np.array([float(value)]))


def test_trace_one_is_feasible():
    rep = solve(trace_constraint(2, 1.0))
    assert rep.status is Status.FEASIBLE
    x = rep.solution
    assert abs(np.trace(x).real - 1.0) < 1e-9
    assert np.linalg.eigvalsh(0.5 * (x + dag(x)))[0] > -1e-9
    assert rep.residual_affine < 1e-7 and rep.residual_psd < 1e-7


def test_negative_trace_is_not_feasible():
    rep = solve(trace_constraint(2, -1.0))
    assert rep.status is Status.NOT_FEASIBLE_AT_TOLERANCE
    assert rep.solution is None
    assert rep.residual_affine >= 1e-6


def test_project_affine_idempotent_and_exact():
    rng = np.random.default_rng(0)
    cons = trace_constraint(3, 2.0)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x = 0.5 * (g + dag(g))
    p1 = project_affine(x, cons)
    assert abs(np.trace(p1).real - 2.0) < 1e-12
    assert frob(project_affine(p1, cons) - p1) < 1e-12
    # points already in the set are untouched
    x_in = x + (2.0 - np.trace(x).real) * np.eye(3) / 3
    assert frob(project_affine(x_in, cons) - x_in) < 1e-12


def test_project_affine_least_norm_correction():
    cons = trace_constraint(2, 2.0)
    out = project_affine(np.zeros((2, 2)), cons)
    assert frob(out - np.eye(2)) < 1e-12


def test_solver_determinism():
    cons = trace_constraint(2, -1.0)
    r1 = solve(cons)
    r2 = solve(cons)
    assert r1.status is r2.status
    assert r1.iterations == r2.iterations
    assert r1.residual_affine == r2.residual_affine


def test_feasible_solution_reverifies_externally():
    # Residuals must hold when recomputed from the returned matrix alone.
    rng = np.random.default_rng(1)
    d = 3
    target = np.diag([0.5, 0.3, 0.2]).astype(complex)
    rows = []
    rhs = []
    for k in range(d * d):
        e = np.zeros(d * d)
        e[k] = 1.0
        rows.append(e)
        rhs.append(vectorize_hermitian(target)[k])
    cons = AffineConstraintSet(d, np.array(rows), np.array(rhs))
    rep = solve(cons)
    assert rep.status is Status.FEASIBLE
    assert cons.residual(rep.solution) < 1e-7
    assert np.linalg.eigvalsh(0.5 * (rep.solution + dag(rep.solution)))[0] > -1e-7


def test_residual_never_worse_than_start():
    cons = trace_constraint(4, -2.0)
    rep = solve(cons)
    # the best candidate's residual cannot exceed the first iterate's
    start = cons.residual(np.zeros((4, 4)))
    assert rep.residual_affine <= start + 1e-12


def test_inconsistent_rows_fall_back_to_least_squares():
    # Tr X = 1 and Tr X = 2 simultaneously: the projector still works via the
    # pseudo-inverse and the verdict is infeasible.
    d = 2
    row = vectorize_hermitian(np.eye(d))
    cons = AffineConstraintSet(d, np.vstack([row, row]), np.array([1.0, 2.0]))
    rep = solve(cons)
    assert rep.status is Status.NOT_FEASIBLE_AT_TOLERANCE


def test_iteration_limit_status():
    cons = trace_constraint(2, -1.0)
    rep = solve(cons, SolverConfig(max_iter=50))
    # cannot plateau-detect in 50 iterations, so the cap is reported
    assert rep.status is Status.ITERATION_LIMIT
    assert rep.iterations == 50
    assert rep.solution is None


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(eps_feas=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolverConfig(initial_point="warm")


def test_constraint_set_validation():
    with pytest.raises(ValueError):
        AffineConstraintSet(2, np.zeros((1, 3)), np.zeros(1))
    with pytest.raises(ValueError):
        AffineConstraintSet(2, np.zeros((0, 4)), np.zeros(0))
    with pytest.raises(ValueError):
        AffineConstraintSet(2, np.full((1, 4), np.nan), np.zeros(1))
