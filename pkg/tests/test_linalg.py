import numpy as np
import pytest

from chancompat.linalg import (
    dag,
    devectorize_hermitian,
    frob,
    hermitian_basis,
    kron,
    partial_trace,
    partial_transpose,
    project_psd,
    swap_unitary,
    vectorize_hermitian,
)


def random_hermitian(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + dag(g))


def ket(i, d):
    v = np.zeros(d)
    v[i] = 1.0
    return v


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_basis_projector():
    p0 = np.outer(ket(0, 2), ket(0, 2))
    p1 = np.outer(ket(1, 2), ket(1, 2))
    expected = np.zeros((4, 4))
    expected[1, 1] = 1.0  # |01><01|
    assert np.array_equal(kron(p0, p1), expected)


def test_kron_diagonal():
    out = kron(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]))
    assert np.array_equal(out, np.diag([3.0, 4.0, 6.0, 8.0]))


def test_partial_trace_product_state():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0  # |00><00|
    out = partial_trace(rho, (2, 2), keep=(0,))
    assert np.allclose(out, np.outer(ket(0, 2), ket(0, 2)), atol=1e-14)


def test_partial_trace_maximally_entangled_gives_identity():
    w = np.eye(2).reshape(-1)
    rho = np.outer(w, w)  # sum_ij |ii><jj|
    out = partial_trace(rho, (2, 2), keep=(0,))
    assert np.allclose(out, np.eye(2), atol=1e-14)


def test_partial_trace_normalized_ancilla():
    rng = np.random.default_rng(0)
    rho_a = random_hermitian(3, rng)
    x = kron(rho_a, np.eye(2) / 2)
    assert np.allclose(partial_trace(x, (3, 2), keep=(0,)), rho_a, atol=1e-12)


def test_partial_trace_all_subsystems_equals_trace():
    rng = np.random.default_rng(1)
    x = random_hermitian(12, rng)
    out = partial_trace(x, (2, 3, 2), keep=())
    assert abs(out[0, 0] - np.trace(x)) < 1e-12


def test_partial_trace_kron_marginal_random():
    rng = np.random.default_rng(2)
    for _ in range(10):
        a = random_hermitian(2, rng)
        b = random_hermitian(3, rng)
        out = partial_trace(kron(a, b), (2, 3), keep=(0,))
        assert frob(out - np.trace(b) * a) < 1e-12
        out2 = partial_trace(kron(a, b), (2, 3), keep=(1,))
        assert frob(out2 - np.trace(a) * b) < 1e-12


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), (2, 3), keep=(0,))


def test_partial_transpose_swap():
    w = np.eye(2).reshape(-1)
    rho = np.outer(w, w)  # sum_ij |ii><jj|
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[i * 2 + j, j * 2 + i] = 1.0
    assert np.allclose(partial_transpose(rho, (2, 2), 1), swap, atol=1e-14)


def test_partial_transpose_product_operator():
    rng = np.random.default_rng(3)
    a = random_hermitian(2, rng)
    b = random_hermitian(3, rng)
    out = partial_transpose(kron(a, b), (2, 3), 1)
    assert np.allclose(out, kron(a, b.T), atol=1e-13)


def test_partial_transpose_involution():
    rng = np.random.default_rng(4)
    x = random_hermitian(6, rng)
    once = partial_transpose(x, (2, 3), 0)
    twice = partial_transpose(once, (2, 3), 0)
    assert np.array_equal(twice, x)


def test_project_psd_eigenvalue_clipping():
    out = project_psd(np.diag([1.0, -1.0]))
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-14)


def test_project_psd_fixed_point():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    psd = g @ dag(g)
    assert frob(project_psd(psd) - psd) < 1e-12


def test_project_psd_all_negative():
    assert np.allclose(project_psd(-np.eye(2)), np.zeros((2, 2)), atol=1e-14)


def test_project_psd_is_nearest_psd_point():
    # Any other PSD matrix must be at least as far in Frobenius norm.
    rng = np.random.default_rng(6)
    x = random_hermitian(4, rng)
    p = project_psd(x)
    assert np.linalg.eigvalsh(p)[0] >= -1e-12
    for _ in range(25):
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        other = g @ dag(g)
        assert frob(x - p) <= frob(x - other) + 1e-10


def test_project_psd_rejects_non_hermitian():
    x = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        project_psd(x)


def test_vectorize_identity():
    v = vectorize_hermitian(np.eye(2))
    expected = np.zeros(4)
    expected[:2] = 1.0
    assert np.allclose(v, expected, atol=1e-15)


def test_vectorize_isometry_and_roundtrip():
    rng = np.random.default_rng(7)
    for d in (2, 3, 5):
        x = random_hermitian(d, rng)
        v = vectorize_hermitian(x)
        assert abs(np.linalg.norm(v) - frob(x)) < 1e-12
        assert frob(devectorize_hermitian(v) - x) < 1e-12


def test_vectorize_preserves_inner_products():
    rng = np.random.default_rng(8)
    for _ in range(10):
        x = random_hermitian(3, rng)
        y = random_hermitian(3, rng)
        hs = np.trace(dag(x) @ y).real
        eu = vectorize_hermitian(x) @ vectorize_hermitian(y)
        assert abs(hs - eu) < 1e-12


def test_hermitian_basis_is_orthonormal():
    basis = list(hermitian_basis(3))
    assert len(basis) == 9
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            ip = np.trace(dag(a) @ b).real
            assert abs(ip - (1.0 if i == j else 0.0)) < 1e-13


def test_swap_unitary_moves_factors():
    rng = np.random.default_rng(9)
    a = random_hermitian(2, rng)
    b = random_hermitian(3, rng)
    p = swap_unitary(2, 3)
    assert np.allclose(p @ kron(a, b) @ p.T, kron(b, a), atol=1e-13)
