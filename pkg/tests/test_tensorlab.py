import numpy as np
import pytest
from hypothesis import given, strategies as st

from qilab.tensorlab import (
    Shape,
    herm_eig,
    jacobi_eig,
    mat_func,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    permutation_unitary,
    permute_systems,
    psd_eig,
    random_density,
    random_pure,
    random_unitary,
    swap_operator,
    sym_antisym_projectors,
    tensor,
    trace_norm,
    unitarity_residual,
)

seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_partial_trace_of_product_recovers_factors(seed):
    rng = np.random.default_rng(seed)
    a, b, c = random_density(2, seed=rng), random_density(3, seed=rng), random_density(2, seed=rng)
    M = tensor(a, b, c)
    assert np.allclose(partial_trace(M, (2, 3, 2), [1]), b)
    assert np.allclose(partial_trace(M, (2, 3, 2), [0, 2]), np.kron(a, c))
    assert np.allclose(partial_trace(M, (2, 3, 2), [0, 1, 2]), M)
    assert np.isclose(partial_trace(M, (2, 3, 2), []).item(), 1)


def test_partial_trace_rejects_bad_input():
    with pytest.raises(ValueError):
        partial_trace(np.eye(5), (2, 2), [0])
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), (2, 2), [3])


def test_partial_trace_many_factors_fallback():
    rng = np.random.default_rng(3)
    dims = [2] * 14
    v = random_pure(dims, seed=rng)
    # 28 tensor indices exceed the einsum letter budget; compare against a direct reshape
    M = np.outer(v, v.conj())
    got = partial_trace(M, dims, [0])
    psi = v.reshape(2, -1)
    assert np.allclose(got, psi @ psi.conj().T)


@given(seeds)
def test_permute_systems_matches_permutation_unitary(seed):
    rng = np.random.default_rng(seed)
    dims = (2, 3, 2)
    perm = list(rng.permutation(3))
    M = random_density(12, seed=rng)
    P = permutation_unitary(dims, perm)
    assert np.allclose(permute_systems(M, dims, perm), P @ M @ P.conj().T)
    inv = list(np.argsort(perm))
    assert np.allclose(permute_systems(permute_systems(M, dims, perm), [dims[i] for i in perm], inv), M)


def test_swap_and_symmetric_projectors():
    F = swap_operator(3)
    a, b = np.arange(3.0), np.array([1.0, -2, 0.5])
    assert np.allclose(F @ np.kron(a, b), np.kron(b, a))
    Ps, Pa = sym_antisym_projectors(3)
    assert np.allclose(Ps + Pa, np.eye(9))
    assert np.isclose(np.trace(Ps).real, 6) and np.isclose(np.trace(Pa).real, 3)


@given(seeds)
def test_jacobi_agrees_with_lapack(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    H = X + X.conj().T
    w1, _ = herm_eig(H)
    w2, V2 = jacobi_eig(H)
    assert np.allclose(w1, w2, atol=1e-10)
    assert np.allclose(V2 @ np.diag(w2) @ V2.conj().T, H, atol=1e-10)


def test_psd_clamping_and_rejection():
    w, _ = psd_eig(np.diag([1.0, -1e-11, 5e-13]))
    assert np.all(w >= 0)
    with pytest.raises(ValueError):
        psd_eig(np.diag([1.0, -1e-6]))
    with pytest.raises(ValueError):
        herm_eig(np.array([[0, 1], [0, 0]]))


def test_mat_func_identities():
    rho = random_density(4, rank=2, seed=7)
    s = mat_func(rho, "sqrt")
    assert np.allclose(s @ s, rho)
    Q = mat_func(rho, "pinv_sqrt")
    proj = Q @ rho @ Q
    assert np.allclose(proj @ proj, proj) and np.isclose(np.trace(proj).real, 2)
    assert np.allclose(mat_func(rho, "pow(0.5)"), s)
    with pytest.raises(ValueError):
        mat_func(rho, "exp")


def test_random_objects():
    U = random_unitary(6, seed=1)
    assert unitarity_residual(U) < 1e-12
    assert np.allclose(random_unitary(6, seed=1), U)
    rho = random_density(5, rank=3, seed=2)
    assert np.isclose(np.trace(rho).real, 1) and np.linalg.matrix_rank(rho, tol=1e-10) == 3
    assert np.isclose(np.linalg.norm(random_pure((2, 3), seed=0)), 1)


def test_trace_norm_and_json_roundtrip():
    X = np.diag([1.0, -2.0, 0.5j])
    assert np.isclose(trace_norm(X), 3.5)
    M = random_unitary(3, seed=5)
    assert np.allclose(matrix_from_json(matrix_to_json(M)), M)
    assert Shape.from_json(Shape((2, 3), ("A", "B")).to_json()) == Shape((2, 3), ("A", "B"))
    with pytest.raises(ValueError):
        Shape((2, 0))
