import math

import numpy as np
import pytest

from qilab import decoupling as D
from qilab.channels import UnitaryEnsemble
from qilab.states import max_entangled
from qilab.tensorlab import partial_trace, random_density, random_unitary


def test_copy_count_formula():
    assert D.convex_split_n(0.1, 0.1) == 1
    assert D.convex_split_n(1.0, 0.1) == 53151
    assert D.convex_split_n(1.0, 0.1) == math.ceil(8 * 2 * math.log2(10) / 1e-3)
    with pytest.raises(ValueError):
        D.convex_split_n(1.0, 0.2)


def test_convex_split_state_structure():
    rho = random_density(4, seed=1)
    e = partial_trace(rho, (2, 2), [1])
    tau = D.convex_split_state(rho, e, 3, (2, 2))
    assert tau.dims == (2, 2, 2, 2)
    # each E_j marginal equals rho_E because sigma was chosen as rho_E
    for j in (1, 2, 3):
        assert np.allclose(partial_trace(tau.matrix, tau.dims, [j]), e)
    assert np.allclose(partial_trace(tau.matrix, tau.dims, [0]), partial_trace(rho, (2, 2), [0]))
    with pytest.raises(ValueError):
        D.convex_split_state(rho, np.diag([1.0, 0]), 2, (2, 2))
    with pytest.raises(ValueError):
        D.convex_split_state(rho, e, 12, (2, 2))


def test_convex_split_bounds_for_close_to_product_state():
    X = random_density(4, seed=3)
    a, e = partial_trace(X, (2, 2), [0]), partial_trace(X, (2, 2), [1])
    rho = 0.95 * np.kron(a, e) + 0.05 * X
    for n in (1, 2, 4):
        c = D.convex_split_checks(rho, e, 0.12, (2, 2), n=n)
        assert c["mutual_info"] <= c["info_bound"] + 1e-8
        assert c["purified_distance"] <= c["distance_bound"] + 1e-6


def test_cds_unitary_is_a_controlled_swap():
    U = D.cds_unitary(3, 2)
    assert np.allclose(U.conj().T @ U, np.eye(U.shape[0]))
    with pytest.raises(ValueError):
        D.cds_unitary(12, 2)


def test_superdense_compress_unitary():
    C = D.superdense_compress(3)
    assert np.allclose(C.conj().T @ C, np.eye(9))


def test_heisenberg_weyl_twirl_and_commutation():
    S, Xi = D.gen_pauli(5)
    w = np.exp(2j * np.pi / 5)
    assert np.allclose(S @ Xi, w * Xi @ S)
    M = np.random.default_rng(0).standard_normal((5, 5))
    assert np.allclose(D.heisenberg_twirl(M, 5), np.trace(M) * np.eye(5) / 5)


def test_bounds_on_literal_values():
    phi = max_entangled(2).density().matrix
    assert math.isclose(D.decoupling_bound(phi, (2, 2)), 1.0)
    v, delta = 2.0, 0.1
    assert math.isclose(D.catalytic_size_bound(v, delta), 0.5 * (2 + 0) + 4 * math.log2(10))


def test_erasure_from_decoupling_erases():
    # a perfect decoupling unitary on a qubit pair: identity with A_2 = the entangled half
    U = np.eye(4)
    ens = D.erasure_from_decoupling(U, (1, 4))
    assert len(ens) == 16
    phi = max_entangled(4).density().matrix
    assert D.erasure_distance(phi, (4, 4), ens) < 1e-12
    assert len(D.erasure_from_decoupling(U, (4, 1))) == 1


def test_decoupling_erasure_roundtrip():
    rho = random_density(4, seed=2)
    ens = UnitaryEnsemble.uniform([random_unitary(2, seed=s) for s in range(4)])
    anc, W, split = D.decoupling_from_erasure(ens)
    assert split == (4, 2)
    d_dec = D.decoupling_distance(rho, (2, 2), W, anc, split)
    d_era = D.erasure_distance(rho, (2, 2), ens)
    assert math.isclose(d_dec, d_era, abs_tol=1e-10)
    ens2 = D.erasure_from_decoupling(W, split)
    assert math.isclose(D.erasure_distance(rho, (2, 2), ens2, ancilla=anc), d_dec, abs_tol=1e-10)
    with pytest.raises(ValueError):
        D.decoupling_from_erasure(UnitaryEnsemble.uniform([np.eye(2)] * 3))


def test_random_decouple_trial_product_state():
    rho = np.kron(np.eye(4) / 4, random_density(2, seed=1))
    r = D.random_decouple_trial(rho, (4, 2), (2, 2), seed=0)
    assert r.remainder_bits == 1 and r.distance < 1e-7
