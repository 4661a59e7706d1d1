import numpy as np
import pytest
from hypothesis import given, strategies as st

from qilab import channels as C
from qilab.tensorlab import partial_trace, random_density, random_unitary

seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_cj_roundtrip(seed):
    ch = C.random_channel(2, 3, n_kraus=3, seed=seed)
    eta = C.cj_state(ch)
    assert np.allclose(partial_trace(eta, (3, 2), [1]), np.eye(2) / 2)
    back = C.channel_from_cj(eta, (3, 2))
    rho = random_density(2, seed=seed)
    assert np.allclose(back(rho), ch(rho))
    assert np.allclose(C.superop(back), C.superop(ch))


def test_superop_acts_on_row_major_vec():
    ch = C.random_channel(2, 2, seed=1)
    rho = random_density(2, seed=2)
    assert np.allclose((C.superop(ch) @ rho.reshape(-1)).reshape(2, 2), ch(rho))
    assert np.allclose(C.superop_of_map(ch, 2), C.superop(ch))


def test_stinespring_is_isometry():
    ch = C.random_channel(2, 2, n_kraus=3, seed=5)
    V = C.stinespring(ch)
    assert np.allclose(V.conj().T @ V, np.eye(2))
    rho = random_density(2, seed=6)
    assert np.allclose(partial_trace(V @ rho @ V.conj().T, (2, 3), [0]), ch(rho))


def test_channel_validation():
    with pytest.raises(ValueError):
        C.Channel((np.eye(2) * 0.5,), (2,), (2,))
    with pytest.raises(ValueError):
        C.channel_from_cj(np.diag([1.0, 0, 0, 0]), (2, 2))
    with pytest.raises(ValueError):
        C.Povm((np.eye(2) * 0.4,))


def test_compose_tensor_apply_on():
    a, b = C.random_channel(2, seed=1), C.random_channel(2, seed=2)
    rho = random_density(4, seed=3)
    out, dims = C.apply_on(a, rho, (2, 2), [1])
    ref = C.tensor_ch(C.identity_channel(2), a)(rho)
    from qilab.tensorlab import permute_systems

    assert dims == [2, 2] and np.allclose(out, permute_systems(ref, (2, 2), [1, 0]))
    r1 = random_density(2, seed=4)
    assert np.allclose(C.compose(b, a)(r1), b(a(r1)))


def test_depolarizing_and_replacement():
    rho = random_density(3, seed=1)
    assert np.allclose(C.depolarizing(3, 1.0)(rho), np.eye(3) / 3)
    sig = random_density(2, seed=2)
    assert np.allclose(C.replacement_channel(sig, 3)(rho), sig)


def test_group_sizes():
    assert len(C.clifford_1q()) == 24
    assert len(C.pauli_group(2)) == 16


def test_two_qubit_clifford_group_size_and_design():
    ens = C.clifford_2q()
    assert len(ens) == 11520
    X = random_density(16, seed=0)
    assert np.allclose(C.t_twirl(ens, 2, X), C.haar_2_twirl(X, 4), atol=1e-10)


def test_design_defects():
    assert C.design_defect(C.clifford_1q(), 2) < 1e-10
    assert C.design_defect(C.pauli_group(1), 1) < 1e-10
    assert C.design_defect(C.pauli_group(1), 2) > 0.1


@given(seeds)
def test_haar_twirls_match_monte_carlo_limits(seed):
    # the Haar 2-twirl is invariant under any further unitary conjugation
    rng = np.random.default_rng(seed)
    X = random_density(4, seed=rng)
    T = C.haar_2_twirl(X, 2)
    U = random_unitary(2, rng)
    UU = np.kron(U, U)
    assert np.allclose(UU @ T @ UU.conj().T, T)
    assert np.isclose(np.trace(T), np.trace(X))
    assert np.allclose(C.haar_1_twirl(np.kron(X, np.eye(1)), 4), np.eye(4) * np.trace(X) / 4)


def test_twirl_with_side_system():
    X = random_density(8, seed=3)
    got = C.t_twirl(C.clifford_1q(), 2, X)
    assert np.allclose(got, C.haar_2_twirl(X, 2), atol=1e-10)
    got = C.t_twirl(C.clifford_1q(), 2, X, shape=(2, 2, 2), copies=[0, 2])
    assert np.allclose(got, C.haar_2_twirl(X, 2, shape=(2, 2, 2), copies=[0, 2]), atol=1e-10)


def test_channel_twirl_of_clifford_is_depolarizing():
    ch = C.random_channel(2, seed=9)
    tw = C.channel_twirl(C.clifford_1q(), ch)
    from qilab.metrics import entanglement_fidelity

    F2 = entanglement_fidelity(ch) ** 2
    p = (1 - F2) * 4 / 3
    rho = random_density(2, seed=10)
    assert np.allclose(tw(rho), C.depolarizing(2, p)(rho))


def test_json_roundtrips():
    ch = C.random_channel(2, seed=1)
    assert np.allclose(C.superop(C.Channel.from_json(ch.to_json())), C.superop(ch))
    ens = C.pauli_group(1)
    assert len(C.UnitaryEnsemble.from_json(ens.to_json())) == 4
