import numpy as np
import pytest

from qilab.states import (
    MultiState,
    PureVec,
    bell_basis,
    cq_state,
    embed_subnormalized,
    max_entangled,
    max_mixed,
    purify,
    schmidt,
)
from qilab.tensorlab import Shape, partial_trace, random_density, random_pure


def test_multistate_validation():
    with pytest.raises(ValueError):
        MultiState(np.diag([0.7, 0.7]), Shape((2,)))
    with pytest.raises(ValueError):
        MultiState(np.diag([1.2, -0.2]), Shape((2,)))
    with pytest.raises(ValueError):
        MultiState(np.array([[0.5, 0.5], [0, 0.5]]), Shape((2,)))
    with pytest.raises(ValueError):
        MultiState(np.eye(4) / 4, Shape((2, 3)))


def test_marginal_and_json():
    rho = MultiState(random_density(12, seed=1), Shape((2, 3, 2), ("A", "B", "C")))
    m = rho.marginal([2, 0])
    assert m.dims == (2, 2) and m.shape.labels == ("A", "C")
    assert np.allclose(m.matrix, partial_trace(rho.matrix, (2, 3, 2), [0, 2]))
    back = MultiState.from_json(rho.to_json())
    assert np.allclose(back.matrix, rho.matrix) and back.shape == rho.shape


def test_purification_recovers_state():
    rho = random_density(3, rank=2, seed=4)
    psi = purify(rho)
    assert np.allclose(partial_trace(np.outer(psi.amplitudes, psi.amplitudes.conj()), (3, 3), [0]), rho)


def test_schmidt_reconstruction():
    v = random_pure((2, 3, 2), seed=8)
    s, L, R = schmidt(v, [0, 2], (2, 3, 2))
    w = sum(s[k] * np.kron(L[:, k], R[:, k]) for k in range(len(s)))
    from qilab.tensorlab import permute_systems

    assert np.allclose(w, permute_systems(v, (2, 3, 2), [0, 2, 1]))
    assert np.isclose(np.sum(s**2), 1)


def test_bell_basis_orthonormal_and_local_unitary():
    B = np.stack([b.amplitudes for b in bell_basis(3)], axis=1)
    assert np.allclose(B.conj().T @ B, np.eye(9))
    assert np.allclose(bell_basis(2)[0].amplitudes, max_entangled(2).amplitudes)


def test_cq_and_subnormalized():
    st_ = cq_state([0.25, 0.75], [np.eye(2) / 2, np.diag([1.0, 0])])
    assert np.allclose(partial_trace(st_.matrix, (2, 2), [0]), np.diag([0.25, 0.75]))
    sub = embed_subnormalized(max_mixed(2), 0.5)
    assert sub.normalization == "subnormalized" and np.isclose(np.trace(sub.matrix).real, 0.5)
    with pytest.raises(ValueError):
        purify(sub)
    with pytest.raises(ValueError):
        PureVec(np.ones(2), Shape((2,)))
