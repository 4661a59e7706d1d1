import math

import numpy as np
import pytest

from qilab import pbt
from qilab.channels import Channel, depolarizing, random_channel
from qilab.states import max_entangled
from qilab.tensorlab import partial_trace, permute_systems


def _dense_protocol_cj(d: int, N: int) -> np.ndarray:
    """Simulate the whole protocol on ``A_0 R A_1 B_1 .. A_N B_N`` and collect Bob's port."""
    phi = max_entangled(d).density().matrix
    rho = phi
    for _ in range(N):
        rho = np.kron(rho, phi)
    dims = [d] * (2 * N + 2)
    # reorder to A_0, A_1..A_N, R, B_1..B_N
    a_idx = [0] + [2 + 2 * k for k in range(N)]
    b_idx = [3 + 2 * k for k in range(N)]
    order = a_idx + [1] + b_idx
    rho = permute_systems(rho, dims, order)
    povm = pbt.pgm_povm(d, N)
    eta = np.zeros((d * d, d * d), dtype=complex)
    for i, E in enumerate(povm.effects):
        post = np.kron(E, np.eye(d ** (N + 1))) @ rho
        keep = partial_trace(post, dims, [N + 1, N + 2 + i])  # R, B_i
        eta += permute_systems(keep, [d, d], [1, 0])
    return eta


def _qubit_closed_form(N: int) -> float:
    """Entanglement fidelity of standard qubit port-based teleportation."""
    s = 0.0
    for k in range(N + 1):
        t = (N - 2 * k - 1) / math.sqrt(k + 1) + (N - 2 * k + 1) / math.sqrt(N - k + 1)
        s += math.comb(N, k) * t * t
    return math.sqrt(s / 2 ** (N + 3))


def test_cj_matches_dense_simulation():
    for N in (1, 2):
        assert np.allclose(pbt.pbt_cj(2, N), _dense_protocol_cj(2, N), atol=1e-12)
    assert np.allclose(pbt.pbt_cj(3, 2), _dense_protocol_cj(3, 2), atol=1e-12)


def test_fidelity_matches_qubit_closed_form():
    for N in range(1, 7):
        assert math.isclose(pbt.pbt_fidelity(2, N), _qubit_closed_form(N), abs_tol=1e-12)


def test_frozen_fidelities():
    frozen = [0.5, 0.6830127018922192, 0.7905694150420948, 0.8560600997377946, 0.8965826580324159]
    got = [pbt.pbt_fidelity(2, N) for N in range(1, 6)]
    assert np.allclose(got, frozen, atol=1e-12)


def test_pgm_is_complete_and_permutation_covariant():
    povm = pbt.pgm_povm(2, 3)
    assert np.allclose(sum(povm.effects), np.eye(16))
    # swapping ports 1 and 2 exchanges the first two effects
    P = [0, 2, 1, 3]
    assert np.allclose(permute_systems(povm.effects[0], [2] * 4, P), povm.effects[1])


def test_channel_is_covariant_and_trace_preserving():
    ch = pbt.pbt_channel(2, 3)
    assert ch.tp_residual() < 1e-12
    assert pbt.covariance_check(ch, 30, seed=1) < 1e-10
    assert pbt.covariance_check(depolarizing(2, 0.3), 30, seed=1) < 1e-10
    amp = Channel((np.array([[1, 0], [0, math.sqrt(0.5)]]), np.array([[0, math.sqrt(0.5)], [0, 0]])), (2,), (2,))
    assert pbt.covariance_check(amp, 30, seed=1) > 0.1


def test_instance_and_guards():
    inst = pbt.pbt_instance(2, 2)
    assert inst.resource.dims == (2, 2, 2, 2) and len(inst.povm) == 2
    with pytest.raises(ValueError):
        pbt.pgm_povm(2, 12)
    with pytest.raises(ValueError):
        pbt.pbt_instance(4, 7)


def test_bounds_frozen_and_by_formula():
    b = pbt.pbt_bounds(2, 0.1)
    assert math.isclose(b.N_lower_combined, 3.9204)
    assert math.isclose(b.N_lower_ns, 2 / (2 * math.sqrt(0.2)))
    assert b.N_achievable == 400
    for d, eps in [(2, 0.3), (3, 0.05), (5, 0.7)]:
        b = pbt.pbt_bounds(d, eps)
        assert math.isclose(b.N_lower_comm, d * d * (1 - eps * eps) ** 2)
        assert math.isclose(b.N_lower_combined, max(b.N_lower_comm, b.N_lower_ns))
    with pytest.raises(ValueError):
        pbt.pbt_bounds(2, 0.8)


def test_simulated_protocol_respects_bounds():
    for row in pbt.sweep(2, 5):
        d, N, F, e, lc, ln, lcomb, ach = row
        assert math.isclose(e, math.sqrt(1 - F * F))
        assert N >= lc - 1e-6 and N >= ln - 1e-6


def test_guessing_probabilities():
    assert pbt.guessing_probabilities(2, 4) == (0.25, 0.25 + 3 / 16)


def test_projective_metric():
    assert math.isclose(pbt.pu_metric(np.diag([1, 1j]), np.eye(2)), math.sqrt(2 - 2 * math.cos(math.pi / 4)))
    assert pbt.pu_metric(1j * np.eye(2), np.eye(2)) < 1e-7


def test_processor_and_covering_bounds():
    primary, alt = pbt.upqp_bounds(2, 1e-6)
    assert primary is not None and primary > 100 and alt is None
    assert pbt.upqp_bounds(2, 0.1) == (None, None)
    _, alt = pbt.upqp_bounds(2, 1e-6, eta=1.0)
    assert alt is None or alt > 0
    lb, ball, orth = pbt.covering_bounds(2, 0.5)
    assert math.isclose(lb, math.pi**2 * 2 / 2**3) and math.isclose(ball * lb, 1)
    assert pbt.covering_bounds(2, 0.2)[2] == 4.0
    assert pbt.covering_bounds(2, 0.4)[2] == 8.0
    assert pbt.covering_bounds(2, 0.6)[2] is None
    with pytest.raises(ValueError):
        pbt.upqp_bounds(2, 1e-6, eta=-1)
