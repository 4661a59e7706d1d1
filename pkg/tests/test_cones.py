import numpy as np
import pytest
from hypothesis import given, strategies as st

from qilab import cones
from qilab.tensorlab import random_density

seeds = st.integers(0, 2**32 - 1)


def test_masks_and_labels():
    assert cones.mask("AC") == 0b101
    assert cones.mask([0, 3]) == 0b1001
    assert cones.mask_label(0b1011) == "ABD"


def test_generator_count_matches_checker():
    gens = cones.vn_generators(4)
    assert len(gens) == cones.check_vn_type(cones.cadney_vector())["checked"]


@given(seeds)
def test_quantum_vectors_are_vn_type(seed):
    v = cones.entropy_vector(random_density(16, seed=seed), (2, 2, 2, 2))
    assert cones.check_vn_type(v)["passed"]


def test_classical_style_violation_detected():
    # H(A) = 1 with H(B) = H(AB) = 0 breaks weak monotonicity
    v = cones.EntropyVector(2, np.array([0, 1.0, 0.0, 0.0]))
    res = cones.check_vn_type(v)
    assert not res["passed"] and res["violations"]


def test_cadney_vector_arithmetic():
    v = cones.cadney_vector()
    assert cones.check_vn_type(v)["passed"]
    assert cones.constraint_residuals(v) == (0.0, 0.0, 0.0)
    assert cones.liwi_gap(v) == -2
    assert cones.genliwi_gap(v) == -2
    assert cones.cadney_gaps(v) == (-4.0, 0.0, 2.0, 4.0)


def test_first_cadney_functional_fails_on_a_markov_quantum_state():
    # a genuine state meeting both constraints on which the first listed functional is negative;
    # the value is recomputed from the density matrix with the entropy module
    from qilab.entropy import cond_entropy, cond_mutual_info, mutual_info

    state = cones.markov_state(cones.random_markov_params(170), 170)
    rho, dims = state.matrix, state.dims
    A, B, C, D = 0, 1, 2, 3
    assert abs(cond_mutual_info(rho, dims, A, C, B)) < 1e-8
    assert abs(cond_mutual_info(rho, dims, B, C, A)) < 1e-8
    first = (cond_mutual_info(rho, dims, A, B, D) + cond_mutual_info(rho, dims, A, B, [C, D])
             + cond_entropy(rho, dims, D, [A, B, C]) - mutual_info(rho, dims, [A, B], C))
    assert first < -0.5
    v = cones.entropy_vector(state)
    assert np.isclose(cones.cadney_gaps(v)[0], first)
    assert min(cones.cadney_gaps(v)[1:]) >= -1e-8


@given(seeds)
def test_markov_states_satisfy_constrained_inequality(seed):
    state = cones.markov_state(cones.random_markov_params(seed), seed)
    v = cones.entropy_vector(state)
    r = cones.constraint_residuals(v)
    assert abs(r[0]) < 1e-8 and abs(r[1]) < 1e-8
    assert cones.genliwi_gap(v) >= -1e-8


def test_independence_certificate():
    r = cones.conic_membership(cones.genliwi_vector(), cones.vn_generators(4), cones.markov_constraint_vectors())
    assert not r.inside
    chk = cones.verify_certificate(cones.genliwi_vector(), cones.vn_generators(4),
                                   cones.markov_constraint_vectors(), r.certificate)
    assert chk["valid"] and np.isclose(chk["f_dot_w"], -1)


def test_valid_inequality_is_inside():
    f = cones.inequality_vector("SSA", "AB", "BC", 3) + cones.inequality_vector("WM", "AB", "BC", 3)
    r = cones.conic_membership(f, cones.vn_generators(3))
    assert r.inside and r.residual < 1e-9


def test_simplex_feasibility_dual():
    A = np.array([[1.0, 1.0]])
    x, y, infeas = cones.simplex_feasibility(A, np.array([-1.0]))
    assert infeas > 0 and np.all(A.T @ y <= 1e-12)
    x, y, infeas = cones.simplex_feasibility(np.eye(2), np.array([1.0, 2.0]))
    assert infeas == 0 and np.allclose(x, [1, 2])


def test_genliwi_witness():
    w = cones.genliwi_witness(1e-3, seed=1)
    assert w["vn_type"]
    assert max(abs(r) for r in w["markov_residuals"]) < 1e-12
    assert w["I(A:B|D)"] > 0
    assert w["genliwi_gap"] < 0


def test_json_roundtrip_and_validation():
    v = cones.cadney_vector()
    assert np.array_equal(cones.EntropyVector.from_json(v.to_json()).entries, v.entries)
    f = cones.genliwi_vector()
    assert np.array_equal(cones.IneqVector.from_json(f.to_json()).entries, f.entries)
    with pytest.raises(ValueError):
        cones.EntropyVector(2, np.array([1.0, 0, 0, 0]))
    with pytest.raises(ValueError):
        cones.EntropyVector(5, np.zeros(32))
