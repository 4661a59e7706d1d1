import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qilab import entropy as E
from qilab.states import max_entangled
from qilab.tensorlab import partial_trace, random_density

seeds = st.integers(0, 2**32 - 1)


def test_closed_form_values():
    phi = max_entangled(2).density().matrix
    assert math.isclose(E.von_neumann(np.eye(4) / 4), 2)
    assert math.isclose(E.mutual_info(phi, (2, 2), 0, 1), 2)
    assert math.isclose(E.cond_entropy(phi, (2, 2), 0, 1), -1)
    assert math.isclose(E.binary_h(0.5), 1) and E.binary_h(0) == 0
    rho = np.diag([0.5, 0.25, 0.25, 0])
    assert math.isclose(E.h_min(rho), 1)
    assert math.isclose(E.h0(rho), math.log2(3))
    assert math.isclose(E.h_max(rho), 2 * math.log2(math.sqrt(0.5) + 1))


def test_relative_entropies():
    rho, sigma = np.diag([1.0, 0]), np.diag([0.5, 0.5])
    assert math.isclose(E.rel_entropy(rho, sigma), 1)
    assert math.isclose(E.d_max(rho, sigma), 1)
    assert E.rel_entropy(sigma, rho) == math.inf
    assert E.d_max(sigma, rho) == math.inf


@given(seeds)
def test_entropy_ordering(seed):
    rho = random_density(4, seed=seed)
    sigma = random_density(4, seed=seed + 1)
    assert E.h_min(rho) <= E.von_neumann(rho) + 1e-9 <= E.h_max(rho) + 2e-9
    assert E.h_max(rho) <= E.h0(rho) + 1e-9
    assert E.rel_entropy(rho, sigma) <= E.d_max(rho, sigma) + 1e-9


@given(seeds)
def test_imax_fixed_dominates_optimized_and_mutual_info(seed):
    rho = random_density(4, seed=seed)
    fixed = E.i_max_fixed(rho, (2, 2), 0, 1)
    opt = E.i_max_opt(rho, (2, 2), 0, 1, grid_depth=1)
    assert opt <= fixed + 1e-12
    assert E.mutual_info(rho, (2, 2), 0, 1) <= fixed + 1e-9


def test_imax_opt_monotone_in_depth():
    rho = random_density(6, seed=11)
    vals = [E.i_max_opt(rho, (2, 3), 0, 1, grid_depth=g) for g in range(4)]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        E.i_max_opt(rho, (2, 3), 1, 0)


@given(seeds)
def test_fannes_bounds_hold(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(4, seed=rng)
    sigma = 0.97 * rho + 0.03 * random_density(4, seed=rng)
    from qilab.tensorlab import trace_norm

    eps = trace_norm(rho - sigma)
    bh, bc, bi, _ = E.fannes_bounds(eps, (2, 2))
    ra, sa = partial_trace(rho, (2, 2), [0]), partial_trace(sigma, (2, 2), [0])
    assert abs(E.von_neumann(ra) - E.von_neumann(sa)) <= bh + 1e-9
    assert abs(E.cond_entropy(rho, (2, 2), 0, 1) - E.cond_entropy(sigma, (2, 2), 0, 1)) <= bc + 1e-9
    assert abs(E.mutual_info(rho, (2, 2), 0, 1) - E.mutual_info(sigma, (2, 2), 0, 1)) <= bi + 1e-9


def test_conditional_min_entropy_of_max_entangled():
    phi = max_entangled(3).density().matrix
    assert math.isclose(E.h_min_cond_fixed(phi, (3, 3), 0, 1), -math.log2(3))


def test_entropy_value_kinds():
    v = E.EntropyValue("I", 1.0, {"restrictions": ["fixed reference"]})
    assert v.to_json()["meta"]["restrictions"] == ["fixed reference"]
    with pytest.raises(ValueError):
        E.EntropyValue("nope", 0.0)
    with pytest.raises(ValueError):
        E.mutual_info(np.eye(4) / 4, (2, 2), 0, 0)


def test_hmax_bracket():
    rho = random_density(4, rank=3, seed=2)
    lo, hi = E.h0_hmax_bracket(rho, 0.1)
    assert lo <= hi
