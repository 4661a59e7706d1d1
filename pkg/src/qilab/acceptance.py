"""The acceptance suite: twelve property checks with tolerances and time budgets.

Each check returns a :class:`Criterion`; ``passed`` includes the time budget.
The suite is shared by ``tests/test_acceptance.py`` and ``qilab selftest``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cones, decoupling, entropy, metrics, pbt, qes
from .channels import clifford_1q, haar_2_twirl, t_twirl, unitary_channel
from .states import max_entangled
from .tensorlab import partial_trace, random_density, random_pure, random_unitary


@dataclass
class Criterion:
    ident: int
    title: str
    passed: bool
    budget: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} [{self.ident:02d}] {self.title} ({self.seconds:.2f}s / {self.budget:.0f}s)"

    def to_json(self) -> dict:
        return {"id": self.ident, "title": self.title, "passed": self.passed, "budget_s": self.budget,
                "seconds": self.seconds, "detail": self.detail}


def _seeds(seed: int, label: int, count: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence([seed, label]).generate_state(count)]


def ssa_wm(seed: int = 1) -> tuple[bool, dict]:
    worst_ssa = worst_wm = math.inf
    for i, s in enumerate(_seeds(seed, 1, 1000)):
        dims = (2, 2, 2) if i % 2 == 0 else (2, 3, 2)
        rho = random_density(int(np.prod(dims)), seed=s)
        worst_ssa = min(worst_ssa, entropy.cond_mutual_info(rho, dims, [0], [1], [2]))
        worst_wm = min(worst_wm, entropy.cond_entropy(rho, dims, [1], [0]) + entropy.cond_entropy(rho, dims, [1], [2]))
    ok = worst_ssa >= -1e-9 and worst_wm >= -1e-9
    return ok, {"states": 1000, "min_cmi": worst_ssa, "min_wm": worst_wm}


def genliwi_on_markov(seed: int = 1) -> tuple[bool, dict]:
    worst_res, worst_gap = 0.0, math.inf
    for s in _seeds(seed, 2, 200):
        state = cones.markov_state(cones.random_markov_params(s), s)
        v = cones.entropy_vector(state)
        worst_res = max(worst_res, max(abs(r) for r in cones.constraint_residuals(v)[:2]))
        worst_gap = min(worst_gap, cones.genliwi_gap(v))
    ok = worst_res < 1e-8 and worst_gap >= -1e-8
    return ok, {"states": 200, "max_constraint_residual": worst_res, "min_genliwi_gap": worst_gap}


def cadney_arithmetic(seed: int = 1) -> tuple[bool, dict]:
    v = cones.cadney_vector()
    vn = cones.check_vn_type(v)
    gaps = cones.cadney_gaps(v)
    res = cones.constraint_residuals(v)
    liwi = cones.liwi_gap(v)
    ok = vn["passed"] and all(g >= 0 for g in gaps) and all(r == 0 for r in res) and liwi == -2
    return ok, {"vn_type": vn["passed"], "cadney_gaps": list(gaps), "constraint_residuals": list(res),
                "liwi_gap": liwi}


def independence_lp(seed: int = 1) -> tuple[bool, dict]:
    r = cones.conic_membership(cones.genliwi_vector(), cones.vn_generators(4), cones.markov_constraint_vectors())
    ok = (not r.inside) and r.certificate_checks.get("valid", False)
    return ok, {"inside": r.inside, "certificate_checks": r.certificate_checks}


def convex_split_instances(seed: int = 1) -> tuple[bool, dict]:
    rows = []
    for s in _seeds(seed, 5, 20):
        rng = np.random.default_rng(s)
        X = random_density(4, seed=rng)
        a, e = partial_trace(X, (2, 2), [0]), partial_trace(X, (2, 2), [1])
        delta = float(rng.uniform(0.05, 1 / 6 - 1e-3))
        t = 0.5
        while True:
            rho = (1 - t) * np.kron(a, e) + t * X
            k = entropy.d_max(rho, np.kron(a, e))
            if decoupling.convex_split_n(k, delta) == 1:
                break
            t /= 2
        for n in (1, 2, 3):
            c = decoupling.convex_split_checks(rho, e, delta, (2, 2), n=n)
            rows.append((c["mutual_info"] - c["info_bound"], c["purified_distance"] - c["distance_bound"]))
    worst_info = max(r[0] for r in rows)
    worst_pd = max(r[1] for r in rows)
    ok = worst_info <= 1e-8 and worst_pd <= 1e-6
    return ok, {"instances": 20, "n_values": [1, 2, 3], "max_info_minus_bound": worst_info,
                "max_distance_minus_bound": worst_pd}


def clifford_two_design(seed: int = 1) -> tuple[bool, dict]:
    ens = clifford_1q()
    worst = 0.0
    for i in range(16):
        M = np.zeros((4, 4), dtype=complex)
        M[i // 4, i % 4] = 1
        worst = max(worst, float(np.max(np.abs(t_twirl(ens, 2, M) - haar_2_twirl(M, 2)))))
    return worst <= 1e-10, {"basis_size": 16, "max_abs_difference": worst}


def effective_characterization(seed: int = 1) -> tuple[bool, dict]:
    s = qes.clifford_scheme(1)
    worst = 0.0
    for sd in _seeds(seed, 7, 50):
        a = qes.random_attack(2, 2, 2, seed=sd)
        worst = max(worst, qes.superop_distance(qes.effective_superop(s, a), qes.exact_effective(s, a)))
    p = qes.pauli_otp(1)
    z = qes.unitary_attack(np.diag([1, -1]))
    sep = qes.superop_distance(qes.effective_superop(p, z), qes.exact_effective(p, z))
    ok = worst < 1e-8 and sep > 0.1
    return ok, {"attacks": 50, "max_clifford_distance": worst, "pauli_z_distance": sep}


def nm_separation(seed: int = 1) -> tuple[bool, dict]:
    s = qes.clifford_scheme(1)
    worst = -math.inf
    for sd in _seeds(seed, 8, 50):
        a = qes.random_attack(2, 2, 2, seed=sd)
        rho = random_density(8, seed=sd)
        worst = max(worst, qes.nm_gap(s, a, rho, (2, 2, 2)))
    coin = qes.coin_pauli_attack()
    phi = max_entangled(2).density().matrix  # A purified by R
    worst = max(worst, qes.nm_gap(s, coin, phi, (2, 1, 2)))
    pauli_gap = qes.nm_gap(qes.pauli_otp(1), coin, phi, (2, 1, 2))
    demo = qes.injection_demo(qes.clifford_scheme(1))
    ok = worst <= 1e-6 and pauli_gap > 0.5 and abs(demo["mutual_info"] - 2) <= 1e-6
    return ok, {"attacks": 51, "max_clifford_gap": worst, "pauli_coin_gap": pauli_gap,
                "injection_mutual_info": demo["mutual_info"], "injection_p_equals": demo["p_equals"]}


def gyz_two_design(seed: int = 1) -> tuple[bool, dict]:
    s = qes.tagged_scheme(qes.clifford_scheme(2), 2)
    ceiling = qes.gyz_bound(2)
    inputs = [random_pure((2, 2), seed=sd) for sd in _seeds(seed, 90, 2)]
    inputs += [max_entangled(2).density().matrix, np.eye(4) / 4]
    gyz = dns = 0.0
    for sd in _seeds(seed, 9, 20):
        a = qes.random_isometric_attack(4, 2, 2, seed=sd)
        gyz = max(gyz, qes.gyz_check(s, a, inputs))
        dns = max(dns, qes.dns_check(s, a, inputs))
    ok = gyz <= ceiling and dns <= ceiling
    return ok, {"attacks": 20, "ceiling": ceiling, "max_gyz_residual": gyz, "max_dns_residual": dns}


def pbt_consistency(seed: int = 1) -> tuple[bool, dict]:
    d = 2
    F, lows, cov = [], [], 0.0
    for N, sd in zip(range(1, 6), _seeds(seed, 10, 5)):
        F.append(pbt.pbt_fidelity(d, N))
        e = pbt.eps_from_fidelity(F[-1])
        lows.append((N - d * d * (1 - e * e) ** 2, N - d / (2 * math.sqrt(2 * e))))
        cov = max(cov, pbt.covariance_check(pbt.pbt_channel(d, N), 100, seed=sd))
    mono = all(b >= a - 1e-12 for a, b in zip(F, F[1:]))
    slack = min(min(x) for x in lows)
    ok = mono and slack >= -1e-6 and cov < 1e-8
    return ok, {"fidelities": F, "non_decreasing": mono, "min_bound_slack": slack, "max_covariance_residual": cov}


def metric_closed_forms(seed: int = 1) -> tuple[bool, dict]:
    worst_fvdg = -math.inf
    for sd in _seeds(seed, 11, 500):
        rng = np.random.default_rng(sd)
        d = int(rng.integers(2, 5))
        r, s = random_density(d, seed=rng), random_density(d, seed=rng)
        T, F = metrics.trace_distance(r, s), metrics.fidelity(r, s)
        worst_fvdg = max(worst_fvdg, (1 - F) - T, T - math.sqrt(max(1 - F * F, 0.0)))
    worst_dia = 0.0
    for sd in _seeds(seed, 111, 10):
        rng = np.random.default_rng(sd)
        U, V = random_unitary(2, rng), random_unitary(2, rng)
        exact = metrics.diamond_unitary_diff(U, V)
        lower = metrics.diamond_lower_sample(unitary_channel(U), unitary_channel(V), 10_000, seed=rng)
        worst_dia = max(worst_dia, abs(exact - lower))
    ok = worst_fvdg <= 1e-9 and worst_dia <= 0.05
    return ok, {"pairs": 500, "max_chain_violation": worst_fvdg, "unitary_pairs": 10,
                "max_diamond_gap": worst_dia}


def imax_endpoint(seed: int = 1) -> tuple[bool, dict]:
    errs = {}
    for d in (2, 3, 4):
        phi = max_entangled(d).density().matrix
        errs[str(d)] = abs(entropy.i_max_fixed(phi, (d, d), [0], [1]) - 2 * math.log2(d))
    return max(errs.values()) <= 1e-12, {"abs_error_by_d": errs}


SUITE: list[tuple[int, str, float, Callable]] = [
    (1, "strong subadditivity and weak monotonicity", 30, ssa_wm),
    (2, "constrained inequality on Markov states", 60, genliwi_on_markov),
    (3, "Cadney vector arithmetic", 1, cadney_arithmetic),
    (4, "independence LP with separating certificate", 5, independence_lp),
    (5, "convex split bounds", 60, convex_split_instances),
    (6, "qubit Clifford group is an exact 2-design", 5, clifford_two_design),
    (7, "effective channel characterization", 120, effective_characterization),
    (8, "non-malleability separation", 120, nm_separation),
    (9, "authentication residuals with a 2-design", 300, gyz_two_design),
    (10, "port-based teleportation consistency", 300, pbt_consistency),
    (11, "distance closed forms", 120, metric_closed_forms),
    (12, "max-mutual information endpoint", 5, imax_endpoint),
]


def run_criterion(ident: int, seed: int = 1) -> Criterion:
    _, title, budget, fn = next(c for c in SUITE if c[0] == ident)
    t0 = time.perf_counter()
    ok, detail = fn(seed)
    dt = time.perf_counter() - t0
    return Criterion(ident, title, bool(ok) and dt < budget, budget, dt, detail)


def run_all(seed: int = 1) -> list[Criterion]:
    return [run_criterion(c[0], seed) for c in SUITE]
