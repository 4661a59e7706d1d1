"""Port-based teleportation with maximally entangled ports and the pretty good
measurement, plus lower and auxiliary bounds on the port number."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import Channel, Povm, channel_from_cj
from .metrics import covering_arc, entanglement_fidelity, _eigenphases
from .states import MultiState, max_entangled
from .tensorlab import (
    Shape,
    mat_func,
    partial_trace,
    permute_systems,
    random_density,
    random_unitary,
    trace_norm,
)

POVM_GUARD = 4096  # dimension of A_0 A^N
STATE_GUARD = 4096  # dimension of the port resource A^N B^N


@dataclass(frozen=True)
class BoundReport:
    N_lower_comm: float
    N_lower_ns: float
    N_lower_combined: float
    N_achievable: int

    def to_json(self) -> dict:
        return {"N_lower_comm": self.N_lower_comm, "N_lower_ns": self.N_lower_ns,
                "N_lower_combined": self.N_lower_combined, "N_achievable": self.N_achievable}


@dataclass(frozen=True)
class PbtInstance:
    """Port dimension, port count, the resource ``phi+^{(x)N}`` on ``A^N B^N``
    (ordered ``A_1 B_1 ... A_N B_N``) and Alice's POVM on ``A_0 A^N``."""

    d: int
    N: int
    resource: MultiState
    povm: Povm


def _check(d: int, N: int) -> None:
    if d < 2 or N < 1:
        raise ValueError("need d >= 2 and N >= 1")
    if d ** (N + 1) > POVM_GUARD:
        raise ValueError(f"d^(N+1) = {d ** (N + 1)} exceeds the guard {POVM_GUARD}")


def _signal(d: int, N: int, i: int) -> np.ndarray:
    """``phi+_{A_0 A_i} (x) tau`` on the remaining ports, in order ``A_0 A_1 .. A_N``."""
    phi = max_entangled(d).density().matrix
    base = np.kron(phi, np.eye(d ** (N - 1)) / d ** (N - 1))
    others = [j for j in range(1, N + 1) if j != i]
    src = [0, i] + others
    perm = [src.index(t) for t in range(N + 1)]
    return permute_systems(base, [d] * (N + 1), perm)


def pgm_povm(d: int, N: int) -> Povm:
    """Pretty good measurement for the signals ``phi+_{A_0 A_i} (x) tau_{A_{i^c}}``.

    ``E_i = zeta^{-1/2} (zeta_i / N) zeta^{-1/2} + Pi_ker / N`` with ``zeta``
    the uniform average of the signals; the kernel projector of ``zeta`` is
    shared equally so the effects stay complete and permutation covariant.
    """
    _check(d, N)
    sig = [_signal(d, N, i) for i in range(1, N + 1)]
    zeta = sum(sig) / N
    Q = mat_func(zeta, "pinv_sqrt")
    D = d ** (N + 1)
    ker = np.eye(D) - Q @ zeta @ Q
    ker = 0.5 * (ker + ker.conj().T)
    effects = []
    for s in sig:
        E = Q @ (s / N) @ Q + ker / N
        effects.append(0.5 * (E + E.conj().T))
    return Povm(tuple(effects))


def pbt_instance(d: int, N: int) -> PbtInstance:
    if d ** (2 * N) > STATE_GUARD:
        raise ValueError("port resource exceeds the dimension guard")
    phi = max_entangled(d).density().matrix
    res = np.eye(1)
    for _ in range(N):
        res = np.kron(res, phi)
    return PbtInstance(d, N, MultiState(res, Shape(tuple([d] * (2 * N)))), pgm_povm(d, N))


def pbt_cj(d: int, N: int, povm: Povm | None = None) -> np.ndarray:
    """CJ state of the protocol on ``B (x) R``.

    With ``phi+`` ports, ``(E_i (x) 1_B) phi+_{AB}`` moves to Bob as a
    transpose, so only the ``A_0 A_i`` marginal of ``E_i^T`` enters:
    ``eta = d^{-(N+1)} sum_i SWAP tr_{A_{i^c}}(E_i^T) SWAP``.
    """
    _check(d, N)
    povm = pgm_povm(d, N) if povm is None else povm
    dims = [d] * (N + 1)
    eta = np.zeros((d * d, d * d), dtype=complex)
    for i, E in enumerate(povm.effects, start=1):
        red = partial_trace(E.T, dims, [0, i])
        eta += permute_systems(red, [d, d], [1, 0])
    return eta / d ** (N + 1)


def pbt_channel(d: int, N: int) -> Channel:
    """Channel from Alice's input to the selected port at Bob."""
    return channel_from_cj(pbt_cj(d, N), (d, d))


def pbt_fidelity(d: int, N: int) -> float:
    """Entanglement fidelity ``sqrt(<phi+| eta |phi+>)`` of the PGM protocol."""
    return entanglement_fidelity(pbt_channel(d, N))


def covariance_check(ch: Channel, trials: int = 100, seed=None) -> float:
    """``max ||U^dagger ch(U rho U^dagger) U - ch(rho)||_1`` over sampled Haar
    ``U`` and random mixed ``rho``."""
    if ch.d_in != ch.d_out:
        raise ValueError("covariance check needs a square channel")
    d = ch.d_in
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(trials)):
        U = random_unitary(d, rng)
        rho = random_density(d, seed=rng)
        lhs = U.conj().T @ ch(U @ rho @ U.conj().T) @ U
        worst = max(worst, trace_norm(lhs - ch(rho)))
    return worst


def _check_eps(d: int, eps: float) -> None:
    if d < 2:
        raise ValueError("need d >= 2")
    if not 0 < eps <= 1 / math.sqrt(2) + 1e-15:
        raise ValueError("eps must lie in (0, 1/sqrt(2)]")


def _bound_values(d: int, eps: float) -> BoundReport:
    comm = d * d * (1 - eps * eps) ** 2
    ns = d / (2 * math.sqrt(2 * eps))
    combined = d * max(1 / (2 * math.sqrt(2 * eps)), d * (1 - eps * eps) ** 2)
    return BoundReport(comm, ns, combined, int(math.ceil(d * d / eps**2 - 1e-9)))


def pbt_bounds(d: int, eps: float) -> BoundReport:
    """Port-number bounds at error ``eps``.

    The communication bound ``d^2 (1 - eps^2)^2``, the non-signalling bound
    ``d / (2 sqrt(2 eps))``, their maximum, and the achievable
    ``ceil(d^2 / eps^2)`` at entanglement fidelity ``sqrt(1 - eps^2)``.
    """
    _check_eps(d, eps)
    return _bound_values(d, eps)


def eps_from_fidelity(F: float) -> float:
    """``eps = sqrt(1 - F^2)``."""
    return math.sqrt(max(1 - F * F, 0.0))


def guessing_probabilities(d: int, N: int):
    """``(p_real, p_ideal) = (1/d^2, 1/N + (N-1)/(N d^2))``."""
    if d < 1 or N < 1:
        raise ValueError("need d, N >= 1")
    return 1 / d**2, 1 / N + (N - 1) / (N * d**2)


def pu_metric(U, V) -> float:
    """``min_{|z|=1} ||U - z V||_inf = sqrt(2 - 2 cos(L/2))`` with ``L`` the
    minimal arc covering the eigenphases of ``U V^dagger``."""
    _, L = covering_arc(_eigenphases(U, V))
    return float(math.sqrt(max(2 - 2 * math.cos(L / 2), 0.0)))


def _deltas(eps: float):
    d1 = 2 * (math.sqrt(2 * eps) + 7 * eps + 2 * math.sqrt(2) * eps**1.5 + 3 * eps**2)
    d2 = 2 * eps + eps**2
    return d1, d2


def upqp_bounds(d: int, eps: float, eta: float | None = None):
    """Program-register size bounds for an ``eps``-universal programmable processor.

    Args:
        d: data register dimension.
        eps: processor error.
        eta: universal constant of the almost-orthogonal-vectors bound; the
            alternative bound is only evaluated when it is given.

    Returns:
        ``(primary, alt)``; each is ``None`` when its precondition fails.
    """
    if d < 1 or eps <= 0:
        raise ValueError("need d >= 1 and eps > 0")
    d1, d2 = _deltas(eps)
    if 8 * d1 + d2 >= 0.5:
        return None, None
    a = 4 * d1 + d2
    c = (math.pi * d / math.e) ** d
    primary = 1 / (2 * a * a) * min(1.0, (c * a * a) ** (2 / (d * d + 1)))
    alt = None
    if eta is not None:
        if eta <= 0:
            raise ValueError("eta must be positive")
        d4 = 8 * d1 + d2
        if d4 > ((math.pi * d / math.e) ** (-d) * 2.0 ** (-d * d + 1)) ** eta:
            alt = eta * (d * math.log2(math.pi * d / math.e) + d * d - 1) / (2 * d4 * d4 * math.log2(1 / d4))
    return primary, alt


def covering_bounds(d: int, eps: float, eta: float | None = None):
    """Three counting bounds on ``PU(d)`` and on almost orthogonal vectors.

    Returns:
        ``(metric_entropy_lb, ball_volume_ub, almost_orth_ub)``:
        ``pi^d d! / (4 eps)^(d^2-1)``, its reciprocal bounding the Haar
        measure of an ``eps`` ball, and the bound on the number of unit
        vectors of ``C^d`` with pairwise overlaps at most ``eps``. The last
        is ``2d`` below ``1/(2d)``, ``4d`` below ``1/sqrt(2d)`` and
        ``eps^(-(2/eta) eps^2 d)`` up to ``1/2``; it is ``None`` when
        ``eps >= 1/2`` or when that regime is reached without ``eta``.
    """
    if not 0 < eps < math.pi / 2:
        raise ValueError("eps must lie in (0, pi/2)")
    ball = (4 * eps) ** (d * d - 1) / (math.pi**d * math.factorial(d))
    if eps < 1 / (2 * d):
        orth = float(2 * d)
    elif eps < 1 / math.sqrt(2 * d):
        orth = float(4 * d)
    elif eps < 0.5 and eta is not None:
        if eta <= 0:
            raise ValueError("eta must be positive")
        orth = eps ** (-(2 / eta) * eps * eps * d)
    else:
        orth = None
    return 1 / ball, ball, orth


def sweep(d: int, N_max: int):
    """Rows ``d, N, F, eps_sim, lb_comm, lb_ns, lb_combined, achievable_N``."""
    rows = []
    for N in range(1, N_max + 1):
        F = pbt_fidelity(d, N)
        e = eps_from_fidelity(F)
        # formulas are evaluated even where eps leaves the range the bounds are proven for
        b = _bound_values(d, e) if e > 0 else BoundReport(math.nan, math.nan, math.nan, 0)
        rows.append((d, N, F, e, b.N_lower_comm, b.N_lower_ns, b.N_lower_combined, b.N_achievable))
    return rows
