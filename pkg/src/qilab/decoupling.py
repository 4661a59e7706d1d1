"""Convex split, decoupling size formulas, superdense compression and the
erasure/decoupling correspondence."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import UnitaryEnsemble
from .entropy import d_max, h_max, h_min_cond_fixed, mutual_info
from .metrics import purified_distance
from .states import MultiState, as_matrix, bell_basis
from .tensorlab import (
    Shape,
    as_dims,
    partial_trace,
    permute_systems,
    random_unitary,
    trace_norm,
    unitarity_residual,
)

DIM_GUARD = 4096
CATALYTIC_LOG_CONSTANT = 4.0


@dataclass(frozen=True)
class SplitSpec:
    k: float
    delta: float
    n: int
    log_base: int = 2

    def to_json(self) -> dict:
        return {"k": self.k, "delta": self.delta, "n": self.n, "log_base": self.log_base}


@dataclass(frozen=True)
class DecoupleResult:
    remainder_bits: float
    distance: float
    target: MultiState

    def to_json(self) -> dict:
        return {"remainder_bits": self.remainder_bits, "distance": self.distance,
                "target": self.target.to_json()}


def convex_split_n(k: float, delta: float) -> int:
    """Number of copies ``n``: 1 if ``k <= 3 delta`` else
    ``ceil(8 2^k log2(k / delta) / delta^3)``."""
    if not 0 < delta < 1 / 6:
        raise ValueError("delta must lie in (0, 1/6)")
    if k <= 3 * delta:
        return 1
    return int(math.ceil(8 * 2**k * math.log2(k / delta) / delta**3))


def split_spec(k: float, delta: float) -> SplitSpec:
    return SplitSpec(float(k), float(delta), convex_split_n(k, delta))


def convex_split_state(rho_AE, sigma_E, n: int, dims) -> MultiState:
    """``(1/n) sum_j rho_{A E_j} (x) sigma^{(x)(n-1)}`` on ``A, E_1, ..., E_n``.

    Args:
        rho_AE: bipartite state.
        sigma_E: reference state on ``E`` with ``supp rho_E`` inside ``supp sigma``.
        n: number of ``E`` copies.
        dims: ``(|A|, |E|)``.
    """
    dA, dE = as_dims(dims)
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if dA * dE**n > DIM_GUARD:
        raise ValueError(f"convex split state of dimension {dA * dE**n} exceeds the guard {DIM_GUARD}")
    rho = as_matrix(rho_AE)
    sig = as_matrix(sigma_E)
    rho_E = partial_trace(rho, (dA, dE), [1])
    if math.isinf(d_max(rho_E, sig)):
        raise ValueError("supp rho_E is not contained in supp sigma_E")
    rest = np.eye(1)
    for _ in range(n - 1):
        rest = np.kron(rest, sig)
    base = np.kron(rho, rest)  # A, E_j, then the other copies
    dims_all = [dA] + [dE] * n
    out = np.zeros_like(base)
    for j in range(n):
        # base factor order: A, E_j, E_others (in increasing order)
        others = [i for i in range(1, n + 1) if i != j + 1]
        src = [0, j + 1] + others
        perm = [src.index(t) for t in range(n + 1)]
        out += permute_systems(base, dims_all, perm)
    return MultiState(out / n, Shape(tuple(dims_all)))


def convex_split_checks(rho_AE, sigma_E, delta: float, dims, n: int | None = None) -> dict:
    """Evaluate ``I(A:E_1..E_n)`` and ``P(tau_A (x) tau_E.., tau)`` for the split state."""
    dA, dE = as_dims(dims)
    rho = as_matrix(rho_AE)
    rho_A = partial_trace(rho, (dA, dE), [0])
    k = d_max(rho, np.kron(rho_A, as_matrix(sigma_E)))
    n_formula = convex_split_n(k, delta)
    n = n_formula if n is None else int(n)
    tau = convex_split_state(rho, sigma_E, n, (dA, dE))
    dims_all = tau.dims
    es = list(range(1, n + 1))
    info = mutual_info(tau, dims_all, [0], es)
    prod = np.kron(partial_trace(tau.matrix, dims_all, [0]), partial_trace(tau.matrix, dims_all, es))
    pd = purified_distance(prod, tau.matrix)
    return {"k": k, "delta": delta, "n_formula": n_formula, "n": n, "mutual_info": info,
            "purified_distance": pd, "info_bound": 3 * delta, "distance_bound": math.sqrt(6 * delta)}


def cds_unitary(n: int, dA: int) -> np.ndarray:
    """``sum_j (1 j) (x) |j-1><j-1|`` on ``A^{(x)n} (x) A'`` with ``|A'| = n``.

    ``(1 j)`` swaps the first and the ``j``-th copy of ``A``; the control
    register is the last factor.
    """
    D = dA**n * n
    if D > DIM_GUARD:
        raise ValueError("controlled swap exceeds the dimension guard")
    dims = [dA] * n
    U = np.zeros((D, D), dtype=complex)
    eye = np.eye(dA**n)
    for j in range(n):
        perm = list(range(n))
        perm[0], perm[j] = perm[j], perm[0]
        P = np.stack([permute_systems(eye[:, c], dims, perm) for c in range(dA**n)], axis=1)
        ctrl = np.zeros((n, n))
        ctrl[j, j] = 1
        U += np.kron(P, ctrl)
    return U


def superdense_compress(m: int) -> np.ndarray:
    """``sum_{k,l} |psi_kl><m k + l|``: computational basis to the Bell basis."""
    if not 2 <= m <= 8:
        raise ValueError("m must be in 2..8")
    return np.stack([b.amplitudes for b in bell_basis(m)], axis=1)


def random_decouple_trial(rho_AE, dims, split, seed=None) -> DecoupleResult:
    """Apply a Haar unitary on ``A = A_1 A_2``, discard ``A_2`` and report
    ``P(rho'_{A_1 E}, tau_{A_1} (x) rho_E)``."""
    dA, dE = as_dims(dims)
    d1, d2 = (int(x) for x in split)
    if d1 * d2 != dA:
        raise ValueError("split must factor |A|")
    rho = as_matrix(rho_AE)
    U = np.kron(random_unitary(dA, seed), np.eye(dE))
    out = U @ rho @ U.conj().T
    kept = partial_trace(out, (d1, d2, dE), [0, 2])
    rho_E = partial_trace(rho, (dA, dE), [1])
    target = MultiState(np.kron(np.eye(d1) / d1, rho_E), Shape((d1, dE)))
    return DecoupleResult(math.log2(d2), purified_distance(kept, target.matrix), target)


def decoupling_bound(rho_AE, dims) -> float:
    """``(H_max(A) - H_min(A|E)) / 2`` with unsmoothed entropies and the
    conditional min-entropy against the fixed marginal ``rho_E``."""
    dA, dE = as_dims(dims)
    rho = as_matrix(rho_AE)
    rho_A = partial_trace(rho, (dA, dE), [0])
    return 0.5 * (h_max(rho_A) - h_min_cond_fixed(rho, (dA, dE), [0], [1]))


def catalytic_size_bound(i_max_value: float, delta: float) -> float:
    """``(v + max(0, log2 log2 v)) / 2 + 4 log2(1/delta)``; the additive constant 4 is a fixed convention."""
    v = float(i_max_value)
    if v < 0:
        raise ValueError("max-mutual information must be nonnegative")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    ll = math.log2(math.log2(v)) if v > 1 else 0.0
    return 0.5 * (v + max(0.0, ll)) + CATALYTIC_LOG_CONSTANT * math.log2(1 / delta)


def gen_pauli(N: int):
    """Clock ``Sigma = diag(e^{2 pi i j / N})`` and shift ``Xi |j> = |j+1 mod N>``."""
    if N < 2:
        raise ValueError("N must be >= 2")
    S = np.diag(np.exp(2j * np.pi * np.arange(N) / N))
    X = np.roll(np.eye(N), 1, axis=0).astype(complex)
    return S, X


def heisenberg_twirl(X, N: int) -> np.ndarray:
    """``1/N^2 sum_{i,j} Xi^i Sigma^j X Sigma^-j Xi^-i``, which equals ``tr(X) 1/N``."""
    S, Xi = gen_pauli(N)
    X = np.asarray(X, dtype=complex)
    out = np.zeros((N, N), dtype=complex)
    for i in range(N):
        Xi_i = np.linalg.matrix_power(Xi, i)
        for j in range(N):
            W = Xi_i @ np.linalg.matrix_power(S, j)
            out += W @ X @ W.conj().T
    return out / N**2


def erasure_from_decoupling(U, split, ancilla=None) -> UnitaryEnsemble:
    """Unitaries ``V_ij = (1_{A_1} (x) Xi^i Sigma^j) U`` with uniform weights.

    Args:
        U: unitary from ``A (x) T`` onto ``A_1 (x) A_2``.
        split: ``(|A_1|, |A_2|)``.
        ancilla: optional ancilla state on ``T``, only used to check sizes.

    Returns:
        The ``|A_2|^2`` element ensemble whose average channel replaces
        ``A_2`` by the maximally mixed state after ``U``.
    """
    U = np.asarray(U, dtype=complex)
    d1, d2 = (int(x) for x in split)
    if U.shape != (d1 * d2, d1 * d2) or unitarity_residual(U) > 1e-9:
        raise ValueError("U must be a unitary on A_1 (x) A_2")
    if ancilla is not None and U.shape[0] % as_matrix(ancilla).shape[0]:
        raise ValueError("ancilla dimension does not divide the unitary")
    if d2 == 1:
        return UnitaryEnsemble.uniform([U])
    S, Xi = gen_pauli(d2)
    ops = []
    for i in range(d2):
        for j in range(d2):
            P = np.linalg.matrix_power(Xi, i) @ np.linalg.matrix_power(S, j)
            ops.append(np.kron(np.eye(d1), P) @ U)
    return UnitaryEnsemble.uniform(ops)


def decoupling_from_erasure(ens: UnitaryEnsemble):
    """Decoupling protocol from a mixture of ``N = m^2`` unitaries on ``A``.

    Returns:
        ``(ancilla, unitary, split)``: the classical register state
        ``diag(p)`` on ``M``, the unitary ``(1_A (x) C_m) sum_i U_i (x) |i><i|``
        where ``C_m`` sends ``|i>`` to the ``i``-th Bell vector on
        ``M' (x) M''``, and ``split = (|A| m, m)``; discarding ``M''`` leaves
        ``A M'`` with the erased correlations and ``M'`` maximally mixed.
    """
    N = len(ens)
    m = int(round(math.sqrt(N)))
    if m * m != N:
        raise ValueError("ensemble size must be a perfect square")
    dA = ens.dim
    ancilla = np.diag(np.asarray(ens.weights, dtype=complex))
    ctrl = np.zeros((dA * N, dA * N), dtype=complex)
    for i, Ui in enumerate(ens.unitaries):
        Pi = np.zeros((N, N))
        Pi[i, i] = 1
        ctrl += np.kron(Ui, Pi)
    if m > 1:
        ctrl = np.kron(np.eye(dA), superdense_compress(m)) @ ctrl
    return ancilla, ctrl, (dA * m, m)


def decoupling_distance(rho_AB, dims, U, ancilla, split) -> float:
    """``||xi_{A_1 B} - xi_{A_1} (x) rho_B||_1`` with ``xi = U (rho_AB (x) ancilla) U^dagger``.

    The ancilla is appended to ``A`` and ``U`` acts on ``A T``.
    """
    dA, dB = as_dims(dims)
    rho = as_matrix(rho_AB)
    anc = as_matrix(ancilla)
    dT = anc.shape[0]
    d1, d2 = (int(x) for x in split)
    full = permute_systems(np.kron(rho, anc), (dA, dB, dT), [0, 2, 1])  # A, T, B
    W = np.kron(U, np.eye(dB))
    xi = W @ full @ W.conj().T
    xi_1b = partial_trace(xi, (d1, d2, dB), [0, 2])
    rho_B = partial_trace(rho, (dA, dB), [1])
    return trace_norm(xi_1b - np.kron(partial_trace(xi_1b, (d1, dB), [0]), rho_B))


def erasure_distance(rho_AB, dims, ens: UnitaryEnsemble, ancilla=None) -> float:
    """``||(Lambda (x) id)(rho) - Lambda(rho_A) (x) rho_B||_1`` for the mixture ``Lambda``."""
    dA, dB = as_dims(dims)
    rho = as_matrix(rho_AB)
    if ancilla is not None:
        anc = as_matrix(ancilla)
        rho = permute_systems(np.kron(rho, anc), (dA, dB, anc.shape[0]), [0, 2, 1])
        dA = dA * anc.shape[0]
    out = sum(p * np.kron(U, np.eye(dB)) @ rho @ np.kron(U, np.eye(dB)).conj().T
              for p, U in zip(ens.weights, ens.unitaries))
    rho_B = partial_trace(rho, (dA, dB), [1])
    out_A = partial_trace(out, (dA, dB), [0])
    return trace_norm(out - np.kron(out_A, rho_B))
