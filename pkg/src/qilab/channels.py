"""Channels in Kraus form, CJ states, twirls and Clifford/Pauli ensembles.

CJ convention: ``eta = (Lambda (x) id)(phi+)``, the channel acts on the first
factor, so ``eta`` lives on ``out (x) in``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .states import MultiState, as_matrix
from .tensorlab import (
    Shape,
    as_dims,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    permute_systems,
    psd_eig,
    swap_operator,
    unitarity_residual,
)

TP_TOL = 1e-9


def _shape(s) -> Shape:
    return s if isinstance(s, Shape) else Shape(as_dims(s))


@dataclass(frozen=True)
class Channel:
    """Completely positive map ``X -> sum_k K_k X K_k^dagger``.

    Args:
        kraus: operators of size ``dim_out x dim_in``.
        in_shape, out_shape: subsystem structure of input and output.
        trace_preserving: when True (default) ``sum K^dagger K = 1`` is
            enforced within 1e-9.
    """

    kraus: tuple
    in_shape: Shape
    out_shape: Shape
    trace_preserving: bool = True

    def __post_init__(self):
        ins, outs = _shape(self.in_shape), _shape(self.out_shape)
        ks = tuple(np.asarray(K, dtype=complex) for K in self.kraus)
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        for K in ks:
            if K.shape != (outs.total, ins.total):
                raise ValueError(f"Kraus operator of shape {K.shape} does not match shapes")
            K.setflags(write=False)
        object.__setattr__(self, "kraus", ks)
        object.__setattr__(self, "in_shape", ins)
        object.__setattr__(self, "out_shape", outs)
        if self.trace_preserving and self.tp_residual() > TP_TOL:
            raise ValueError(f"channel is not trace preserving (residual {self.tp_residual():.2e})")

    @property
    def d_in(self) -> int:
        return self.in_shape.total

    @property
    def d_out(self) -> int:
        return self.out_shape.total

    def tp_residual(self) -> float:
        S = sum(K.conj().T @ K for K in self.kraus)
        return float(np.max(np.abs(S - np.eye(self.d_in))))

    def __call__(self, rho):
        return apply(self, rho)

    def to_json(self) -> dict:
        return {"kraus": [matrix_to_json(K) for K in self.kraus],
                "in_shape": self.in_shape.to_json(), "out_shape": self.out_shape.to_json(),
                "cj_convention": "channel_on_first_factor"}

    @classmethod
    def from_json(cls, obj: dict) -> "Channel":
        return cls(tuple(matrix_from_json(k) for k in obj["kraus"]),
                   Shape.from_json(obj["in_shape"]), Shape.from_json(obj["out_shape"]))


@dataclass(frozen=True)
class UnitaryEnsemble:
    """Finite weighted set of unitaries."""

    unitaries: tuple
    weights: tuple

    def __post_init__(self):
        us = tuple(np.asarray(U, dtype=complex) for U in self.unitaries)
        w = tuple(float(x) for x in self.weights)
        if len(us) != len(w) or not us:
            raise ValueError("need one weight per unitary")
        if abs(sum(w) - 1) > 1e-9 or min(w) < 0:
            raise ValueError("weights must form a probability vector")
        for U in us:
            if unitarity_residual(U) > 1e-9:
                raise ValueError("ensemble element is not unitary")
        object.__setattr__(self, "unitaries", us)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, unitaries) -> "UnitaryEnsemble":
        us = tuple(unitaries)
        return cls(us, (1.0 / len(us),) * len(us))

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]

    def __len__(self) -> int:
        return len(self.unitaries)

    def stacked(self) -> np.ndarray:
        return np.stack(self.unitaries)

    def to_json(self) -> dict:
        return {"unitaries": [matrix_to_json(U) for U in self.unitaries], "weights": list(self.weights)}

    @classmethod
    def from_json(cls, obj: dict) -> "UnitaryEnsemble":
        return cls(tuple(matrix_from_json(u) for u in obj["unitaries"]), tuple(obj["weights"]))


@dataclass(frozen=True)
class Povm:
    """Complete set of PSD effects."""

    effects: tuple

    def __post_init__(self):
        es = tuple(np.asarray(E, dtype=complex) for E in self.effects)
        for E in es:
            psd_eig(E)
        d = es[0].shape[0]
        if np.max(np.abs(sum(es) - np.eye(d))) > 1e-8:
            raise ValueError("POVM effects do not sum to the identity")
        object.__setattr__(self, "effects", es)

    def __len__(self) -> int:
        return len(self.effects)


def identity_channel(d) -> Channel:
    s = _shape(d)
    return Channel((np.eye(s.total),), s, s)


def unitary_channel(U, shape=None) -> Channel:
    U = np.asarray(U, dtype=complex)
    s = _shape(shape if shape is not None else U.shape[0])
    return Channel((U,), s, s)


def depolarizing(d: int, p: float = 1.0) -> Channel:
    """``(1 - p) X + p tr(X) 1/d`` in Kraus form (generalized Paulis)."""
    from .decoupling import gen_pauli

    if d == 1:
        return identity_channel(1)
    S, X = gen_pauli(d)
    ops = [np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(S, b) for a in range(d) for b in range(d)]
    w0 = 1 - p + p / d**2
    ks = [np.sqrt(w0) * ops[0]] + [np.sqrt(p / d**2) * P for P in ops[1:]]
    return Channel(tuple(ks), Shape((d,)), Shape((d,)))


def replacement_channel(sigma, d_in: int) -> Channel:
    """``X -> tr(X) sigma``."""
    sig = as_matrix(sigma)
    w, V = psd_eig(sig)
    ks = []
    for lam, v in zip(w, V.T):
        if lam <= 0:
            continue
        for i in range(d_in):
            e = np.zeros(d_in)
            e[i] = 1
            ks.append(np.sqrt(lam) * np.outer(v, e))
    return Channel(tuple(ks), Shape((d_in,)), Shape((sig.shape[0],)))


def random_channel(d_in: int, d_out: int | None = None, n_kraus: int = 2, seed=None) -> Channel:
    """Random channel from a Haar-random isometry ``C^d_in -> C^d_out (x) C^n``."""
    from .tensorlab import random_unitary

    d_out = d_in if d_out is None else d_out
    D = d_out * n_kraus
    if D < d_in:
        raise ValueError("need d_out * n_kraus >= d_in")
    V = random_unitary(D, seed)[:, :d_in]
    ks = tuple(V.reshape(d_out, n_kraus, d_in)[:, k, :] for k in range(n_kraus))
    return Channel(ks, Shape((d_in,)), Shape((d_out,)))


def apply(ch: Channel, rho):
    """Apply ``ch`` to a state. Returns a ``MultiState`` for ``MultiState`` input."""
    M = as_matrix(rho)
    if M.shape != (ch.d_in, ch.d_in):
        raise ValueError("state does not match channel input")
    out = sum(K @ M @ K.conj().T for K in ch.kraus)
    if isinstance(rho, MultiState):
        return MultiState(out, ch.out_shape, rho.normalization)
    return out


def apply_on(ch_or_ops, M, dims, targets: Sequence[int]):
    """Apply a channel (or a list of Kraus operators) to selected subsystems.

    Returns the output matrix and its new dims. The channel output becomes
    the first factor, followed by the untouched subsystems in their original
    order.
    """
    dims = list(as_dims(dims))
    ks = ch_or_ops.kraus if isinstance(ch_or_ops, Channel) else tuple(ch_or_ops)
    targets = list(targets)
    rest = [i for i in range(len(dims)) if i not in targets]
    perm = targets + rest
    P = permute_systems(np.asarray(M), dims, perm)
    d_rest = int(np.prod([dims[i] for i in rest], dtype=np.int64))
    d_out = ks[0].shape[0]
    out = np.zeros((d_out * d_rest, d_out * d_rest), dtype=complex)
    # (K (x) 1) P (K (x) 1)^dagger via reshapes
    d_t = ks[0].shape[1]
    T = P.reshape(d_t, d_rest, d_t, d_rest)
    for K in ks:
        Y = np.einsum("ai,ixjy,bj->axby", K, T, K.conj())
        out += Y.reshape(d_out * d_rest, d_out * d_rest)
    return out, [d_out] + [dims[i] for i in rest]


def compose(ch2: Channel, ch1: Channel) -> Channel:
    """``ch2 o ch1``."""
    if ch1.d_out != ch2.d_in:
        raise ValueError("shape mismatch in composition")
    ks = tuple(B @ A for B in ch2.kraus for A in ch1.kraus)
    return Channel(ks, ch1.in_shape, ch2.out_shape, ch1.trace_preserving and ch2.trace_preserving)


def tensor_ch(a: Channel, b: Channel) -> Channel:
    ks = tuple(np.kron(A, B) for A in a.kraus for B in b.kraus)
    return Channel(ks, Shape(a.in_shape.dims + b.in_shape.dims), Shape(a.out_shape.dims + b.out_shape.dims),
                   a.trace_preserving and b.trace_preserving)


def superop(ch) -> np.ndarray:
    """Matrix of the map on row-major vectorized operators, ``sum K (x) conj(K)``."""
    ks = ch.kraus if isinstance(ch, Channel) else tuple(ch)
    return sum(np.kron(K, K.conj()) for K in ks)


def superop_of_map(fn, d_in: int) -> np.ndarray:
    """Superoperator matrix of an arbitrary linear map given as a function."""
    cols = []
    for i in range(d_in):
        for j in range(d_in):
            E = np.zeros((d_in, d_in), dtype=complex)
            E[i, j] = 1
            cols.append(np.asarray(fn(E)).reshape(-1))
    return np.stack(cols, axis=1)


def cj_state(ch: Channel) -> np.ndarray:
    """``(ch (x) id)(phi+)`` on ``out (x) in``."""
    d = ch.d_in
    eta = np.zeros((ch.d_out * d, ch.d_out * d), dtype=complex)
    for K in ch.kraus:
        v = K.reshape(-1)  # sum_i K|i> (x) |i> in row-major order
        eta += np.outer(v, v.conj())
    return eta / d


def channel_from_cj(eta, dims, tol: float = 1e-8, trace_preserving: bool = True) -> Channel:
    """Kraus form of the map whose CJ state is ``eta``.

    Args:
        eta: CJ state on ``out (x) in``.
        dims: ``(d_out, d_in)``.
    """
    d_out, d_in = (int(x) for x in dims)
    eta = as_matrix(eta)
    if eta.shape != (d_out * d_in, d_out * d_in):
        raise ValueError("CJ state does not match dims")
    if trace_preserving:
        ref = partial_trace(eta, (d_out, d_in), [1])
        if np.max(np.abs(ref - np.eye(d_in) / d_in)) > tol:
            raise ValueError("reference marginal is not maximally mixed: not a TP map")
    w, V = psd_eig(d_in * eta)
    ks = tuple(np.sqrt(lam) * V[:, k].reshape(d_out, d_in) for k, lam in enumerate(w) if lam > 1e-13)
    if not ks:
        ks = (np.zeros((d_out, d_in)),)
    return Channel(ks, Shape((d_in,)), Shape((d_out,)), trace_preserving)


def stinespring(ch: Channel) -> np.ndarray:
    """Isometry ``V = sum_k K_k (x) |k>_E`` with the environment as last factor."""
    if not ch.trace_preserving or ch.tp_residual() > TP_TOL:
        raise ValueError("Stinespring isometry needs a trace-preserving channel")
    r = len(ch.kraus)
    V = np.stack(ch.kraus, axis=1)  # (d_out, r, d_in)
    return V.reshape(ch.d_out * r, ch.d_in)


def _twirl_layout(M, d, t, shape, copies):
    M = np.asarray(M, dtype=complex)
    if shape is None:
        side = M.shape[0] // d**t
        if side * d**t != M.shape[0]:
            raise ValueError("operator size is not a multiple of d^t")
        dims = [d] * t + ([side] if side > 1 else [])
        copies = list(range(t))
    else:
        dims = list(as_dims(shape))
        copies = list(range(t)) if copies is None else list(copies)
    if len(copies) != t or any(dims[c] != d for c in copies):
        raise ValueError("designated copies do not match d and t")
    rest = [i for i in range(len(dims)) if i not in copies]
    perm = copies + rest
    inv = list(np.argsort(perm))
    side = int(np.prod([dims[i] for i in rest], dtype=np.int64))
    P = permute_systems(M, dims, perm)
    return P, side, [dims[i] for i in perm], inv


def t_twirl(ens: UnitaryEnsemble, t: int, M, shape=None, copies=None) -> np.ndarray:
    """``sum_k p_k U_k^{(x)t} M U_k^{dagger (x)t}``, acting on ``copies`` of ``shape``.

    Without ``shape`` the first ``t`` factors of dimension ``d`` are twirled and
    any remaining dimension is treated as an untouched side system.
    """
    if t not in (1, 2):
        raise ValueError("only t = 1, 2 supported")
    d = ens.dim
    P, side, pdims, inv = _twirl_layout(M, d, t, shape, copies)
    Us = ens.stacked()
    if t == 2:
        Us = np.einsum("kab,kcd->kacbd", Us, Us).reshape(len(ens), d * d, d * d)
    w = np.asarray(ens.weights)
    D = d**t
    T = P.reshape(D, side, D, side)
    out = np.einsum("k,kai,ixjy,kbj->axby", w, Us, T, Us.conj(), optimize=True).reshape(D * side, D * side)
    return permute_systems(out, pdims, inv)


def haar_1_twirl(M, d: int, shape=None, copies=None) -> np.ndarray:
    """Haar 1-twirl ``1/d (x) tr_A M``."""
    P, side, pdims, inv = _twirl_layout(M, d, 1, shape, copies)
    R = partial_trace(P, (d, side), [1])
    return permute_systems(np.kron(np.eye(d) / d, R), pdims, inv)


def haar_2_twirl(M, d: int, shape=None, copies=None) -> np.ndarray:
    """Closed-form Haar 2-twirl ``1 (x) R1 + F (x) RF``.

    ``R1 = (d tr M - tr F M) / (d (d^2 - 1))`` and
    ``RF = (d tr F M - tr M) / (d (d^2 - 1))``, traces taken over the two
    twirled copies only.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    P, side, pdims, inv = _twirl_layout(M, d, 2, shape, copies)
    F = swap_operator(d)
    FI = np.kron(F, np.eye(side))
    trM = partial_trace(P, (d * d, side), [1])
    trFM = partial_trace(FI @ P, (d * d, side), [1])
    norm = d * (d * d - 1)
    R1 = (d * trM - trFM) / norm
    RF = (d * trFM - trM) / norm
    out = np.kron(np.eye(d * d), R1) + np.kron(F, RF)
    return permute_systems(out, pdims, inv)


def u_ubar_twirl(ens: UnitaryEnsemble, X) -> np.ndarray:
    """``sum_k p_k (U_k (x) conj U_k) X (U_k (x) conj U_k)^dagger``."""
    d = ens.dim
    X = as_matrix(X)
    if X.shape != (d * d, d * d):
        raise ValueError("operator must act on two copies")
    Us = ens.stacked()
    W = np.einsum("kab,kcd->kacbd", Us, Us.conj()).reshape(len(ens), d * d, d * d)
    return np.einsum("k,kai,ij,kbj->ab", np.asarray(ens.weights), W, X, W.conj(), optimize=True)


def channel_twirl(ens: UnitaryEnsemble, ch: Channel) -> Channel:
    """Channel whose CJ state is the ``U (x) conj U`` twirl of ``cj_state(ch)``."""
    if ch.d_in != ch.d_out or ch.d_in != ens.dim:
        raise ValueError("channel must be square and match the ensemble")
    eta = u_ubar_twirl(ens, cj_state(ch))
    return channel_from_cj(eta, (ch.d_out, ch.d_in))


_PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrices():
    return dict(_PAULIS)


def pauli_group(n: int) -> UnitaryEnsemble:
    """The ``4^n`` Pauli operators on ``n <= 2`` qubits, uniform weights."""
    if n not in (1, 2):
        raise ValueError("pauli_group supports n = 1, 2")
    ops = [_PAULIS[k] for k in "IXYZ"]
    if n == 2:
        ops = [np.kron(a, b) for a in ops for b in ops]
    return UnitaryEnsemble.uniform(ops)


def _phase_key(U: np.ndarray):
    flat = U.reshape(-1)
    j = int(np.flatnonzero(np.abs(flat) > 1e-6)[0])
    V = U * (abs(flat[j]) / flat[j])
    R = np.round(V, 8) + 0.0  # normalize -0.0
    return R.tobytes(), V


def _closure(gens, expected: int):
    d = gens[0].shape[0]
    k0, I = _phase_key(np.eye(d, dtype=complex))
    seen = {k0: I}
    frontier = [I]
    while frontier:
        nxt = []
        for U in frontier:
            for G in gens:
                k, V = _phase_key(G @ U)
                if k not in seen:
                    seen[k] = V
                    nxt.append(V)
        frontier = nxt
    if len(seen) != expected:
        raise RuntimeError(f"Clifford closure reached {len(seen)} elements, expected {expected}")
    return tuple(seen.values())


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


@lru_cache(maxsize=None)
def _clifford(n: int):
    if n == 1:
        return _closure([_H, _S], 24)
    I2 = np.eye(2)
    gens = [np.kron(_H, I2), np.kron(I2, _H), np.kron(_S, I2), np.kron(I2, _S), _CNOT]
    return _closure(gens, 11520)


def clifford_1q() -> UnitaryEnsemble:
    """Single-qubit Clifford group modulo phases (24 elements)."""
    return UnitaryEnsemble.uniform(_clifford(1))


def clifford_2q() -> UnitaryEnsemble:
    """Two-qubit Clifford group modulo phases (11520 elements)."""
    return UnitaryEnsemble.uniform(_clifford(2))


def twirl_superop(ens: UnitaryEnsemble, t: int) -> np.ndarray:
    """Superoperator of ``X -> sum p U^{(x)t} X U^{dagger(x)t}``."""
    Us = ens.stacked()
    d = ens.dim
    if t == 2:
        Us = np.einsum("kab,kcd->kacbd", Us, Us).reshape(len(ens), d * d, d * d)
    elif t != 1:
        raise ValueError("only t = 1, 2 supported")
    D = Us.shape[1]
    S = np.einsum("k,kai,kbj->abij", np.asarray(ens.weights), Us, Us.conj(), optimize=True)
    return S.reshape(D * D, D * D)


def haar_twirl_superop(d: int, t: int) -> np.ndarray:
    fn = (lambda E: haar_1_twirl(E, d)) if t == 1 else (lambda E: haar_2_twirl(E, d))
    return superop_of_map(fn, d**t)


def design_defect(ens: UnitaryEnsemble, t: int) -> float:
    """Distance of the ensemble ``t``-twirl from the Haar ``t``-twirl.

    The value is the operator norm induced by the Frobenius norm,
    ``max_X ||(T_D - T_Haar)(X)||_2 / ||X||_2``, evaluated exactly as the
    largest singular value of the superoperator difference on the
    matrix-unit basis. With ``D = d^t`` the diamond defect is sandwiched as
    ``defect / sqrt(D) <= diamond <= D^{3/2} defect``.
    """
    if t not in (1, 2):
        raise ValueError("only t = 1, 2 supported")
    d = ens.dim
    if d**t > 64:
        raise ValueError("d^t above 64")
    diff = twirl_superop(ens, t) - haar_twirl_superop(d, t)
    return float(np.linalg.norm(diff, 2))
