"""Symmetric-key quantum encryption: schemes, attacks, effective channels,
non-malleability and authentication checks.

Decryption outputs land in ``A (+) |bot>``: the plaintext space with one
extra basis vector appended last for rejection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    Channel,
    UnitaryEnsemble,
    apply_on,
    channel_from_cj,
    clifford_1q,
    clifford_2q,
    pauli_group,
    pauli_matrices,
    random_channel,
    replacement_channel,
    superop_of_map,
)
from .entropy import binary_h, mutual_info
from .states import as_matrix, max_entangled
from .tensorlab import Shape, partial_trace, random_unitary, trace_norm


def _embed(dA: int) -> np.ndarray:
    """Isometry ``A -> A (+) |bot>``."""
    return np.eye(dA + 1, dA)


@dataclass(frozen=True)
class Scheme:
    """Key distribution with key-indexed encryption and decryption channels.

    Args:
        key_weights: probability of each key.
        enc_kraus: array ``(keys, n_enc, |C|, |A|)`` of encryption Kraus operators.
        dec_kraus: array ``(keys, n_dec, |A|+1, |C|)`` of decryption Kraus operators.
        unitaries: the ``U_k`` on ``C`` for unitary and tagged unitary schemes.
        tag_dim: size of the tag register, 1 if untagged.
        name: label used in reports.
    """

    key_weights: np.ndarray
    enc_kraus: np.ndarray
    dec_kraus: np.ndarray
    unitaries: np.ndarray | None = None
    tag_dim: int = 1
    name: str = "scheme"

    def __post_init__(self):
        w = np.asarray(self.key_weights, dtype=float)
        E = np.asarray(self.enc_kraus, dtype=complex)
        D = np.asarray(self.dec_kraus, dtype=complex)
        if E.ndim != 4 or D.ndim != 4 or len(w) != E.shape[0] or len(w) != D.shape[0]:
            raise ValueError("need one encryption and one decryption map per key")
        if abs(w.sum() - 1) > 1e-9 or w.min() < 0:
            raise ValueError("key weights must form a probability vector")
        dC, dA = E.shape[2:]
        if D.shape[2:] != (dA + 1, dC):
            raise ValueError("decryption must map C onto A (+) bot")
        object.__setattr__(self, "key_weights", w)
        object.__setattr__(self, "enc_kraus", E)
        object.__setattr__(self, "dec_kraus", D)
        for M, d in ((E, dA), (D, dC)):
            tp = np.einsum("knab,knac->kbc", M.conj(), M)
            if np.max(np.abs(tp - np.eye(d))) > 1e-9:
                raise ValueError("encryption and decryption maps must be trace preserving")
        if self.correctness_residual() > 1e-9:
            raise ValueError("decryption does not invert encryption")

    @property
    def dims(self) -> tuple[int, int]:
        return self.enc_kraus.shape[3], self.enc_kraus.shape[2]

    @property
    def n_keys(self) -> int:
        return len(self.key_weights)

    def enc(self, k: int) -> Channel:
        dA, dC = self.dims
        return Channel(tuple(self.enc_kraus[k]), Shape((dA,)), Shape((dC,)))

    def dec(self, k: int) -> Channel:
        dA, dC = self.dims
        return Channel(tuple(self.dec_kraus[k]), Shape((dC,)), Shape((dA + 1,)))

    def correctness_residual(self) -> float:
        """``max_k`` entrywise distance of ``D_k o E_k`` from the embedding of ``id_A``."""
        dA = self.dims[0]
        M = np.einsum("kiac,kjcb->kijab", self.dec_kraus, self.enc_kraus)
        M = M.reshape(self.n_keys, -1, dA + 1, dA)
        S = np.einsum("knab,kncd->kacbd", M, M.conj()).reshape(self.n_keys, (dA + 1) ** 2, dA * dA)
        J = _embed(dA)
        ref = np.kron(J, J)
        return float(np.max(np.abs(S - ref)))

    def average_decryption(self, Y) -> np.ndarray:
        """``D_K(Y) = sum_k p_k D_k(Y)``."""
        Y = as_matrix(Y)
        return np.einsum("k,knac,cd,knbd->ab", self.key_weights, self.dec_kraus, Y,
                         self.dec_kraus.conj(), optimize=True)

    def average_encryption(self, X) -> np.ndarray:
        X = as_matrix(X)
        return np.einsum("k,knac,cd,knbd->ab", self.key_weights, self.enc_kraus, X,
                         self.enc_kraus.conj(), optimize=True)

    def to_json(self) -> dict:
        dA, dC = self.dims
        return {"key_weights": list(self.key_weights),
                "enc": [self.enc(k).to_json() for k in range(self.n_keys)],
                "dec": [self.dec(k).to_json() for k in range(self.n_keys)],
                "dims": [dA, dC]}

    @classmethod
    def from_json(cls, obj: dict) -> "Scheme":
        enc = [Channel.from_json(c) for c in obj["enc"]]
        dec = [Channel.from_json(c) for c in obj["dec"]]
        return cls(np.asarray(obj["key_weights"]), _pad([c.kraus for c in enc]), _pad([c.kraus for c in dec]))


def _pad(kraus_lists) -> np.ndarray:
    """Stack per-key Kraus lists, padding with zero operators to a common count."""
    n = max(len(ks) for ks in kraus_lists)
    shape = kraus_lists[0][0].shape
    out = np.zeros((len(kraus_lists), n) + shape, dtype=complex)
    for k, ks in enumerate(kraus_lists):
        for i, K in enumerate(ks):
            out[k, i] = K
    return out


@dataclass(frozen=True)
class Attack:
    """Channel on ``C (x) B -> C (x) B~`` with ``side_dims = (|B|, |B~|)``."""

    channel: Channel
    side_dims: tuple[int, int] = (1, 1)

    def __post_init__(self):
        dB, dBt = (int(x) for x in self.side_dims)
        object.__setattr__(self, "side_dims", (dB, dBt))
        ch = self.channel
        if ch.d_in % dB or ch.d_out % dBt or ch.d_in // dB != ch.d_out // dBt:
            raise ValueError("attack dimensions do not factor as C (x) B")
        if ch.tp_residual() > 1e-9:
            raise ValueError("attack must be trace preserving")

    @property
    def c_dim(self) -> int:
        return self.channel.d_in // self.side_dims[0]

    @property
    def kraus(self) -> np.ndarray:
        return np.stack(self.channel.kraus)


def _attack(kraus, dC: int, dB: int, dBt: int) -> Attack:
    return Attack(Channel(tuple(kraus), Shape((dC, dB)), Shape((dC, dBt))), (dB, dBt))


def unitary_scheme(ens: UnitaryEnsemble, name: str = "unitary") -> Scheme:
    """``E_k = U_k . U_k^dagger`` and ``D_k`` its inverse embedded into ``A (+) bot``."""
    U = ens.stacked()
    d = ens.dim
    J = _embed(d)
    dec = np.einsum("ab,kcb->kac", J, U.conj())[:, None]
    return Scheme(np.asarray(ens.weights), U[:, None], dec, unitaries=U, name=name)


def pauli_otp(n: int = 1) -> Scheme:
    """Quantum one-time pad with the ``4^n`` Pauli keys."""
    return unitary_scheme(pauli_group(n), f"pauli_otp({n})")


def clifford_scheme(n: int = 1, keys: int | None = None, seed=None) -> Scheme:
    """Clifford encryption on ``n`` qubits.

    For ``n = 2`` a uniform subsample of ``keys`` group elements replaces the
    full 11520-element average when ``keys`` is given.
    """
    if n == 1:
        ens = clifford_1q()
    elif n == 2:
        ens = clifford_2q()
        if keys is not None and keys < len(ens):
            idx = np.sort(np.random.default_rng(seed).choice(len(ens), size=int(keys), replace=False))
            ens = UnitaryEnsemble.uniform([ens.unitaries[i] for i in idx])
    else:
        raise ValueError("clifford_scheme supports n = 1, 2")
    return unitary_scheme(ens, f"clifford_scheme({n})")


def classical_otp() -> Scheme:
    """One-bit classical one-time pad ``c = x xor k`` embedded as the keys ``{1, X}``."""
    X = pauli_matrices()["X"]
    return unitary_scheme(UnitaryEnsemble.uniform([np.eye(2), X]), "classical_otp")


def tagged_scheme(base: Scheme, tag_dim: int, tag_state=None) -> Scheme:
    """Encrypt ``X (x) |t><t|_T`` with ``base``; decryption checks the tag.

    The base plaintext ``A_b`` is split as ``A (x) T`` with ``|T| = tag_dim``.
    Decryption applies the base decryption, keeps the ``|t>_T`` component as
    plaintext and sends everything else, including a base rejection, to ``bot``.
    """
    dAb, dC = base.dims
    tag_dim = int(tag_dim)
    if tag_dim < 1 or dAb % tag_dim:
        raise ValueError("tag dimension must divide the base plaintext dimension")
    dA = dAb // tag_dim
    t = np.zeros(tag_dim, dtype=complex)
    t[0] = 1
    if tag_state is not None:
        t = np.asarray(tag_state, dtype=complex).reshape(-1)
        t = t / np.linalg.norm(t)
    # unitary on T whose first column is the tag
    Q, _ = np.linalg.qr(np.column_stack([t, np.eye(tag_dim, dtype=complex)]))
    Q = Q[:, :tag_dim]
    Q[:, 0] = t
    enc = np.einsum("kncb,ba->knca", base.enc_kraus, np.kron(np.eye(dA), t[:, None]))
    W = np.kron(np.eye(dA), Q.conj().T)  # rows: A (x) rotated tag basis, tag first
    rows = np.einsum("ab,knbc->knac", W, base.dec_kraus[:, :, :dAb, :])
    rows = rows.reshape(base.n_keys, base.dec_kraus.shape[1], dA, tag_dim, dC)
    acc = rows[:, :, :, 0, :]
    rej = np.concatenate([rows[:, :, :, 1:, :].reshape(base.n_keys, base.dec_kraus.shape[1], -1, dC),
                          base.dec_kraus[:, :, dAb:, :]], axis=2)
    nb, nr = base.dec_kraus.shape[1], rej.shape[2]
    dec = np.zeros((base.n_keys, nb * (1 + nr), dA + 1, dC), dtype=complex)
    for i in range(nb):
        dec[:, i * (1 + nr), :dA, :] = acc[:, i]
        for r in range(nr):
            dec[:, i * (1 + nr) + 1 + r, dA, :] = rej[:, i, r]
    return Scheme(base.key_weights, enc, dec, unitaries=base.unitaries, tag_dim=tag_dim * base.tag_dim,
                  name=f"tagged({base.name},{tag_dim})")


def injection_scheme(base: Scheme) -> Scheme:
    """Ciphertext space ``C (+) A^``; decryption measures the block, decrypts
    the ``C`` block and passes the ``A^`` block through to the plaintext."""
    dA, dC = base.dims
    K, ne = base.n_keys, base.enc_kraus.shape[1]
    enc = np.zeros((K, ne, dC + dA, dA), dtype=complex)
    enc[:, :, :dC, :] = base.enc_kraus
    nd = base.dec_kraus.shape[1]
    dec = np.zeros((K, nd + 1, dA + 1, dC + dA), dtype=complex)
    dec[:, :nd, :, :dC] = base.dec_kraus
    dec[:, nd, :dA, dC:] = np.eye(dA)
    return Scheme(base.key_weights, enc, dec, name=f"injection({base.name})")


# attacks

def identity_attack(dC: int, dB: int = 1) -> Attack:
    return _attack([np.eye(dC * dB)], dC, dB, dB)


def unitary_attack(W, dB: int = 1) -> Attack:
    W = np.asarray(W, dtype=complex)
    return _attack([np.kron(W, np.eye(dB))], W.shape[0], dB, dB)


def replace_attack(sigma, dB: int = 1) -> Attack:
    """Discard ``C`` and prepare ``sigma``; ``B`` is passed through."""
    sig = as_matrix(sigma)
    dC = sig.shape[0]
    ks = [np.kron(K, np.eye(dB)) for K in replacement_channel(sig, dC).kraus]
    return _attack(ks, dC, dB, dB)


def random_attack(dC: int, dB: int, dBt: int, n_kraus: int = 3, seed=None) -> Attack:
    ch = random_channel(dC * dB, dC * dBt, n_kraus, seed)
    return _attack(ch.kraus, dC, dB, dBt)


def random_isometric_attack(dC: int, dB: int, dBt: int, seed=None) -> Attack:
    """Haar-random isometry ``C (x) B -> C (x) B~``."""
    if dBt < dB:
        raise ValueError("an isometry needs |B~| >= |B|")
    V = random_unitary(dC * dBt, seed)[:, : dC * dB]
    return _attack([V], dC, dB, dBt)


def coin_pauli_attack() -> Attack:
    """Qubit attack that flips ``X`` and, controlled by a fresh fair coin
    recorded in ``B~``, also applies ``Z``; no branch is the identity."""
    P = pauli_matrices()
    ks = []
    for b, G in enumerate((P["X"], P["Z"] @ P["X"])):
        coin = np.zeros((2, 1))
        coin[b, 0] = 1
        ks.append(np.kron(G, coin) / np.sqrt(2))
    return _attack(ks, 2, 1, 2)


def injection_attack(c_dim: int, a_dim: int) -> Attack:
    """``X -> tr(X) (0_C (+) phi+_{A^ B~})`` on the ciphertext space ``C (+) A^``."""
    dCp = c_dim + a_dim
    v = np.zeros(dCp * a_dim, dtype=complex)
    for j in range(a_dim):
        v[(c_dim + j) * a_dim + j] = 1
    v /= np.sqrt(a_dim)
    ch = replacement_channel(np.outer(v, v.conj()), dCp)
    return _attack(ch.kraus, dCp, 1, a_dim)


def trace_side(a: Attack) -> Attack:
    """The attack followed by discarding ``B~``."""
    dB, dBt = a.side_dims
    dC = a.c_dim
    ks = []
    for L in a.channel.kraus:
        L4 = L.reshape(dC, dBt, dC * dB)
        ks.extend(L4[:, j, :] for j in range(dBt))
    return _attack(ks, dC, dB, 1)


# effective channels

def _check_pair(s: Scheme, a: Attack) -> None:
    if s.dims[1] != a.c_dim:
        raise ValueError("attack does not act on the scheme's ciphertext space")


def _composite_kraus(s: Scheme, a: Attack, keys=None) -> np.ndarray:
    """``(D_k (x) 1) L_j (E_k (x) 1)`` as an array ``(keys, n, |A|+1 |B~|, |A| |B|)``."""
    _check_pair(s, a)
    dB, dBt = a.side_dims
    E = s.enc_kraus if keys is None else s.enc_kraus[keys]
    D = s.dec_kraus if keys is None else s.dec_kraus[keys]
    Kn = E.shape[0]
    Eb = np.einsum("knca,bd->kncbad", E, np.eye(dB)).reshape(Kn, E.shape[1], -1, E.shape[3] * dB)
    Db = np.einsum("knac,bd->knabcd", D, np.eye(dBt)).reshape(Kn, D.shape[1], -1, D.shape[3] * dBt)
    L = a.kraus
    LE = np.einsum("jpq,klqs->kjlps", L, Eb, optimize=True)
    T = np.einsum("kiap,kjlps->kijlas", Db, LE, optimize=True)
    return T.reshape(Kn, -1, T.shape[-2], T.shape[-1])


def _batches(n: int, size: int = 2048):
    for start in range(0, n, size):
        yield np.arange(start, min(n, start + size))


def effective_superop(s: Scheme, a: Attack) -> np.ndarray:
    """Superoperator of ``tr_K (D o Lambda o E)(. (x) tau_K)`` from ``A B`` to ``A~ B~``."""
    out = 0
    for idx in _batches(s.n_keys):
        T = _composite_kraus(s, a, idx)
        w = s.key_weights[idx]
        S = np.einsum("k,knps,knqt->pqst", w, T, T.conj(), optimize=True)
        out = out + S.reshape(T.shape[2] ** 2, T.shape[3] ** 2)
    return out


def effective_channel(s: Scheme, a: Attack) -> Channel:
    """Key-averaged effective channel ``A (x) B -> (A (+) bot) (x) B~``."""
    dA = s.dims[0]
    dB, dBt = a.side_dims
    eta = 0
    for idx in _batches(s.n_keys):
        T = _composite_kraus(s, a, idx)
        V = (np.sqrt(s.key_weights[idx])[:, None, None] * T.reshape(len(idx), T.shape[1], -1)).reshape(-1, T.shape[2] * T.shape[3])
        eta = eta + V.T @ V.conj()
    eta = eta / (dA * dB)
    ch = channel_from_cj(eta, ((dA + 1) * dBt, dA * dB))
    return Channel(ch.kraus, Shape((dA, dB)), Shape((dA + 1, dBt)))


def _attack_on_phi(a: Attack, XB) -> np.ndarray:
    """``(Lambda (x) id_C')(phi+_{CC'} (x) X_B)`` ordered ``C, C', B~``."""
    dC = a.c_dim
    dB, dBt = a.side_dims
    phi = max_entangled(dC).density().matrix
    M = np.kron(phi, as_matrix(XB))
    out, _ = apply_on(a.channel.kraus, M, (dC, dC, dB), [0, 2])
    # output order is (C B~), C'
    out6 = out.reshape(dC, dBt, dC, dC, dBt, dC).transpose(0, 2, 1, 3, 5, 4)
    return out6.reshape(dC * dC * dBt, dC * dC * dBt)


def attack_components(a: Attack):
    """Superoperators of ``Lambda'`` and ``Lambda''`` on ``B -> B~``.

    ``Lambda' = tr_{CC'}[phi+ Lambda(phi+ (x) .)]`` and
    ``Lambda'' = tr_{CC'}[Pi- Lambda(phi+ (x) .)]`` with ``Pi- = 1 - phi+``.
    """
    dC = a.c_dim
    dB, dBt = a.side_dims
    phi = max_entangled(dC).density().matrix

    def prime(X):
        Y = _attack_on_phi(a, X).reshape(dC * dC, dBt, dC * dC, dBt)
        return np.einsum("ij,jbic->bc", phi, Y)

    def full(X):
        Y = _attack_on_phi(a, X).reshape(dC * dC, dBt, dC * dC, dBt)
        return np.einsum("ibic->bc", Y)

    Sp = superop_of_map(prime, dB)
    return Sp, superop_of_map(full, dB) - Sp


def _apply_side(S: np.ndarray, X, dA: int, dB: int, dBt: int) -> np.ndarray:
    """``(id_A (x) Lambda)(X_AB)`` for ``Lambda`` given by its superoperator ``S``."""
    X4 = as_matrix(X).reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3)
    S4 = S.reshape(dBt, dBt, dB, dB)
    Y = np.einsum("pqbc,xybc->xpyq", S4, X4)
    return Y.reshape(dA * dBt, dA * dBt)


def exact_effective(s: Scheme, a: Attack) -> np.ndarray:
    """Superoperator of ``id (x) L' + (|C|^2 <D_K(tau)> - id) (x) L'' / (|C|^2 - 1)``.

    ``<sigma>`` is the replacement map ``X -> tr(X) sigma``. The formula is
    completely positive only for non-malleable schemes, so the map is
    returned as a superoperator rather than a channel.
    """
    _check_pair(s, a)
    dA, dC = s.dims
    dB, dBt = a.side_dims
    Sp, Spp = attack_components(a)
    J = np.kron(_embed(dA), np.eye(dBt))
    DK = s.average_decryption(np.eye(dC) / dC)
    c2 = dC * dC

    def fn(X):
        first = J @ _apply_side(Sp, X, dA, dB, dBt) @ J.T
        XB = partial_trace(X, (dA, dB), [1])
        side = (Spp @ XB.reshape(-1)).reshape(dBt, dBt)
        second = c2 * np.kron(DK, side) - J @ _apply_side(Spp, X, dA, dB, dBt) @ J.T
        return first + second / (c2 - 1)

    return superop_of_map(fn, dA * dB)


def superop_distance(S0, S1) -> float:
    """Frobenius norm of the difference of two superoperators."""
    return float(np.linalg.norm(np.asarray(S0) - np.asarray(S1)))


def p_equals(a: Attack, rho_B=None) -> float:
    """``tr[(phi+_{CC'} (x) 1) Lambda(phi+_{CC'} (x) rho_B)]``."""
    dB, dBt = a.side_dims
    rho_B = np.eye(1) if rho_B is None else as_matrix(rho_B)
    if rho_B.shape != (dB, dB):
        raise ValueError("side state does not match the attack")
    Sp, _ = attack_components(a)
    out = (Sp @ rho_B.reshape(-1)).reshape(dBt, dBt)
    return float(min(max(np.trace(out).real, 0.0), 1.0))


def _apply_effective(s: Scheme, a: Attack, rho_ABR, dims) -> tuple[np.ndarray, list[int]]:
    dA, dB, dR = (int(x) for x in dims)
    if (dA, dB) != (s.dims[0], a.side_dims[0]):
        raise ValueError("input roles do not match the scheme and attack")
    ch = effective_channel(s, a)
    out, _ = apply_on(ch, as_matrix(rho_ABR), (dA, dB, dR), [0, 1])
    return out, [dA + 1, a.side_dims[1], dR]


def nm_gap(s: Scheme, a: Attack, rho_ABR, dims) -> float:
    """``I(A~R:B~) - I(AR:B) - h(p_=)`` on the output of the effective channel.

    Args:
        rho_ABR: input state ordered ``A, B, R``.
        dims: ``(|A|, |B|, |R|)``.
    """
    rho = as_matrix(rho_ABR)
    dA, dB, dR = (int(x) for x in dims)
    out, odims = _apply_effective(s, a, rho, dims)
    rho_B = partial_trace(rho, (dA, dB, dR), [1])
    after = mutual_info(out, odims, [0, 2], [1])
    before = mutual_info(rho, (dA, dB, dR), [0, 2], [1])
    return float(after - before - binary_h(p_equals(a, rho_B)))


def abw_membership(s: Scheme, a: Attack, tol: float = 1e-8):
    """Least-squares distance of the average plaintext map from
    ``span{id, X -> tr(X) D_K(sigma)}``.

    The attack must have trivial side systems. Returns ``(member, residual)``.
    """
    if a.side_dims != (1, 1):
        raise ValueError("membership is defined for attacks without side systems")
    dA, dC = s.dims
    S = effective_superop(s, a)
    J = _embed(dA)
    cols = [np.kron(J, J).reshape(-1)]
    vec_id = np.eye(dA).reshape(-1)
    for i in range(dC):
        for j in range(dC):
            Eij = np.zeros((dC, dC))
            Eij[i, j] = 1
            cols.append(np.outer(s.average_decryption(Eij).reshape(-1), vec_id).reshape(-1))
    B = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(B, S.reshape(-1), rcond=None)
    res = float(np.linalg.norm(B @ coef - S.reshape(-1)))
    return res <= tol, res


def injection_demo(base: Scheme) -> dict:
    """Run the plaintext-injection attack on ``injection_scheme(base)``.

    The plaintext is maximally mixed with trivial ``B`` and ``R``. The report
    holds the mutual information the attacker gains, its ``h(p_=)``
    allowance, the resulting gap, and the average-channel membership check
    for the attack with ``B~`` discarded.
    """
    dA, dC = base.dims
    s = injection_scheme(base)
    a = injection_attack(dC, dA)
    rho = np.eye(dA) / dA
    out, odims = _apply_effective(s, a, rho, (dA, 1, 1))
    info = mutual_info(out, odims, [0, 2], [1])
    p_eq = p_equals(a)
    member, res = abw_membership(s, trace_side(a))
    return {"scheme": s.name, "c_prime_dim": dC + dA, "mutual_info": float(info), "p_equals": p_eq,
            "h_budget": binary_h(p_eq), "nm_gap": float(info - binary_h(p_eq)),
            "abw_member": bool(member), "abw_residual": res}


# authentication

def accept_probability_uniform(s: Scheme) -> float:
    """``tr Pi_acc D_K(tau_C)``."""
    dA, dC = s.dims
    return float(1 - s.average_decryption(np.eye(dC) / dC)[dA, dA].real)


def _inputs(inputs):
    return [as_matrix(r) for r in inputs]


def dns_check(s: Scheme, a: Attack, inputs) -> float:
    """Largest DNS residual over ``inputs`` (states on ``A B``).

    The simulator uses ``Lambda_acc = Lambda' - Lambda'' / (|C|^2 - 1)`` and
    ``Lambda_rej = (1 - g) |C|^2 Lambda'' / (|C|^2 - 1)`` with ``g`` the
    acceptance probability of a maximally mixed ciphertext.
    """
    _check_pair(s, a)
    dA, dC = s.dims
    dB, dBt = a.side_dims
    S = effective_superop(s, a)
    Sp, Spp = attack_components(a)
    c2 = dC * dC
    g = accept_probability_uniform(s)
    S_acc = Sp - Spp / (c2 - 1)
    S_rej = (1 - g) * c2 / (c2 - 1) * Spp
    J = np.kron(_embed(dA), np.eye(dBt))
    bot = np.zeros((dA + 1, dA + 1))
    bot[dA, dA] = 1
    worst = 0.0
    for rho in _inputs(inputs):
        D_out = dA + 1
        real = (S @ rho.reshape(-1)).reshape(D_out * dBt, D_out * dBt)
        rho_B = partial_trace(rho, (dA, dB), [1])
        ideal = J @ _apply_side(S_acc, rho, dA, dB, dBt) @ J.T
        ideal = ideal + np.kron(bot, (S_rej @ rho_B.reshape(-1)).reshape(dBt, dBt))
        worst = max(worst, trace_norm(real - ideal))
    return worst


def gyz_simulator(a: Attack) -> np.ndarray:
    """``Gamma_V = tr_C V / |C|`` for an isometric attack ``V``."""
    if len(a.channel.kraus) != 1:
        raise ValueError("the GYZ check needs an isometric (single Kraus) attack")
    dB, dBt = a.side_dims
    dC = a.c_dim
    V = a.channel.kraus[0].reshape(dC, dBt, dC, dB)
    return np.einsum("ibic->bc", V) / dC


def gyz_check(s: Scheme, a: Attack, inputs) -> float:
    """Largest residual ``sum_k p_k ||Pi_acc D_k(Lambda(E_k(rho))) Pi_acc - Gamma rho Gamma^dagger||_1``.

    The key register stays in the output, so the distance splits into the
    key-weighted sum of per-key distances.
    """
    if s.unitaries is None or s.tag_dim < 2:
        raise ValueError("the GYZ check needs a tagged unitary scheme")
    G = gyz_simulator(a)
    dA = s.dims[0]
    dB, dBt = a.side_dims
    Gfull = np.kron(np.eye(dA), G)
    worst = 0.0
    for rho in _inputs(inputs):
        ideal = Gfull @ rho @ Gfull.conj().T
        total = 0.0
        for idx in _batches(s.n_keys):
            T = _composite_kraus(s, a, idx)
            T = T.reshape(T.shape[0], T.shape[1], dA + 1, dBt, -1)[:, :, :dA].reshape(T.shape[0], T.shape[1], dA * dBt, -1)
            out = np.einsum("knps,st,knqt->kpq", T, rho, T.conj(), optimize=True)
            diff = out - ideal
            ev = np.linalg.eigvalsh(0.5 * (diff + np.conj(np.swapaxes(diff, 1, 2))))
            total += float(np.sum(s.key_weights[idx] * np.sum(np.abs(ev), axis=1)))
        worst = max(worst, total)
    return worst


def gyz_bound(tag_dim: int, delta: float = 0.0) -> float:
    """``4 (1/|T| + 3 delta)^{1/3}``."""
    return float(4 * (1 / tag_dim + 3 * delta) ** (1 / 3))
