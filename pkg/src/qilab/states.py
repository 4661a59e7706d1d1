"""Quantum states and canonical constructions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensorlab import (
    TOL_VERIFY,
    Shape,
    as_dims,
    matrix_from_json,
    matrix_to_json,
    mat_func,
    partial_trace,
    permute_systems,
    psd_eig,
)

NORMALIZED = "normalized"
SUBNORMALIZED = "subnormalized"


@dataclass(frozen=True)
class MultiState:
    """A (possibly subnormalized) density operator on a composite system."""

    matrix: np.ndarray
    shape: Shape
    normalization: str = NORMALIZED

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        shape = self.shape if isinstance(self.shape, Shape) else Shape(as_dims(self.shape))
        if M.shape != (shape.total, shape.total):
            raise ValueError("matrix size does not match shape")
        if np.max(np.abs(M - M.conj().T), initial=0.0) > TOL_VERIFY:
            raise ValueError("state matrix is not Hermitian")
        psd_eig(M)  # raises when not PSD
        tr = np.trace(M).real
        if self.normalization == NORMALIZED:
            if abs(tr - 1) > TOL_VERIFY:
                raise ValueError(f"normalized state has trace {tr}")
        elif self.normalization == SUBNORMALIZED:
            if not 0 < tr <= 1 + TOL_VERIFY:
                raise ValueError(f"subnormalized state has trace {tr}")
        else:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "shape", shape)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    def marginal(self, keep: Sequence[int]) -> "MultiState":
        keep = sorted(keep)
        M = partial_trace(self.matrix, self.dims, keep)
        sub = Shape(tuple(self.dims[i] for i in keep),
                    tuple(self.shape.labels[i] for i in keep) if self.shape.labels else ())
        return MultiState(M, sub, self.normalization)

    def to_json(self) -> dict:
        return {"matrix": matrix_to_json(self.matrix), "shape": self.shape.to_json(),
                "normalization": self.normalization}

    @classmethod
    def from_json(cls, obj: dict) -> "MultiState":
        return cls(matrix_from_json(obj["matrix"]), Shape.from_json(obj["shape"]),
                   obj.get("normalization", NORMALIZED))


@dataclass(frozen=True)
class PureVec:
    """A unit vector on a composite system."""

    amplitudes: np.ndarray
    shape: Shape

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        shape = self.shape if isinstance(self.shape, Shape) else Shape(as_dims(self.shape))
        if v.size != shape.total:
            raise ValueError("vector length does not match shape")
        if abs(np.linalg.norm(v) - 1) > TOL_VERIFY:
            raise ValueError("vector is not normalized")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "shape", shape)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    def density(self) -> MultiState:
        v = self.amplitudes
        return MultiState(np.outer(v, v.conj()), self.shape)

    def to_json(self) -> dict:
        return {"re": self.amplitudes.real.tolist(), "im": self.amplitudes.imag.tolist(),
                "shape": self.shape.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "PureVec":
        v = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        return cls(v, Shape.from_json(obj["shape"]))


def as_matrix(x) -> np.ndarray:
    """Density matrix of a ``MultiState``, ``PureVec``, vector or array."""
    if isinstance(x, MultiState):
        return x.matrix
    if isinstance(x, PureVec):
        v = x.amplitudes
        return np.outer(v, v.conj())
    x = np.asarray(x, dtype=complex)
    if x.ndim == 1:
        return np.outer(x, x.conj())
    return x


def max_entangled(d: int) -> PureVec:
    """``|phi+> = d^{-1/2} sum_i |i>|i>``."""
    return PureVec(np.eye(d).reshape(-1) / np.sqrt(d), Shape((d, d)))


def max_mixed(d: int) -> MultiState:
    return MultiState(np.eye(d) / d, Shape((d,)))


def cq_state(p: Sequence[float], states: Sequence) -> MultiState:
    """Classical-quantum state ``sum_i p_i |i><i| (x) rho_i``."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    if abs(p.sum() - 1) > TOL_VERIFY:
        raise ValueError("probabilities must sum to one")
    mats = [as_matrix(s) for s in states]
    if len(mats) != p.size:
        raise ValueError("need one state per probability")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise ValueError("all conditional states must share a dimension")
    k = p.size
    out = np.zeros((k * d, k * d), dtype=complex)
    for i, (pi, m) in enumerate(zip(p, mats)):
        out[i * d:(i + 1) * d, i * d:(i + 1) * d] = pi * m
    return MultiState(out, Shape((k, d)))


def purify(rho) -> PureVec:
    """Canonical purification ``sqrt(d) (rho^{1/2} (x) 1)|phi+>``.

    The purifying copy is the second tensor factor.
    """
    if isinstance(rho, MultiState) and rho.normalization != NORMALIZED:
        raise ValueError("purify needs a normalized state")
    M = as_matrix(rho)
    if abs(np.trace(M).real - 1) > TOL_VERIFY:
        raise ValueError("purify needs a normalized state")
    d = M.shape[0]
    sq = mat_func(M, "sqrt")
    v = (sq @ np.eye(d)).reshape(-1)  # sum_i (sqrt(rho)|i>) (x) |i>
    return PureVec(v / np.linalg.norm(v), Shape((d, d)))


def schmidt(v, cut: Sequence[int], shape=None):
    """Schmidt decomposition across the bipartition ``cut | rest``.

    Returns:
        ``(coeffs, left, right)``: descending coefficients and the matching
        columns of left (on ``cut``) and right (on the rest) bases, so that
        ``v = sum_k coeffs[k] left[:, k] (x) right[:, k]`` after reordering
        the factors as ``cut + rest``.
    """
    if isinstance(v, PureVec):
        dims, amp = v.dims, v.amplitudes
    else:
        dims, amp = as_dims(shape), np.asarray(v, dtype=complex)
    cut = sorted(set(cut))
    rest = [i for i in range(len(dims)) if i not in cut]
    if not cut or not rest:
        raise ValueError("cut must be a proper nonempty subset")
    w = permute_systems(amp, dims, cut + rest)
    dl = int(np.prod([dims[i] for i in cut]))
    U, s, Vh = np.linalg.svd(w.reshape(dl, -1), full_matrices=False)
    keep = s > 1e-14
    U, s, Vh = U[:, keep], s[keep], Vh[keep]
    # phase fix: first nonzero amplitude of each left vector real positive
    for k in range(U.shape[1]):
        j = np.flatnonzero(np.abs(U[:, k]) > 1e-12)[0]
        ph = U[j, k] / abs(U[j, k])
        U[:, k] /= ph
        Vh[k] *= ph
    return s, U, Vh.T


def bell_basis(m: int) -> list[PureVec]:
    """Generalized Bell basis ``|psi_kl> = m^{-1/2} sum_s e^{2 pi i k s/m}|s>|s+l>``."""
    if m < 2:
        raise ValueError("m must be >= 2")
    out = []
    for k in range(m):
        for l in range(m):
            v = np.zeros(m * m, dtype=complex)
            for s in range(m):
                v[s * m + (s + l) % m] = np.exp(2j * np.pi * k * s / m)
            out.append(PureVec(v / np.sqrt(m), Shape((m, m))))
    return out


def embed_subnormalized(rho, t: float) -> MultiState:
    """Scale a normalized state to trace ``t``."""
    if not 0 < t <= 1:
        raise ValueError("trace target must lie in (0, 1]")
    M = as_matrix(rho)
    shape = rho.shape if isinstance(rho, MultiState) else Shape((M.shape[0],))
    return MultiState(t * M, shape, NORMALIZED if t == 1 else SUBNORMALIZED)
