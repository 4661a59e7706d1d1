"""Entropic quantities in bits.

Subsystem arguments (``A``, ``B``, ``C``) are sequences of subsystem indices
into ``shape``; a single int is accepted as shorthand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .states import as_matrix
from .tensorlab import RANK_CUTOFF, as_dims, herm_eig, mat_func, partial_trace, permute_systems, psd_eig

KINDS = ("H", "H_cond", "I", "I_cond", "D", "D_max", "H_min", "H_max", "H0", "I_max_fixed", "I_max_opt")


@dataclass
class EntropyValue:
    kind: str
    value: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown entropy kind {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": self.value,
                "meta": {"restrictions": list(self.meta.get("restrictions", []))}}


def _parts(x) -> list[int]:
    if isinstance(x, (int, np.integer)):
        return [int(x)]
    return sorted(int(i) for i in x)


def _disjoint(*groups):
    seen: set[int] = set()
    for g in groups:
        if seen & set(g):
            raise ValueError("subsystem sets overlap")
        seen |= set(g)


def shannon(p) -> float:
    """Shannon entropy of a probability vector, with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float).ravel()
    if np.any(p < -1e-10):
        raise ValueError("probabilities must be nonnegative")
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def binary_h(q: float) -> float:
    """Binary entropy ``h(q)``."""
    if not -1e-12 <= q <= 1 + 1e-12:
        raise ValueError("q must lie in [0, 1]")
    q = min(max(q, 0.0), 1.0)
    return shannon([q, 1 - q])


def _spectrum(rho) -> np.ndarray:
    M = as_matrix(rho)
    return psd_eig(M)[0]


def von_neumann(rho) -> float:
    """``H(rho) = -tr rho log rho``."""
    return shannon(_spectrum(rho))


def _h(rho, shape, parts) -> float:
    if not parts:
        return 0.0
    return von_neumann(partial_trace(as_matrix(rho), shape, parts))


def cond_entropy(rho, shape, A, B) -> float:
    """``H(A|B) = H(AB) - H(B)``."""
    A, B = _parts(A), _parts(B)
    _disjoint(A, B)
    return _h(rho, shape, A + B) - _h(rho, shape, B)


def mutual_info(rho, shape, A, B) -> float:
    """``I(A:B) = H(A) + H(B) - H(AB)``."""
    A, B = _parts(A), _parts(B)
    _disjoint(A, B)
    return _h(rho, shape, A) + _h(rho, shape, B) - _h(rho, shape, A + B)


def cond_mutual_info(rho, shape, A, B, C) -> float:
    """``I(A:B|C) = H(AC) + H(BC) - H(ABC) - H(C)``."""
    A, B, C = _parts(A), _parts(B), _parts(C)
    _disjoint(A, B, C)
    return (_h(rho, shape, A + C) + _h(rho, shape, B + C)
            - _h(rho, shape, A + B + C) - _h(rho, shape, C))


def _support_violated(rho, sigma) -> bool:
    w, V = psd_eig(sigma)
    ker = V[:, w <= RANK_CUTOFF]
    if ker.shape[1] == 0:
        return False
    overlap = np.real(np.trace(ker.conj().T @ rho @ ker))
    return overlap > RANK_CUTOFF


def rel_entropy(rho, sigma) -> float:
    """``D(rho||sigma) = tr rho (log rho - log sigma)``; ``inf`` off support."""
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError("dimension mismatch")
    if _support_violated(r, s):
        return math.inf
    val = np.trace(r @ (mat_func(r, "log2") - mat_func(s, "log2"))).real
    return float(max(val, 0.0)) if abs(val) < 1e-12 else float(val)


def d_max(rho, sigma) -> float:
    """Max-relative entropy ``log2 lambda_max(sigma^{-1/2} rho sigma^{-1/2})``."""
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError("dimension mismatch")
    if _support_violated(r, s):
        return math.inf
    Q = mat_func(s, "pinv_sqrt")
    X = Q @ r @ Q
    lam = herm_eig(0.5 * (X + X.conj().T))[0][-1]
    if lam <= 0:
        return -math.inf
    return float(np.log2(lam))


def h_min(rho) -> float:
    """``H_min = -log2 ||rho||_inf``."""
    return float(-np.log2(_spectrum(rho)[-1]))


def h_max(rho) -> float:
    """``H_max = 2 log2 tr sqrt(rho)``."""
    w = _spectrum(rho)
    return float(2 * np.log2(np.sum(np.sqrt(w))))


def h0(rho) -> float:
    """``H_0 = log2 rank(rho)`` with eigenvalue cutoff 1e-10."""
    w = _spectrum(rho)
    return float(np.log2(np.count_nonzero(w > RANK_CUTOFF)))


def h_min_cond_fixed(rho, shape, A, B) -> float:
    """``-D_max(rho_AB || 1_A (x) rho_B)``.

    The reference on ``B`` is fixed to the marginal, so this is a lower bound
    on the optimized conditional min-entropy.
    """
    A, B = _parts(A), _parts(B)
    _disjoint(A, B)
    dims = as_dims(shape)
    M = as_matrix(rho)
    rho_ab = partial_trace(M, dims, A + B)
    sub = [dims[i] for i in sorted(A + B)]
    rho_b = partial_trace(M, dims, B)
    ref = _embed_product(np.eye(int(np.prod([dims[i] for i in A]))), rho_b, sorted(A + B), A, B, sub)
    return -d_max(rho_ab, ref)


def i_max_fixed(rho, shape, A, B) -> float:
    """``D_max(rho_AB || rho_A (x) rho_B)``, an upper bound on the optimized I_max."""
    A, B = _parts(A), _parts(B)
    _disjoint(A, B)
    dims = as_dims(shape)
    M = as_matrix(rho)
    joint = sorted(A + B)
    sub = [dims[i] for i in joint]
    rho_ab = partial_trace(M, dims, joint)
    ref = _embed_product(partial_trace(M, dims, A), partial_trace(M, dims, B), joint, A, B, sub)
    return d_max(rho_ab, ref)


def _embed_product(XA, XB, joint, A, B, sub_dims):
    """``X_A (x) X_B`` with factors placed in the increasing order of ``joint``."""
    # build in order A + B then permute into joint order
    order = A + B
    M = np.kron(XA, XB)
    cur = [sub_dims[joint.index(i)] for i in order]
    perm = [order.index(i) for i in joint]
    return permute_systems(M, cur, perm)


def _bloch_state(x, y, z):
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def _fibonacci_sphere(n: int):
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    th = np.pi * (1 + 5**0.5) * i
    return np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], axis=1)


def i_max_opt(rho, shape, A, B, grid_depth: int = 2) -> float:
    """``min_{sigma_A} D_max(rho_AB || sigma_A (x) rho_B)`` over a Bloch grid.

    Only a qubit ``A`` is supported. The grid starts from a coarse
    radial/angular lattice in the Bloch ball that always contains the
    maximally mixed state and the marginal ``rho_A``; each refinement level
    adds a finer lattice around the incumbent, so the value is
    non-increasing in ``grid_depth``.

    Args:
        grid_depth: number of refinement levels, 0 to 4.
    """
    A, B = _parts(A), _parts(B)
    _disjoint(A, B)
    dims = as_dims(shape)
    if int(np.prod([dims[i] for i in A])) != 2:
        raise ValueError("i_max_opt supports only a qubit A")
    if not 0 <= grid_depth <= 4:
        raise ValueError("grid_depth must be in 0..4")
    M = as_matrix(rho)
    joint = sorted(A + B)
    sub = [dims[i] for i in joint]
    rho_ab = partial_trace(M, dims, joint)
    rho_a = partial_trace(M, dims, A)
    rho_b = partial_trace(M, dims, B)

    def value(r):
        return d_max(rho_ab, _embed_product(_bloch_state(*r), rho_b, joint, A, B, sub))

    r_a = np.array([2 * rho_a[0, 1].real, -2 * rho_a[0, 1].imag, (rho_a[0, 0] - rho_a[1, 1]).real])
    dirs = _fibonacci_sphere(64)
    cands = [np.zeros(3), r_a] + [r * u for r in (0.25, 0.5, 0.75, 0.95) for u in dirs]
    best_r, best = None, math.inf
    for c in cands:
        v = value(c)
        if v < best:
            best, best_r = v, c
    step = 0.25
    for _ in range(grid_depth):
        step /= 2
        for u in np.vstack([dirs[:32], -dirs[:32]]):
            c = best_r + step * u
            nrm = np.linalg.norm(c)
            if nrm > 1:
                c = c / nrm
            v = value(c)
            if v < best:
                best, best_r = v, c
    return float(best)


def fannes_bounds(eps: float, dims: Sequence[int]):
    """Right-hand sides of the continuity bounds for ``||rho - rho'||_1 <= eps``.

    Args:
        eps: trace-norm distance, in (0, 1).
        dims: ``(|A|, |B|)``; ``|B|`` only enters the mutual-information
            bounds.

    Returns:
        Bounds on ``|Delta H(A)|``, ``|Delta H(A|B)|``, ``|Delta I(A:B)|`` and
        ``|Delta I(A:B|C)|`` in that order.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    dA = int(dims[0])
    dB = int(dims[1]) if len(dims) > 1 else dA
    m = min(dA, dB)
    h_a = (eps / 2) * (np.log2(dA - 1) if dA > 1 else 0.0) + binary_h(eps / 2)
    h_cond = 4 * eps * np.log2(dA) + 2 * binary_h(eps)
    mi = 5 * eps * np.log2(m) + 3 * binary_h(eps)
    cmi = 8 * eps * np.log2(m) + 4 * binary_h(eps)
    return float(h_a), float(h_cond), float(mi), float(cmi)


def h0_hmax_bracket(rho, eps: float):
    """Unsmoothed surrogate bracket ``(H_max(rho), H_0(rho) + 2 log2(1/eps))``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return h_max(rho), h0(rho) + 2 * np.log2(1 / eps)
