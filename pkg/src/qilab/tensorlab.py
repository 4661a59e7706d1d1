"""Dense complex linear algebra and subsystem bookkeeping.

Operators are plain ``numpy`` arrays. A composite system is described by a
list of subsystem dimensions (``dims``); subsystem ``0`` is the leftmost
tensor factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Tolerance hierarchy shared by every module.
TOL_CONSTRUCT = 1e-12
TOL_VERIFY = 1e-10
NEG_EIG_TOL = 1e-10
ZERO_EIG_CUTOFF = 1e-12
RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class Shape:
    """Ordered subsystem dimensions with optional labels."""

    dims: tuple[int, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise ValueError("subsystem dimensions must be >= 1")
        object.__setattr__(self, "dims", dims)
        labels = tuple(self.labels)
        if labels and len(labels) != len(dims):
            raise ValueError("labels must match dims in length")
        object.__setattr__(self, "labels", labels)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.dims)

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "labels": list(self.labels)}

    @classmethod
    def from_json(cls, obj: dict) -> "Shape":
        return cls(tuple(obj["dims"]), tuple(obj.get("labels", ())))


def as_dims(shape) -> tuple[int, ...]:
    """Accept a ``Shape``, an int or a sequence of ints."""
    if isinstance(shape, Shape):
        return shape.dims
    if np.isscalar(shape):
        return (int(shape),)
    return tuple(int(d) for d in shape)


def matrix_to_json(M: np.ndarray) -> dict:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "re": M.real.ravel().tolist(),
        "im": M.imag.ravel().tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError("entry count does not match rows*cols")
    return (re + 1j * im).reshape(rows, cols)


def is_hermitian(H: np.ndarray, tol: float = TOL_VERIFY) -> bool:
    H = np.asarray(H)
    return H.ndim == 2 and H.shape[0] == H.shape[1] and np.max(np.abs(H - H.conj().T), initial=0.0) <= tol


def _check_hermitian(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    if not is_hermitian(H):
        raise ValueError("matrix is not Hermitian within tolerance")
    return H


def jacobi_eig(H: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100):
    """Cyclic Jacobi eigensolver for Hermitian matrices.

    Each rotation first removes the phase of the pivot ``H[p, q]`` and then
    applies a real Givens rotation that zeroes it.

    Args:
        H: Hermitian matrix.
        tol: stop once the off-diagonal Frobenius norm drops below
            ``tol * ||H||_F``.
        max_sweeps: maximum number of full passes over the pivots.

    Returns:
        Ascending eigenvalues and the matching unitary of eigenvectors.
    """
    A = _check_hermitian(H).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.linalg.norm(A) ** 2 - np.sum(np.abs(np.diag(A)) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                if abs(b) <= 1e-300:
                    continue
                phase = b / abs(b)
                theta = 0.5 * np.arctan2(2 * abs(b), A[q, q].real - A[p, p].real)
                c, s = np.cos(theta), np.sin(theta)
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ g
                A[idx, :] = g.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ g
    w = np.diag(A).real
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def herm_eig(H: np.ndarray, method: str = "lapack"):
    """Eigendecomposition of a Hermitian matrix.

    Args:
        H: Hermitian matrix (within 1e-10).
        method: ``"lapack"`` (default, ``numpy.linalg.eigh``) or ``"jacobi"``.

    Returns:
        ``(w, V)`` with ascending real ``w`` and unitary ``V`` such that
        ``H = V diag(w) V^dagger``.
    """
    H = _check_hermitian(H)
    if method == "jacobi":
        return jacobi_eig(H)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    return w, V


def psd_eig(P: np.ndarray):
    """Eigendecomposition of a PSD matrix with the shared clamping rule.

    Eigenvalues in ``(-1e-10, 1e-12)`` are set to zero; anything more
    negative raises.
    """
    w, V = herm_eig(P)
    if w.size and w[0] < -NEG_EIG_TOL:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    w = np.where(w < ZERO_EIG_CUTOFF, 0.0, w)
    return w, V


def mat_func(P: np.ndarray, f: str, s: float | None = None) -> np.ndarray:
    """Apply a scalar function to a PSD matrix through its spectrum.

    Args:
        P: positive semidefinite matrix.
        f: one of ``"sqrt"``, ``"log2"``, ``"pow"`` (needs ``s``) or
            ``"pinv_sqrt"``. Tags of the form ``"pow(0.5)"`` are accepted.
        s: exponent for ``"pow"``.

    Returns:
        The matrix function. ``log2``, ``pinv_sqrt`` and negative powers act
        on the support only and vanish on the kernel.
    """
    if f.startswith("pow(") and f.endswith(")"):
        s = float(f[4:-1])
        f = "pow"
    w, V = psd_eig(P)
    supp = w > 0
    out = np.zeros_like(w)
    if f == "sqrt":
        out = np.sqrt(w)
    elif f == "log2":
        out[supp] = np.log2(w[supp])
    elif f == "pinv_sqrt":
        out[supp] = w[supp] ** -0.5
    elif f == "pow":
        if s is None:
            raise ValueError("pow needs an exponent")
        if s > 0:
            out = w**s
        else:
            out[supp] = w[supp] ** s
    else:
        raise ValueError(f"unknown function tag {f!r}")
    return (V * out) @ V.conj().T


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of operators or vectors."""
    out = np.array([[1.0 + 0j]]) if np.ndim(ops[0]) == 2 else np.array([1.0 + 0j])
    for op in ops:
        out = np.kron(out, op)
    return out


def _check_square(M: np.ndarray, dims: tuple[int, ...]) -> None:
    D = int(np.prod(dims, dtype=np.int64))
    if M.shape != (D, D):
        raise ValueError(f"matrix of shape {M.shape} does not match dims {dims}")


def partial_trace(M: np.ndarray, shape, keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not in ``keep``.

    The kept subsystems appear in increasing index order.
    """
    dims = as_dims(shape)
    M = np.asarray(M)
    _check_square(M, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError("subsystem index out of range")
    drop = [i for i in range(n) if i not in keep]
    T = M.reshape(dims + dims)
    # einsum subscripts: row index i, column index n+i; traced ones share a letter
    letters = [chr(ord("a") + i) for i in range(2 * n)] if 2 * n <= 26 else None
    if letters is not None:
        row = letters[:n]
        col = letters[n:]
        for i in drop:
            col[i] = row[i]
        out_sub = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
        res = np.einsum("".join(row) + "".join(col) + "->" + out_sub, T)
    else:
        res = T
        for k, i in enumerate(drop):
            ax = i - k
            res = np.trace(res, axis1=ax, axis2=ax + res.ndim // 2)
    dk = int(np.prod([dims[i] for i in keep], dtype=np.int64))
    return np.asarray(res).reshape(dk, dk)


def permute_systems(M: np.ndarray, shape, perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: output factor ``j`` is input factor ``perm[j]``.

    Works for square operators and for state vectors.
    """
    dims = as_dims(shape)
    perm = [int(p) for p in perm]
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ValueError("perm must be a permutation of the subsystems")
    M = np.asarray(M)
    if M.ndim == 1:
        return M.reshape(dims).transpose(perm).reshape(-1)
    _check_square(M, dims)
    T = M.reshape(dims + dims).transpose(perm + [n + p for p in perm])
    D = M.shape[0]
    return T.reshape(D, D)


def permutation_unitary(shape, perm: Sequence[int]) -> np.ndarray:
    """Unitary implementing :func:`permute_systems` on vectors."""
    dims = as_dims(shape)
    D = int(np.prod(dims, dtype=np.int64))
    eye = np.eye(D)
    return np.stack([permute_systems(eye[:, k], dims, perm) for k in range(D)], axis=1)


def swap_operator(d: int) -> np.ndarray:
    """The flip operator ``F|i>|j> = |j>|i>`` on two ``d``-dimensional copies."""
    F = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            F[j * d + i, i * d + j] = 1.0
    return F


def sym_antisym_projectors(d: int):
    """Projectors ``(1 + F)/2`` and ``(1 - F)/2`` onto the symmetric and
    antisymmetric two-copy subspaces."""
    F = swap_operator(d)
    eye = np.eye(d * d)
    return 0.5 * (eye + F), 0.5 * (eye - F)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix.

    Columns are rephased so that the triangular factor has a positive
    diagonal, which makes the distribution exactly Haar.
    """
    rng = _rng(seed)
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_density(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Random density matrix ``G G^dagger / tr`` with a ``d x rank`` Ginibre ``G``."""
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValueError("rank must be in [1, d]")
    rng = _rng(seed)
    G = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pure(shape, seed=None) -> np.ndarray:
    """Haar-random unit vector on the composite space of ``shape``."""
    D = int(np.prod(as_dims(shape), dtype=np.int64))
    rng = _rng(seed)
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    return v / np.linalg.norm(v)


def ket(index: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[index] = 1.0
    return v


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    return np.outer(v, v.conj())


def trace_norm(X: np.ndarray) -> float:
    """Trace norm. Hermitian inputs use the spectrum, others singular values."""
    X = np.asarray(X)
    if is_hermitian(X, 1e-12):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (X + X.conj().T)))))
    return float(np.sum(np.linalg.svd(X, compute_uv=False)))


def unitarity_residual(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[1])), initial=0.0))
