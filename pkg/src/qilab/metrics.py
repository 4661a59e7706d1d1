"""Distances between states and channels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Channel, cj_state
from .states import as_matrix, max_entangled
from .tensorlab import mat_func, partial_trace, trace_norm, unitarity_residual


@dataclass(frozen=True)
class DistanceReport:
    trace_distance: float
    fidelity: float
    purified_distance: float

    def to_json(self) -> dict:
        return {"trace_distance": self.trace_distance, "fidelity": self.fidelity,
                "purified_distance": self.purified_distance}


def _pair(rho, sigma):
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError("dimension mismatch")
    return r, s


def trace_distance(rho, sigma) -> float:
    """Generalized trace distance ``(||rho - sigma||_1 + |tr(rho - sigma)|) / 2``."""
    r, s = _pair(rho, sigma)
    D = r - s
    return 0.5 * (trace_norm(D) + abs(np.trace(D).real))


def _root_overlap(r, s) -> float:
    sr, ss = mat_func(r, "sqrt"), mat_func(s, "sqrt")
    return float(np.sum(np.linalg.svd(sr @ ss, compute_uv=False)))


def fidelity(rho, sigma) -> float:
    """Root fidelity ``||sqrt(rho) sqrt(sigma)||_1``."""
    r, s = _pair(rho, sigma)
    return min(_root_overlap(r, s), 1.0)


def generalized_fidelity(rho, sigma) -> float:
    """``||sqrt(rho) sqrt(sigma)||_1 + sqrt((1 - tr rho)(1 - tr sigma))``."""
    r, s = _pair(rho, sigma)
    tail = max(1 - np.trace(r).real, 0.0) * max(1 - np.trace(s).real, 0.0)
    return min(_root_overlap(r, s) + np.sqrt(tail), 1.0)


def purified_distance(rho, sigma) -> float:
    """``sqrt(1 - F^2)`` with the generalized fidelity."""
    F = generalized_fidelity(rho, sigma)
    return float(np.sqrt(max(1 - F * F, 0.0)))


def distance_report(rho, sigma) -> DistanceReport:
    return DistanceReport(trace_distance(rho, sigma), generalized_fidelity(rho, sigma),
                          purified_distance(rho, sigma))


def covering_arc(phases: np.ndarray):
    """Smallest arc of the unit circle containing all ``phases``.

    Returns ``(start, length)``: the arc runs counterclockwise from
    ``start`` over ``length`` radians. It is the complement of the largest
    gap between sorted phases; equal gaps resolve to the first index.
    """
    ph = np.sort(np.mod(np.asarray(phases, dtype=float), 2 * np.pi))
    if ph.size == 1:
        return float(ph[0]), 0.0
    gaps = np.diff(np.append(ph, ph[0] + 2 * np.pi))
    k = int(np.argmax(gaps))
    start = ph[(k + 1) % ph.size]
    return float(start), float(2 * np.pi - gaps[k])


def origin_in_hull(points: np.ndarray, slack: float = 1e-12) -> bool:
    """Whether 0 lies in the convex hull of points on the unit circle.

    For points on the circle this holds exactly when no angular gap between
    angle-sorted neighbours exceeds ``pi``. A gap of ``pi`` puts the origin
    on the hull boundary, which counts as inside.
    """
    ang = np.sort(np.mod(np.angle(np.asarray(points, dtype=complex)), 2 * np.pi))
    if ang.size < 2:
        return False
    gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
    return bool(gaps.max() <= np.pi + slack)


def _eigenphases(U, V):
    U, V = np.asarray(U, dtype=complex), np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise ValueError("dimension mismatch")
    if unitarity_residual(U) > 1e-8 or unitarity_residual(V) > 1e-8:
        raise ValueError("inputs must be unitary")
    return np.angle(np.linalg.eigvals(U @ V.conj().T))


def diamond_unitary_diff(U, V) -> float:
    """``|| U.U^dagger - V.V^dagger ||_diamond`` in closed form.

    Equals 2 when the eigenvalues of ``U V^dagger`` surround the origin and
    otherwise the chord between the endpoints of their minimal covering arc.
    """
    ph = _eigenphases(U, V)
    if origin_in_hull(np.exp(1j * ph)):
        return 2.0
    _, length = covering_arc(ph)
    return float(2 * np.sin(length / 2))


def entanglement_fidelity(ch: Channel) -> float:
    """``F(Lambda) = sqrt(<phi+| eta_Lambda |phi+>)``."""
    if ch.d_in != ch.d_out:
        raise ValueError("entanglement fidelity needs a square channel")
    phi = max_entangled(ch.d_in).amplitudes
    val = np.real(phi.conj() @ cj_state(ch) @ phi)
    return float(np.sqrt(max(val, 0.0)))


def ef_diamond_bounds(F: float, dA: int):
    """Bounds ``(1 - F^2, |A| sqrt(1 - F^2))`` on ``||Lambda - id||_diamond / 2``."""
    g = max(1 - F * F, 0.0)
    return g, dA * np.sqrt(g)


def cj_to_diamond_bound(eta0, eta1, dA: int, tol: float = 1e-6) -> float:
    """Diamond-norm upper bound ``|A| ||eta0 - eta1||_1`` from CJ states on ``out (x) A``."""
    e0, e1 = as_matrix(eta0), as_matrix(eta1)
    if e0.shape != e1.shape:
        raise ValueError("dimension mismatch")
    d_out = e0.shape[0] // dA
    for e in (e0, e1):
        ref = partial_trace(e, (d_out, dA), [1])
        if np.max(np.abs(ref - np.eye(dA) / dA)) > tol:
            raise ValueError("reference marginal is not maximally mixed: not the CJ state of a TP map")
    return dA * trace_norm(e0 - e1)


def _batch_output(ch: Channel, psi: np.ndarray) -> np.ndarray:
    """``(ch (x) id)(|psi><psi|)`` for a batch of vectors of shape ``(T, d_in * d_in)``."""
    T = psi.shape[0]
    P = psi.reshape(T, ch.d_in, ch.d_in)
    out = 0
    for K in ch.kraus:
        Y = np.einsum("ai,tir->tar", K, P).reshape(T, -1)
        out = out + np.einsum("ta,tb->tab", Y, Y.conj())
    return out


def diamond_lower_sample(ch0: Channel, ch1: Channel, trials: int, seed=None, batch: int = 2048) -> float:
    """Monte-Carlo lower bound ``max_psi ||((ch0 - ch1) (x) id)(psi)||_1``.

    Inputs are Haar-random pure states on the channel input and a reference
    of equal dimension.
    """
    if ch0.d_in != ch1.d_in or ch0.d_out != ch1.d_out:
        raise ValueError("channels must share shapes")
    rng = np.random.default_rng(seed)
    d = ch0.d_in
    best = 0.0
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        g = rng.standard_normal((m, d * d, 2))  # one draw per batch keeps runs prefix-consistent
        psi = g[..., 0] + 1j * g[..., 1]
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        D = _batch_output(ch0, psi) - _batch_output(ch1, psi)
        vals = np.sum(np.abs(np.linalg.eigvalsh(D)), axis=1)
        best = max(best, float(vals.max()))
        done += m
    return best
