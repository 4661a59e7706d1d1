"""Entropy vectors, linear entropy inequalities and conic membership.

Subsets of parties are bitmasks with party 0 as the least significant bit.
Parties may be given as 0-based indices or as letters (``"A"`` is party 0).
For four parties the order is ``A, B, C, D``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .entropy import von_neumann
from .states import MultiState, as_matrix
from .tensorlab import Shape, as_dims, partial_trace, permute_systems, random_density

MAX_PARTIES = 4


def mask(parties) -> int:
    """Bitmask of a party set given as letters (``"AC"``) or indices."""
    if isinstance(parties, (int, np.integer)):
        return 1 << int(parties)
    out = 0
    for p in parties:
        i = ord(p.upper()) - ord("A") if isinstance(p, str) else int(p)
        out |= 1 << i
    return out


def mask_label(m: int) -> str:
    return "".join(chr(ord("A") + i) for i in range(MAX_PARTIES + 4) if m >> i & 1) or "0"


@dataclass
class EntropyVector:
    n: int
    entries: np.ndarray
    kind: str = "entropy"

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if not 1 <= self.n <= MAX_PARTIES:
            raise ValueError("party count must be in 1..4")
        if self.entries.shape != (2**self.n,):
            raise ValueError("need 2^n entries")
        if self.entries[0] != 0:
            raise ValueError("entry of the empty set must be 0")

    def __getitem__(self, parties) -> float:
        return float(self.entries[mask(parties)])

    def to_json(self) -> dict:
        return {"n": self.n, "entries": self.entries.tolist(), "kind": self.kind}

    @classmethod
    def from_json(cls, obj: dict) -> "EntropyVector":
        return cls(int(obj["n"]), np.asarray(obj["entries"], dtype=float), obj.get("kind", "entropy"))


@dataclass
class IneqVector:
    """Coefficients of a linear functional ``f`` on entropy vectors; valid means ``(f, h) >= 0``."""

    n: int
    entries: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if self.entries.shape != (2**self.n,):
            raise ValueError("need 2^n entries")

    def __neg__(self) -> "IneqVector":
        return IneqVector(self.n, -self.entries, f"-{self.kind}")

    def __add__(self, other: "IneqVector") -> "IneqVector":
        return IneqVector(self.n, self.entries + other.entries, f"{self.kind}+{other.kind}")

    def to_json(self) -> dict:
        return {"n": self.n, "entries": self.entries.tolist(), "kind": self.kind}

    @classmethod
    def from_json(cls, obj: dict) -> "IneqVector":
        return cls(int(obj["n"]), np.asarray(obj["entries"], dtype=float), obj.get("kind", "custom"))


def entropy_vector(rho, shape=None) -> EntropyVector:
    """All marginal entropies of an ``n <= 4`` party state."""
    if isinstance(rho, MultiState):
        dims = rho.dims if shape is None else as_dims(shape)
    else:
        dims = as_dims(shape)
    n = len(dims)
    if n > MAX_PARTIES:
        raise ValueError("at most 4 parties")
    M = as_matrix(rho)
    out = np.zeros(2**n)
    for m in range(1, 2**n):
        keep = [i for i in range(n) if m >> i & 1]
        out[m] = von_neumann(partial_trace(M, dims, keep))
    return EntropyVector(n, out)


def _term(vec: np.ndarray, m: int, c: float) -> None:
    if m:
        vec[m] += c


def inequality_vector(kind: str, I, J, n: int) -> IneqVector:
    """``SSA``: ``H(I)+H(J)-H(I u J)-H(I n J)``; ``WM``: ``H(I)+H(J)-H(I\\J)-H(J\\I)``;
    ``MONO``: ``H(I|J) = H(I) - H(J)`` for ``J`` a subset of ``I``."""
    a, b = mask(I), mask(J)
    if max(a, b) >= 2**n:
        raise ValueError("party out of range")
    v = np.zeros(2**n)
    kind = kind.upper()
    if kind == "SSA":
        if not a or not b:
            raise ValueError("SSA needs nonempty I and J")
        _term(v, a, 1), _term(v, b, 1), _term(v, a | b, -1), _term(v, a & b, -1)
    elif kind == "WM":
        if not a & b:
            raise ValueError("WM needs I and J to intersect")
        _term(v, a, 1), _term(v, b, 1), _term(v, a & ~b, -1), _term(v, b & ~a, -1)
    elif kind == "MONO":
        if b & ~a:
            raise ValueError("MONO needs J to be a subset of I")
        _term(v, a, 1), _term(v, b, -1)
    else:
        raise ValueError(f"unknown inequality kind {kind!r}")
    return IneqVector(n, v, f"{kind}({mask_label(a)},{mask_label(b)})")


def vn_generators(n: int) -> list[IneqVector]:
    """All distinct nonzero SSA and WM vectors on ``n`` parties."""
    seen = {}
    for a, b in product(range(1, 2**n), repeat=2):
        for kind in ("SSA", "WM"):
            if kind == "WM" and not a & b:
                continue
            f = inequality_vector(kind, a_set(a), a_set(b), n)
            if not np.any(f.entries):
                continue
            key = f.entries.tobytes()
            seen.setdefault(key, f)
    return list(seen.values())


def a_set(m: int) -> list[int]:
    return [i for i in range(MAX_PARTIES + 4) if m >> i & 1]


def eval_inequality(f: IneqVector, v: EntropyVector) -> float:
    if f.n != v.n:
        raise ValueError("party counts differ")
    return float(f.entries @ v.entries)


def check_vn_type(v: EntropyVector, tol: float = 1e-9) -> dict:
    """Evaluate every SSA/WM generator; list the violated ones with their gaps."""
    gens = vn_generators(v.n)
    viol = []
    for f in gens:
        g = eval_inequality(f, v)
        if g < -tol:
            viol.append({"inequality": f.kind, "gap": g})
    return {"passed": not viol, "checked": len(gens), "violations": viol}


_CADNEY = {"": 0, "A": 5, "B": 5, "C": 2, "D": 4, "AB": 6, "AC": 5, "AD": 5, "BC": 5, "BD": 5,
           "CD": 6, "ABC": 6, "ABD": 6, "ACD": 5, "BCD": 5, "ABCD": 4}


def cadney_vector() -> EntropyVector:
    """The 16-entry witness vector on ``A, B, C, D``."""
    e = np.zeros(16)
    for k, val in _CADNEY.items():
        e[mask(k)] = val
    return EntropyVector(4, e, "cadney")


# linear functionals on 4-party vectors --------------------------------------

def _H(*terms) -> np.ndarray:
    """Build ``sum c * H(S)`` from ``(c, "S")`` pairs."""
    v = np.zeros(16)
    for c, s in terms:
        _term(v, mask(s), c)
    return v


def cmi_vec(X: str, Y: str, Z: str = "") -> np.ndarray:
    """Coefficients of ``I(X:Y|Z)``."""
    return _H((1, X + Z), (1, Y + Z), (-1, X + Y + Z), (-1, Z))


def cond_h_vec(X: str, Z: str = "") -> np.ndarray:
    """Coefficients of ``H(X|Z)``."""
    return _H((1, X + Z), (-1, Z))


GENLIWI = cmi_vec("C", "D") + cmi_vec("A", "B", "D") - cmi_vec("C", "AB")
LIWI = cmi_vec("C", "D") - cmi_vec("C", "AB")
CADNEY_FUNCTIONALS = (
    cmi_vec("A", "B", "D") + cmi_vec("A", "B", "CD") + cond_h_vec("D", "ABC") - cmi_vec("AB", "C"),
    cmi_vec("A", "B", "D") + cmi_vec("A", "B", "C") + cmi_vec("C", "D") - cmi_vec("C", "AB"),
    cmi_vec("A", "B", "D") + cmi_vec("A", "B", "C") + cmi_vec("A", "B", "CD")
    + _H((1, "D")) + _H((1, "C")) + cond_h_vec("CD", "AB") - 2 * cmi_vec("AB", "C"),
    2 * cmi_vec("A", "B", "C") + _H((1, "C")) + cond_h_vec("C", "AB") - cmi_vec("AB", "C"),
)
MARKOV_CONSTRAINTS = (cmi_vec("A", "C", "B"), cmi_vec("B", "C", "A"))


def _four(v: EntropyVector) -> np.ndarray:
    if v.n != 4:
        raise ValueError("needs a 4-party vector")
    return v.entries


def genliwi_vector() -> IneqVector:
    """``I(C:D) + I(A:B|D) - I(C:AB)`` as an inequality vector."""
    return IneqVector(4, GENLIWI.copy(), "genLiWi")


def markov_constraint_vectors() -> list[IneqVector]:
    return [IneqVector(4, MARKOV_CONSTRAINTS[0].copy(), "I(A:C|B)"),
            IneqVector(4, MARKOV_CONSTRAINTS[1].copy(), "I(B:C|A)")]


def genliwi_gap(v: EntropyVector) -> float:
    """``I(C:D) + I(A:B|D) - I(C:AB)``."""
    return float(GENLIWI @ _four(v))


def liwi_gap(v: EntropyVector) -> float:
    """``I(C:D) - I(C:AB)``."""
    return float(LIWI @ _four(v))


def cadney_gaps(v: EntropyVector) -> tuple[float, float, float, float]:
    """Left-hand sides of the four constrained inequalities (valid when ``>= 0``).

    1. ``I(A:B|D) + I(A:B|CD) + H(D|ABC) - I(AB:C)``
    2. ``I(A:B|D) + I(A:B|C) + I(C:D) - I(C:AB)``
    3. ``I(A:B|D) + I(A:B|C) + I(A:B|CD) + H(D) + H(C) + H(CD|AB) - 2 I(AB:C)``
    4. ``2 I(A:B|C) + H(C) + H(C|AB) - I(AB:C)``
    """
    e = _four(v)
    return tuple(float(f @ e) for f in CADNEY_FUNCTIONALS)


def constraint_residuals(v: EntropyVector) -> tuple[float, float, float]:
    """``(I(A:C|B), I(B:C|A), I(A:B|D))``."""
    e = _four(v)
    return (float(MARKOV_CONSTRAINTS[0] @ e), float(MARKOV_CONSTRAINTS[1] @ e),
            float(cmi_vec("A", "B", "D") @ e))


# Markov-structured states ----------------------------------------------------

@dataclass
class MarkovParams:
    """Block data for a state with ``I(A:C|B) = I(B:C|A) = 0``.

    ``A = K_A A_b A_c`` and ``B = K_B B_a B_c``; the joint law ``p[i, j]`` of
    the block labels may only charge pairs with ``f[i] == g[j]``, the common
    label that ``C`` may depend on. ``D`` receives a copy of the common label
    mixed with a random state at weight ``noise``.
    """

    k: int = 2
    l: int = 2
    f: Sequence[int] = (0, 1)
    g: Sequence[int] = (0, 1)
    p: np.ndarray | None = None
    dims: dict = field(default_factory=lambda: {"Ab": 2, "Ac": 1, "Ba": 2, "Bc": 1, "C": 2, "D": 2})
    noise: float = 0.3

    def validate(self) -> None:
        if not (1 <= self.k <= 2 and 1 <= self.l <= 2):
            raise ValueError("block counts must be 1 or 2")
        if len(self.f) != self.k or len(self.g) != self.l:
            raise ValueError("f and g must have k and l entries")
        for key in ("Ab", "Ac", "Ba", "Bc", "C", "D"):
            if not 1 <= self.dims.get(key, 1) <= 2:
                raise ValueError("local dimensions must be 1 or 2")
        if self.p is not None:
            p = np.asarray(self.p, dtype=float)
            if p.shape != (self.k, self.l) or np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
                raise ValueError("p must be a k x l probability table")
            for i, j in zip(*np.nonzero(p > 0)):
                if self.f[i] != self.g[j]:
                    raise ValueError("inconsistent f, g table: p charges a pair with f(i) != g(j)")
        if not 0 <= self.noise <= 1:
            raise ValueError("noise weight must be in [0, 1]")


def random_markov_params(seed=None) -> MarkovParams:
    """Draw block counts, label functions and local dimensions at random."""
    rng = np.random.default_rng(seed)
    k, l = (int(x) for x in rng.integers(1, 3, size=2))
    n_lab = int(rng.integers(1, 3))
    f = [int(x) for x in rng.integers(0, n_lab, size=k)]
    g = [int(x) for x in rng.integers(0, n_lab, size=l)]
    if not set(f) & set(g):
        g[0] = f[0]
    dims = {key: int(rng.integers(1, 3)) for key in ("Ab", "Ac", "Ba", "Bc")}
    dims.update(C=2, D=2)
    return MarkovParams(k, l, f, g, None, dims, float(rng.uniform(0, 1)))


def markov_state(params: MarkovParams, seed=None) -> MultiState:
    """``sum p_ij |i><i| (x) |j><j| (x) rho_{A_b B_a}^{ij} (x) rho_{A_c}^i (x) rho_{B_c}^j
    (x) rho_C^{f(i)} (x) rho_D^{ij}`` regrouped as ``A, B, C, D``."""
    params.validate()
    rng = np.random.default_rng(seed)
    k, l, dm = params.k, params.l, params.dims
    f, g = list(params.f), list(params.g)
    if params.p is None:
        p = rng.uniform(0.1, 1.0, size=(k, l)) * np.array([[f[i] == g[j] for j in range(l)] for i in range(k)])
        p = p / p.sum()
    else:
        p = np.asarray(params.p, dtype=float)
    dAb, dAc, dBa, dBc, dC, dD = (dm.get(x, 1) for x in ("Ab", "Ac", "Ba", "Bc", "C", "D"))
    labels = sorted(set(f) | set(g))

    def rnd(d):
        return random_density(d, int(rng.integers(1, d + 1)), rng)

    rho_c = {c: rnd(dC) for c in labels}
    rho_ac = [rnd(dAc) for _ in range(k)]
    rho_bc = [rnd(dBc) for _ in range(l)]
    # natural order: K_A, A_b, A_c, K_B, B_a, B_c, C, D with A_b B_a entangled
    build = [k, l, dAb, dBa, dAc, dBc, dC, dD]  # K_A, K_B, A_b, B_a, A_c, B_c, C, D
    total = int(np.prod(build))
    M = np.zeros((total, total), dtype=complex)
    for i in range(k):
        for j in range(l):
            if p[i, j] <= 0:
                continue
            lab = f[i]
            rd = np.zeros((dD, dD), dtype=complex)
            rd[lab % dD, lab % dD] = 1
            rd = (1 - params.noise) * rd + params.noise * rnd(dD)
            Ki = np.zeros((k, k)); Ki[i, i] = 1
            Kj = np.zeros((l, l)); Kj[j, j] = 1
            blk = [Ki, Kj, rnd(dAb * dBa), rho_ac[i], rho_bc[j], rho_c[lab], rd]
            term = blk[0]
            for b in blk[1:]:
                term = np.kron(term, b)
            M += p[i, j] * term
    perm = [0, 2, 4, 1, 3, 5, 6, 7]
    M = permute_systems(M, build, perm)
    shape = Shape((k * dAb * dAc, l * dBa * dBc, dC, dD), ("A", "B", "C", "D"))
    M = 0.5 * (M + M.conj().T)
    return MultiState(M / np.trace(M).real, shape)


# conic membership --------------------------------------------------------------

@dataclass
class MembershipResult:
    inside: bool
    residual: float
    coefficients: dict = field(default_factory=dict)
    certificate: np.ndarray | None = None
    certificate_checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"inside": self.inside, "residual": self.residual}
        if self.certificate is not None:
            out["certificate"] = self.certificate.tolist()
            out["certificate_checks"] = self.certificate_checks
        return out


def simplex_feasibility(A: np.ndarray, b: np.ndarray, tol: float = 1e-9, max_iter: int = 20000):
    """Phase-one primal simplex with Bland's rule for ``A x = b, x >= 0``.

    Returns:
        ``(x, y, infeas)`` where ``infeas`` is the optimal sum of the
        artificial variables and ``y`` solves the phase-one dual, so that
        ``A^T y <= 0`` and ``b^T y = infeas``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A1, b1 = A * sign[:, None], b * sign
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A1
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b1
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    T[m, :] = -np.sum(T[:m, :], axis=0)
    T[m, n:n + m] = 0.0
    for _ in range(max_iter):
        red = T[m, :-1]
        enter = next((j for j in range(n + m) if red[j] < -tol), None)
        if enter is None:
            break
        col = T[:m, enter]
        ratios = [(T[i, -1] / col[i], basis[i], i) for i in range(m) if col[i] > tol]
        if not ratios:
            raise RuntimeError("phase-one problem is unbounded, which cannot happen")
        best = min(r[0] for r in ratios)
        # Bland: among tied rows pick the smallest basic variable index
        _, _, row = min((r for r in ratios if r[0] <= best + tol), key=lambda r: r[1])
        T[row, :] /= T[row, enter]
        for i in range(m + 1):
            if i != row and T[i, enter] != 0:
                T[i, :] -= T[i, enter] * T[row, :]
        basis[row] = enter
    else:
        raise RuntimeError("simplex iteration limit reached")
    x_full = np.zeros(n + m)
    for i, j in enumerate(basis):
        x_full[j] = T[i, -1]
    infeas = float(np.sum(x_full[n:]))
    full = np.hstack([A1, np.eye(m)])
    Bm = full[:, basis]
    y1 = np.linalg.lstsq(Bm.T, cost[basis], rcond=None)[0]
    return x_full[:n], y1 * sign, infeas


def conic_membership(f: IneqVector, generators: Sequence[IneqVector],
                     constraint_span: Sequence[IneqVector] = (), tol: float = 1e-9) -> MembershipResult:
    """Decide ``f in cone(generators) + span(constraint_span)`` by LP feasibility.

    On infeasibility the phase-one dual gives a separating vector ``w`` with
    ``(f, w) < -tol``, ``(g, w) >= -tol`` for all generators and
    ``(c, w) = 0`` on the constraint span; it is rescaled so that
    ``(f, w) = -1`` and every condition is re-checked.
    """
    G = np.array([g.entries for g in generators], dtype=float).reshape(-1, f.entries.size)
    C = np.array([c.entries for c in constraint_span], dtype=float).reshape(-1, f.entries.size)
    A = np.hstack([G.T, C.T, -C.T])
    x, y, infeas = simplex_feasibility(A, f.entries, tol)
    nG, nC = G.shape[0], C.shape[0]
    lam = x[:nG]
    nu = x[nG:nG + nC] - x[nG + nC:]
    resid = float(np.max(np.abs(A @ x - f.entries), initial=0.0))
    if infeas <= tol * max(1.0, np.abs(f.entries).sum()):
        return MembershipResult(True, resid, {"generators": lam.tolist(), "span": nu.tolist()})
    w = -y
    fw = float(f.entries @ w)
    w = w / abs(fw)
    checks = verify_certificate(f, generators, constraint_span, w, tol)
    return MembershipResult(False, resid, {}, w, checks)


def verify_certificate(f, generators, constraint_span, w, tol: float = 1e-9) -> dict:
    """Independent check of a separating vector."""
    w = np.asarray(w, dtype=float)
    fw = float(f.entries @ w)
    gmin = float(min((g.entries @ w for g in generators), default=0.0))
    cmax = float(max((abs(c.entries @ w) for c in constraint_span), default=0.0))
    ok = fw < -tol and gmin >= -tol and cmax <= tol
    return {"valid": bool(ok), "f_dot_w": fw, "min_generator_dot_w": gmin, "max_constraint_abs_dot_w": cmax}


def genliwi_witness(eps: float, seed=None) -> dict:
    """Numeric witness of independence for the constrained inequality.

    Builds ``w = v + eps h(psi_C (x) sigma_ABD)`` from the Cadney vector ``v``
    and a random state ``sigma`` with ``I(A:B|D) > 0``. For small ``eps``
    ``w`` satisfies the Markov constraints, every SSA/WM inequality and has
    ``I(A:B|D)_w != 0`` (so the unconditioned Linden-Winter statement does not
    apply), yet violates ``I(C:AB) <= I(C:D) + I(A:B|D)``.
    """
    rng = np.random.default_rng(seed)
    sigma = random_density(8, 8, rng)
    psi_c = np.zeros((2, 2)); psi_c[0, 0] = 1
    joint = np.kron(sigma, psi_c)  # A, B, D, C
    joint = permute_systems(joint, (2, 2, 2, 2), [0, 1, 3, 2])
    vp = entropy_vector(joint, (2, 2, 2, 2))
    w = EntropyVector(4, cadney_vector().entries + eps * vp.entries, "witness")
    res = constraint_residuals(w)
    return {
        "vector": w,
        "markov_residuals": res[:2],
        "I(A:B|D)": res[2],
        "vn_type": check_vn_type(w)["passed"],
        "genliwi_gap": genliwi_gap(w),
    }
