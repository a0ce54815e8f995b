"""Free-fermion solution of the periodic transverse-field Ising chain.

    H = -(J sum_i X_i X_{i+1} + lambda sum_i Z_i)

Only the even-fermion-parity (antiperiodic) sector is treated.  Expansions
here describe the operator ``sum_i Z_i`` evolved in time, which is ``-dH``
in the ``dH = -sum_i Z_i`` convention of :mod:`shotnoise.operators`; the
global sign does not affect variances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import _kernels

FF_MAX_SITES = 64
IMAG_TOL = 1e-10
SERIES_CUTOFF = 1e-6


def momentum_grid(n: int) -> np.ndarray:
    """Antiperiodic momenta ``2 pi (m + 1/2) / N`` for ``m = -N/2 .. N/2 - 1``."""
    if n < 4 or n % 2:
        raise ValueError("momentum grid needs an even N >= 4")
    return 2 * np.pi * (np.arange(-n // 2, n // 2) + 0.5) / n


@dataclass(frozen=True)
class MomentumMode:
    k: float
    epsilon: float
    theta_k: float

    @property
    def sin_theta(self) -> float:
        return math.sin(self.theta_k)

    @property
    def cos_theta(self) -> float:
        return math.cos(self.theta_k)


def _modes(J: float, lam: float, k):
    """Vectorized ``(epsilon, sin theta_k, cos theta_k)``."""
    k = np.asarray(k, dtype=float)
    eps = 2 * np.sqrt(np.maximum(J * J + lam * lam - 2 * J * lam * np.cos(k), 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(eps > 0, -2 * J * np.sin(k) / eps, 0.0)
        c = np.where(eps > 0, 2 * (lam - J * np.cos(k)) / eps, 1.0)
    return eps, s, c


def mode(J: float, lam: float, k: float) -> MomentumMode:
    if J < 0 or lam <= 0:
        raise ValueError("need J >= 0 and lambda > 0")
    eps, s, c = _modes(J, lam, k)
    return MomentumMode(float(k), float(eps), float(np.arctan2(s, c)))


def g_kernel(x):
    """``(e^x - 1)/x`` with ``g(0) = 1``; accepts scalars or arrays."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1 + x / 2 + x * x / 6 + x**3 / 24, np.expm1(safe) / safe)
    return out[()] if out.ndim == 0 else out


def abd_instantaneous(J: float, lam: float, tau: float, k):
    """Momentum kernels ``A, B, D`` of the Heisenberg-picture field term at time ``tau``."""
    eps, s, c = _modes(J, lam, k)
    cos2 = np.cos(2 * eps * tau)
    A = 1 + c * c + s * s * cos2
    B = 1 - c * c - s * s * cos2
    D = 1j * s * c * (cos2 - 1) - s * np.sin(2 * eps * tau)
    return A, B, D


def abd_time_averaged(J: float, lam: float, t: float, k):
    """Kernels of ``G(t)/t``; the oscillating factors become ``g(+-2 i eps t)``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    eps, s, c = _modes(J, lam, k)
    gp = g_kernel(2j * eps * t)
    gm = g_kernel(-2j * eps * t)
    even = 0.5 * (gp + gm)
    A = 1 + c * c + s * s * even
    B = 1 - c * c - s * s * even
    D = 1j * s * c * (even - 1) + 0.5j * s * (gp - gm)
    return A, B, D


def _fourier(values: np.ndarray, k: np.ndarray, ell: np.ndarray) -> np.ndarray:
    """``(1/N) sum_k f(k) e^{i k ell}``."""
    return np.exp(1j * np.outer(ell, k)) @ values / len(k)


@dataclass(frozen=True)
class EtaTable:
    """Two-body expansion ``constant + sum_{i<=j} sum_a eta[a-1, i, j] O^a_ij``.

    Families: O^1 = c_i^+ c_j + h.c., O^2 = c_i c_j^+ + h.c.,
    O^3 = c_i^+ c_j^+ + h.c., O^4 = i(c_i^+ c_j^+ - h.c.).  Only ``j >= i``
    entries are populated; indices are 0-based.
    """

    n_sites: int
    t: float
    eta: np.ndarray
    kind: str = "instantaneous"
    constant: float = 0.0

    def pauli_terms(self):
        """Spin-language expansion as string terms.

        Returns ``(i, j, op_i, op_j, coef)`` arrays for strings
        ``P_i Z...Z Q_j`` (labels 1=X, 2=Y, 3=Z); ``i == j`` marks a
        single-site Z.  The fermionic ``constant`` cancels exactly against the
        ``c^+ c = (1 - Z)/2`` offsets, so the strings alone are the operator.
        """
        n = self.n_sites
        e1, e2, e3, e4 = self.eta
        iu, ju = np.triu_indices(n, 1)
        u = e1[iu, ju] - e2[iu, ju]
        rows = [
            (iu, ju, 1, 1, 0.5 * (u + e3[iu, ju])),
            (iu, ju, 2, 2, 0.5 * (u - e3[iu, ju])),
            (iu, ju, 1, 2, 0.5 * e4[iu, ju]),
            (iu, ju, 2, 1, 0.5 * e4[iu, ju]),
        ]
        diag = np.arange(n)
        rows.append((diag, diag, 3, 0, e2[diag, diag] - e1[diag, diag]))
        I, J, P, Q, C = [], [], [], [], []
        for i, j, p, q, c in rows:
            keep = c != 0
            I.append(i[keep])
            J.append(j[keep])
            P.append(np.full(keep.sum(), p))
            Q.append(np.full(keep.sum(), q))
            C.append(c[keep])
        return tuple(np.concatenate(x) for x in (I, J, P, Q, C))


def _assemble_eta(n: int, Al, Bl, Dl_plus, Dl_minus) -> np.ndarray:
    """Build the four eta families from Fourier coefficients at ``ell = 0..N-1``."""
    eta = np.zeros((4, n, n))
    i, j = np.triu_indices(n)
    ell = j - i
    off = ell > 0
    eta[0, i, j] = np.where(off, -Al[ell], -Al[0] / 2)
    eta[1, i, j] = np.where(off, -Bl[ell], -Bl[0] / 2)
    pair = Dl_plus[ell] - Dl_minus[ell]
    eta[2, i, j] = np.where(off, -pair.real, 0.0)
    eta[3, i, j] = np.where(off, -pair.imag, 0.0)
    return eta


def eta_table(J: float, lam: float, t: float, n: int, averaged: bool = False) -> EtaTable:
    """eta coefficients of the evolved field term at time ``t`` (or of ``G(t)/t``)."""
    k = momentum_grid(n)
    A, B, D = abd_time_averaged(J, lam, t, k) if averaged else abd_instantaneous(J, lam, t, k)
    ell = np.arange(n)
    At = _fourier(np.asarray(A, dtype=complex), k, ell)
    Bt = _fourier(np.asarray(B, dtype=complex), k, ell)
    Dp = _fourier(np.asarray(D, dtype=complex), k, ell)
    Dm = _fourier(np.asarray(D, dtype=complex), k, -ell)
    for name, arr in (("A", At), ("B", Bt)):
        if np.max(np.abs(arr.imag)) > IMAG_TOL:
            raise ArithmeticError(f"{name}~ has an imaginary part; momentum grid not symmetric")
    eta = _assemble_eta(n, At.real, Bt.real, Dp, Dm)
    return EtaTable(n, t, eta, "averaged" if averaged else "instantaneous", float(n))


def eta_closed_form(J: float, lam: float, ell: int) -> tuple[float, float, float]:
    """``(A~, B~, D~)(ell)`` in the limits N -> inf then t -> inf."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if J <= 0 or lam <= 0:
        raise ValueError("need J, lambda > 0")
    if J == lam:
        return ((1.5, 0.5, 0.0), (-0.25, 0.25, -0.25))[ell] if ell < 2 else (0.0, 0.0, 0.0)
    if J > lam:
        if ell == 0:
            return 1.5, 0.5, 0.0
        if ell == 1:
            return -lam / (4 * J), lam / (4 * J), -lam / (4 * J)
        tail = (J * J - lam * lam) / (4 * J * J) * (lam / J) ** (ell - 2)
        return tail, -tail, tail
    if ell == 0:
        return 2 - J * J / (2 * lam * lam), J * J / (2 * lam * lam), 0.0
    if ell == 1:
        r3 = J**3 / (4 * lam**3)
        return -r3, r3, (J**3 - 2 * J * lam * lam) / (4 * lam**3)
    tail = (lam * lam - J * J) / (4 * lam * lam) * (J / lam) ** ell
    return tail, -tail, -tail


def eta_table_closed_form(J: float, lam: float, n: int) -> EtaTable:
    """EtaTable built from :func:`eta_closed_form` (t = inf)."""
    vals = np.array([eta_closed_form(J, lam, l) for l in range(n)])
    At, Bt, Dt = vals.T
    # the closed-form D~ is odd in ell
    eta = _assemble_eta(n, At, Bt, Dt.astype(complex), -Dt.astype(complex))
    return EtaTable(n, math.inf, eta, "closed_form", float(n))


def eta_tail_sum(table: EtaTable, family: int, k_cut: int) -> float:
    """``sum_{i <= k} sum_{j >= k} |eta^family_ij|`` with 1-based ``k``."""
    if not 1 <= k_cut <= table.n_sites:
        raise ValueError("k_cut must lie in 1..N")
    if family not in (1, 2, 3, 4):
        raise ValueError("family must be 1..4")
    k = k_cut - 1
    return float(np.abs(table.eta[family - 1, : k + 1, k:]).sum())


def single_site_table(theta: float, phi: float) -> np.ndarray:
    """``<phi| s_a s_b |phi>`` for a, b in (I, X, Y, Z)."""
    paulis = (
        np.eye(2),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]]),
        np.diag([1.0, -1.0]).astype(complex),
    )
    v = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return np.array([[v.conj() @ a @ b @ v for b in paulis] for a in paulis])


def qfi_product_state_ff(
    J: float,
    lam: float,
    t: float,
    n: int,
    theta: float = 0.0,
    phi: float = 0.0,
    kernel=None,
) -> float:
    """QFI of the uniform product state under the periodic TFI chain.

    Exact for states in the even-parity sector (``theta = 0``); for other
    ``theta`` it is the antiperiodic-sector approximation.  Cost is
    polynomial in N; no 2^N object is formed.
    """
    if n > FF_MAX_SITES:
        raise ValueError(f"N={n} exceeds the free-fermion cap {FF_MAX_SITES}")
    if t == 0:
        return 0.0
    table = eta_table(J, lam, t, n, averaged=True)
    var = (kernel or _kernels.string_variance)(*table.pauli_terms(), single_site_table(theta, phi))
    return max(4.0 * t * t * var, 0.0)


# --- quench asymptotics -------------------------------------------------

@dataclass(frozen=True)
class QuenchSpec:
    """Sensing field ``lam`` applied to the ground state at field ``lambda_star``.

    ``lambda_star=None`` is the lambda_star -> +inf limit (the all-up state).
    """

    J: float
    lam: float
    lambda_star: Optional[float] = None

    def __post_init__(self):
        if self.lambda_star is not None and math.isinf(self.lambda_star):
            object.__setattr__(self, "lambda_star", None)
        if self.J <= 0 or self.lam <= 0:
            raise ValueError("need J > 0 and lambda > 0")
        if self.lambda_star is not None and self.lambda_star <= 0:
            raise ValueError("lambda_star must be positive")

    @property
    def infinite(self) -> bool:
        return self.lambda_star is None


def quench_asymptote_ksum(q: QuenchSpec, n: int) -> float:
    """``lim_t I(t)/(N t^2)`` as the finite-N antiperiodic momentum sum."""
    k = momentum_grid(n)
    J, lam = q.J, q.lam
    c = np.cos(k)
    base = (lam - J * c) ** 2 * np.sin(k) ** 2 / (J * J + lam * lam - 2 * lam * J * c) ** 2
    if q.infinite:
        terms = 8 * J * J * base
    else:
        s = q.lambda_star
        terms = 8 * J * J * (lam - s) ** 2 * base / (J * J + s * s - 2 * s * J * c)
    return float(np.sum(terms) / n)


def quench_branch(q: QuenchSpec) -> str:
    J, lam, s = q.J, q.lam, q.lambda_star
    if lam == J or (s is not None and s == J):
        raise ValueError("critical point lambda = J or lambda_star = J is excluded")
    if s is None:
        return "para_from_product" if J < lam else "ferro_from_product"
    if lam < J and s < J:
        return "ferro_to_ferro"
    if lam > J and s > J:
        return "para_to_para"
    if s < J < lam:
        return "ferro_to_para"
    return "para_to_ferro"


def quench_asymptote_closed(q: QuenchSpec) -> float:
    """Residue-theorem value of ``lim_{t,N} I(t)/(N t^2)``."""
    branch = quench_branch(q)
    J, lam, s = q.J, q.lam, q.lambda_star
    J2 = J * J
    if branch == "para_from_product":
        return J2 * (4 * lam * lam - 3 * J2) / lam**4
    if branch == "ferro_from_product":
        return 1.0
    if branch == "ferro_to_ferro":
        return (lam - s) ** 2 * (J2 - 2 * lam * s + s * s) / (J2 - lam * s) ** 2
    if branch == "para_to_para":
        poly = (
            lam * J2 * J2
            + 2 * s * J2 * J2
            - 4 * lam * lam * s * J2
            - 3 * lam * s * s * J2
            + 4 * lam**3 * s * s
        )
        return J2 * (lam - s) ** 2 * poly / (s * s * lam**3 * (J2 - lam * s) ** 2)
    if branch == "ferro_to_para":
        return (2 * s * J2 - 3 * lam * J2 + lam * (s - 2 * lam) ** 2) / lam**3
    return (J2 - 2 * lam * s + s * s) / (s * s)


# --- Jordan-Wigner realization (small N, used for cross-checks) ----------

def jordan_wigner_annihilators(n: int) -> list[sp.csr_matrix]:
    """``c_i = prod_{l<i} Z_l sigma_i^+`` as sparse 2^n matrices (occupied = spin down)."""
    Z = sp.csr_matrix(np.diag([1.0, -1.0]))
    Id = sp.identity(2, format="csr")
    raise_ = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    out = []
    for i in range(n):
        op = sp.identity(1, format="csr")
        for l in range(n):
            f = Z if l < i else raise_ if l == i else Id
            op = sp.kron(op, f, format="csr")
        out.append(op)
    return out


def reconstruct_operator(table: EtaTable) -> sp.csr_matrix:
    """Dense-capable sparse realization of an EtaTable via Jordan-Wigner fermions."""
    n = table.n_sites
    c = jordan_wigner_annihilators(n)
    cd = [x.conj().T.tocsr() for x in c]
    dim = 1 << n
    out = table.constant * sp.identity(dim, format="csr", dtype=complex)
    e1, e2, e3, e4 = table.eta
    for i in range(n):
        for j in range(i, n):
            hop = cd[i] @ c[j]
            hole = c[i] @ cd[j]
            pair = cd[i] @ cd[j]
            out = out + e1[i, j] * (hop + hop.conj().T) + e2[i, j] * (hole + hole.conj().T)
            out = out + e3[i, j] * (pair + pair.conj().T) + 1j * e4[i, j] * (pair - pair.conj().T)
    return out.tocsr()
