"""Exact-diagonalization engine.

Everything is evaluated in the eigenbasis of ``H``: one diagonalization per
model, after which every time point costs O(D^2) for D = 2^N.  Time
evolution is done by phase multiplication on eigen-coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg as sl
import scipy.sparse as sp

from .operators import (
    MAX_ED_SITES,
    Family,
    ModelSpec,
    ProductStateSpec,
    build_hamiltonian,
    hermiticity_error,
    realize_product_state,
)

DEG_REL_TOL = 1e-9
NORM_TOL = 1e-8
TWO_FORM_TOL = 1e-10
RATE_TOL = 1e-4
COV_REL_TOL = 1e-8


@dataclass(frozen=True)
class EigenDecomposition:
    energies: np.ndarray
    vectors: np.ndarray
    min_gap: float
    tol_deg: float

    @property
    def dim(self) -> int:
        return len(self.energies)

    def to_eigenbasis(self, op) -> np.ndarray:
        """``V^dagger op V`` as a dense array."""
        V = self.vectors
        return V.conj().T @ np.asarray(op @ V)

    def frequencies(self) -> np.ndarray:
        """Liouvillian eigenvalues ``E_m - E_n``."""
        return self.energies[:, None] - self.energies[None, :]

    def kernel_mask(self) -> np.ndarray:
        return np.abs(self.frequencies()) <= self.tol_deg


def eigendecompose(H, max_sites: int = MAX_ED_SITES) -> EigenDecomposition:
    dim = H.shape[0]
    if dim > (1 << max_sites):
        raise ValueError(f"dimension {dim} exceeds the ED cap 2^{max_sites}")
    dense = H.toarray() if sp.issparse(H) else np.asarray(H)
    scale = float(np.max(np.abs(dense))) if dense.size else 0.0
    if hermiticity_error(dense) >= 1e-12 * max(1.0, scale):
        raise ValueError("Hamiltonian is not Hermitian")
    if np.iscomplexobj(dense) and not np.any(dense.imag):
        dense = dense.real
    energies, vectors = sl.eigh(dense, driver="evd")
    tol = DEG_REL_TOL * max(scale, np.finfo(float).tiny)
    steps = np.diff(energies)
    steps = steps[steps > tol]
    min_gap = float(steps.min()) if steps.size else math.inf
    return EigenDecomposition(energies, vectors, min_gap, tol)


def _time_integral_kernel(omega: np.ndarray, t: float, tol: float) -> np.ndarray:
    """``int_0^t exp(i omega tau) dtau`` elementwise, ``t`` on the kernel."""
    out = np.full(omega.shape, complex(t))
    live = np.abs(omega) > tol
    w = omega[live]
    out[live] = np.expm1(1j * w * t) / (1j * w)
    return out


def _check_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if abs(np.vdot(psi, psi).real - 1.0) > NORM_TOL:
        raise ValueError("state is not normalized")
    return psi


def _centered(op_psi: np.ndarray, psi: np.ndarray) -> tuple[np.ndarray, complex]:
    mean = np.vdot(psi, op_psi)
    return op_psi - mean * psi, mean


def _variance(op, psi: np.ndarray) -> float:
    phi, _ = _centered(op @ psi, psi)
    return float(np.vdot(phi, phi).real)


def generator(eig: EigenDecomposition, dH, t: float) -> np.ndarray:
    """Dense ``G(t) = int_0^t e^{iH tau} dH e^{-iH tau} dtau``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    kernel = _time_integral_kernel(eig.frequencies(), t, eig.tol_deg)
    G_e = eig.to_eigenbasis(dH) * kernel
    V = eig.vectors
    G = V @ G_e @ V.conj().T
    return 0.5 * (G + G.conj().T)


def qfi(G, psi: np.ndarray) -> float:
    """``4 Var[G]`` over ``psi``."""
    psi = _check_state(psi)
    value = 4.0 * _variance(G, psi)
    if value < 0:
        if value < -1e-9:
            raise ArithmeticError(f"negative QFI {value}")
        value = 0.0
    return value


@dataclass(frozen=True)
class QfiRecord:
    t: float
    qfi: float
    gamma: float
    sqrt_qfi_rate: float
    bound_slack: float
    tol_rate: float = RATE_TOL

    @property
    def violated(self) -> bool:
        return self.bound_slack < -self.tol_rate


@dataclass(frozen=True)
class CovarianceMap:
    t: float
    matrix: np.ndarray

    def distance_profile(self, periodic: bool = False) -> np.ndarray:
        """Mean ``|Cov|`` at each site separation."""
        n = self.matrix.shape[0]
        i, j = np.indices((n, n))
        d = np.abs(i - j)
        if periodic:
            d = np.minimum(d, n - d)
        a = np.abs(self.matrix)
        return np.array([a[d == k].mean() for k in range(d.max() + 1)])


class Probe:
    """Per-(model, dH, psi) evaluator sharing one eigenbasis rotation.

    ``dH`` is rotated into the eigenbasis once; ``terms`` (local sensing
    operators) are only needed by :meth:`covariance`.
    """

    def __init__(self, eig: EigenDecomposition, dH, psi: np.ndarray, terms=None):
        self.eig = eig
        self.dH = dH
        self.psi = _check_state(psi)
        self.dH_e = eig.to_eigenbasis(dH)
        self.psi_e = eig.vectors.conj().T @ self.psi
        self.omega = eig.frequencies()
        self.terms = terms

    # Phi_0 = (G - <G>) psi and its time derivative, in the eigenbasis
    def _phi(self, t: float) -> np.ndarray:
        kernel = _time_integral_kernel(self.omega, t, self.eig.tol_deg)
        phi, _ = _centered((self.dH_e * kernel) @ self.psi_e, self.psi_e)
        return phi

    def _phi_dot(self, t: float) -> np.ndarray:
        rot = np.exp(1j * self.omega * t)
        phi, _ = _centered((self.dH_e * rot) @ self.psi_e, self.psi_e)
        return phi

    def evolved_state(self, t: float) -> np.ndarray:
        """``U(t) psi`` in the computational basis."""
        return self.eig.vectors @ (np.exp(-1j * self.eig.energies * t) * self.psi_e)

    def qfi(self, t: float) -> float:
        phi = self._phi(t)
        return max(4.0 * float(np.vdot(phi, phi).real), 0.0)

    def gamma(self, t: float) -> float:
        """Growth bound, evaluated in both pictures; they must agree."""
        phi = self._phi_dot(t)
        heisenberg = 2.0 * math.sqrt(max(float(np.vdot(phi, phi).real), 0.0))
        schrodinger = 2.0 * math.sqrt(max(_variance(self.dH, self.evolved_state(t)), 0.0))
        if abs(heisenberg - schrodinger) > TWO_FORM_TOL * max(1.0, heisenberg):
            raise ArithmeticError(
                f"Heisenberg and Schrodinger growth bounds disagree: "
                f"{heisenberg!r} vs {schrodinger!r}"
            )
        return heisenberg

    def sqrt_qfi_rate(self, t: float) -> float:
        """Exact ``d sqrt(I)/dt = 2 Re<Phi_dot|Phi> / ||Phi||``."""
        phi = self._phi(t)
        norm = math.sqrt(float(np.vdot(phi, phi).real))
        if 4.0 * norm * norm < 1e-12:
            # sqrt(I) ~ Gamma(0+) t near the origin
            return self.gamma(0.0) if t < 1e-6 else 0.0
        return 2.0 * float(np.vdot(self._phi_dot(t), phi).real) / norm

    def record(self, t: float) -> QfiRecord:
        g = self.gamma(t)
        rate = self.sqrt_qfi_rate(t)
        return QfiRecord(t, self.qfi(t), g, rate, g - rate)

    def saturation_residual(self, t: float) -> tuple[float, bool]:
        phi = self._phi(t)
        phi_dot = self._phi_dot(t)
        n0 = float(np.vdot(phi, phi).real)
        n1 = float(np.vdot(phi_dot, phi_dot).real)
        if n0 == 0.0 or n1 == 0.0:
            return 0.0, True
        overlap = np.vdot(phi_dot, phi)
        collinearity = max(0.0, 1.0 - abs(overlap) ** 2 / (n0 * n1))
        scale = math.sqrt(n0 * n1)
        phase_ok = abs(overlap.imag) <= 1e-8 * scale and overlap.real >= -1e-8 * scale
        if collinearity < 1e-12:
            collinearity = 0.0
        return collinearity, bool(phase_ok)

    def long_time_qfi_density(self) -> float:
        projected = np.where(self.eig.kernel_mask(), self.dH_e, 0.0)
        phi, _ = _centered(projected @ self.psi_e, self.psi_e)
        return 4.0 * float(np.vdot(phi, phi).real)

    def covariance(self, t: float) -> CovarianceMap:
        if self.terms is None:
            raise ValueError("covariance map needs the local sensing terms")
        state = self.evolved_state(t)
        applied = np.array([h @ state for h in self.terms])
        means = applied.conj() @ state
        centered = applied - means[:, None] * state[None, :]
        matrix = (centered.conj() @ centered.T).real
        matrix = 0.5 * (matrix + matrix.T)
        g = self.gamma(t)
        total = 4.0 * matrix.sum()
        if abs(total - g * g) > COV_REL_TOL * max(1.0, g * g):
            raise ArithmeticError(f"covariance sum {total!r} != Gamma^2 {g * g!r}")
        return CovarianceMap(t, matrix)


def gamma_rate(eig: EigenDecomposition, dH, psi: np.ndarray, t: float) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    return Probe(eig, dH, psi).gamma(t)


def _finite_difference_rates(t: np.ndarray, root: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    rates = np.gradient(root, t, edge_order=1) if len(t) > 1 else np.array(gamma)
    # at I ~ 0 use the series sqrt(I) = Gamma(0+) t
    small = root**2 < 1e-12
    rates[small & (t < 1e-6)] = gamma[small & (t < 1e-6)]
    return rates


def _fd_tolerance(t: np.ndarray, root: np.ndarray) -> float:
    if len(t) < 4:
        return RATE_TOL
    h = float(np.max(np.diff(t)))
    third = np.abs(np.diff(root, 3)) / h**3
    # central differences: error <= h^2 |f'''| / 6; one-sided ends: h |f''| / 2
    second = np.abs(np.diff(root, 2)) / h**2
    bound = max(float(third.max()) * h * h / 6.0, float(second[[0, -1]].max()) * h / 2.0)
    return max(RATE_TOL, 2.0 * bound)


def verify_growth_bound(
    eig: EigenDecomposition,
    dH,
    psi: np.ndarray,
    t_grid: Sequence[float],
    method: str = "exact",
) -> list[QfiRecord]:
    """Check ``d sqrt(I)/dt <= Gamma(t)`` on ``t_grid``.

    ``method="exact"`` differentiates sqrt(I) analytically; ``"fd"`` uses
    central differences on the grid (one-sided at the ends) and widens
    the tolerance by the estimated truncation error.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be nonnegative and strictly increasing")
    probe = Probe(eig, dH, psi)
    if method == "exact":
        return [probe.record(float(x)) for x in t]
    if method != "fd":
        raise ValueError(f"unknown method {method!r}")
    qfis = np.array([probe.qfi(float(x)) for x in t])
    gammas = np.array([probe.gamma(float(x)) for x in t])
    root = np.sqrt(qfis)
    rates = _finite_difference_rates(t, root, gammas)
    tol = _fd_tolerance(t, root)
    return [
        QfiRecord(float(x), float(q), float(g), float(r), float(g - r), tol)
        for x, q, g, r in zip(t, qfis, gammas, rates)
    ]


def covariance_map(eig: EigenDecomposition, terms, psi: np.ndarray, t: float) -> CovarianceMap:
    dH = terms[0]
    for h in terms[1:]:
        dH = dH + h
    return Probe(eig, dH, psi, terms=list(terms)).covariance(t)


def long_time_qfi_density(eig: EigenDecomposition, dH, psi: np.ndarray) -> float:
    """``lim_{t->inf} I(t)/t^2`` from the Liouvillian-kernel projection of dH."""
    return Probe(eig, dH, psi).long_time_qfi_density()


def saturation_residual(eig: EigenDecomposition, dH, psi: np.ndarray, t: float) -> tuple[float, bool]:
    if t <= 0:
        raise ValueError("t must be > 0")
    return Probe(eig, dH, psi).saturation_residual(t)


def snl_gamma_monitor(
    family: Family | str,
    couplings: Mapping[str, float],
    n_list: Iterable[int],
    theta: float,
    phi: float,
    t: float,
) -> list[tuple[int, float]]:
    """``Gamma(t) / (2 sqrt(N))`` for each chain length."""
    out = []
    for n in n_list:
        if n > MAX_ED_SITES:
            raise ValueError(f"N={n} exceeds the ED cap {MAX_ED_SITES}")
        model = ModelSpec(Family(family), n, couplings)
        H, dH = build_hamiltonian(model)
        psi = realize_product_state(ProductStateSpec(n, theta, phi))
        g = gamma_rate(eigendecompose(H), dH, psi, t)
        out.append((n, g / (2.0 * math.sqrt(n))))
    return out
