"""Many-body operators, model Hamiltonians and product states for spin-1/2 chains.

Basis convention: site 0 is the most significant bit of the basis index and
bit value 0 is spin up (sigma^z = +1).  The all-up state is index 0.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

MAX_ED_SITES = 14
HERMITIAN_TOL = 1e-12

_LABELS = ("X", "Y", "Z")


class Family(str, enum.Enum):
    TFI_PERIODIC = "TFI_PERIODIC"
    CHAOTIC_ISING_OPEN = "CHAOTIC_ISING_OPEN"
    LONG_RANGE_ISING = "LONG_RANGE_ISING"
    CUSTOM = "CUSTOM"


_REQUIRED = {
    Family.TFI_PERIODIC: ("J", "lambda"),
    Family.CHAOTIC_ISING_OPEN: ("J", "h", "lambda"),
    Family.LONG_RANGE_ISING: ("J", "lambda", "alpha_exponent"),
    Family.CUSTOM: ("lambda",),
}


@dataclass(frozen=True)
class PauliString:
    """``coefficient * prod_s factors[s]`` with identity on unlisted sites."""

    n_sites: int
    factors: Mapping[int, str]
    coefficient: complex = 1.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        clean = {}
        for site, label in self.factors.items():
            label = label.upper()
            if not 0 <= site < self.n_sites:
                raise ValueError(f"site index {site} out of range for {self.n_sites} sites")
            if label == "I":
                continue
            if label not in _LABELS:
                raise ValueError(f"unknown Pauli label {label!r}")
            clean[int(site)] = label
        object.__setattr__(self, "factors", dict(sorted(clean.items())))

    @property
    def is_hermitian(self) -> bool:
        return complex(self.coefficient).imag == 0.0

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.factors)


def realize_pauli_string(p: PauliString) -> sp.csr_matrix:
    """Tensor-product matrix of ``p`` as a sparse 2^n x 2^n operator."""
    n = p.n_sites
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    flip = 0
    phase = np.full(dim, complex(p.coefficient))
    for site, label in p.factors.items():
        shift = n - 1 - site
        bit = (cols >> shift) & 1
        if label == "X":
            flip |= 1 << shift
        elif label == "Y":
            flip |= 1 << shift
            # Y|0> = i|1>, Y|1> = -i|0>
            phase *= np.where(bit == 0, 1j, -1j)
        else:
            phase *= np.where(bit == 0, 1.0, -1.0)
    rows = cols ^ flip
    if np.all(phase.imag == 0):
        phase = phase.real
    return sp.csr_matrix((phase, (rows, cols)), shape=(dim, dim))


def hermiticity_error(op) -> float:
    """``max |M - M^dagger|`` for a sparse or dense operator."""
    diff = op - op.conj().T
    if sp.issparse(diff):
        return float(abs(diff).max()) if diff.nnz else 0.0
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def is_hermitian(op, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(op) < tol


@dataclass(frozen=True)
class ModelSpec:
    """A chain Hamiltonian family ``H = lambda * sum_i h_i + H_1``.

    ``custom_terms`` holds ``H_1`` for the CUSTOM family.  ``sensing_terms``
    optionally overrides the local sensing operators ``h_i`` (CUSTOM only);
    by default ``h_i = -sigma_i^z``.
    """

    family: Family
    n_sites: int
    couplings: Mapping[str, float] = field(default_factory=dict)
    custom_terms: tuple[PauliString, ...] = ()
    sensing_terms: tuple[PauliString, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "couplings", dict(self.couplings))
        object.__setattr__(self, "custom_terms", tuple(self.custom_terms))
        object.__setattr__(self, "sensing_terms", tuple(self.sensing_terms))

    def coupling(self, name: str) -> float:
        return float(self.couplings[name])


def validate_model(m: ModelSpec) -> list[str]:
    """Diagnostics for ``m``; empty when the model can be built."""
    problems = []
    if m.n_sites < 1:
        problems.append("n_sites: must be a positive integer")
    for name in _REQUIRED[m.family]:
        if name not in m.couplings:
            problems.append(f"couplings.{name}: required for {m.family.value}")
    if m.family is Family.TFI_PERIODIC and m.n_sites < 2:
        problems.append("n_sites: TFI_PERIODIC requires at least 2 sites")
    if m.family is Family.LONG_RANGE_ISING and m.couplings.get("alpha_exponent", 0.0) < 0:
        problems.append("couplings.alpha_exponent: must be >= 0")
    if m.family is Family.CUSTOM:
        if not m.custom_terms:
            problems.append("custom_terms: CUSTOM model needs at least one term")
        terms = m.custom_terms + m.sensing_terms
        if any(p.n_sites != m.n_sites for p in terms):
            problems.append("custom_terms: n_sites mismatch")
        if any(not p.is_hermitian for p in terms):
            problems.append("custom_terms: coefficients must be real")
    elif m.custom_terms or m.sensing_terms:
        problems.append("custom_terms: only allowed for the CUSTOM family")
    return problems


def _check(m: ModelSpec) -> None:
    problems = validate_model(m)
    if problems:
        raise ValueError("; ".join(problems))


def sensing_pauli_terms(m: ModelSpec) -> list[PauliString]:
    if m.family is Family.CUSTOM and m.sensing_terms:
        return list(m.sensing_terms)
    return [PauliString(m.n_sites, {i: "Z"}, -1.0) for i in range(m.n_sites)]


def interaction_pauli_terms(m: ModelSpec) -> list[PauliString]:
    """Pauli terms of ``H_1`` (everything not multiplied by lambda)."""
    n = m.n_sites
    if m.family is Family.CUSTOM:
        return list(m.custom_terms)
    J = m.coupling("J")
    terms = []
    if m.family is Family.TFI_PERIODIC:
        # literal periodic sum: at n=2 the single bond appears twice
        for i in range(n):
            terms.append(_xx(n, i, (i + 1) % n, -J))
    elif m.family is Family.CHAOTIC_ISING_OPEN:
        h = m.coupling("h")
        for i in range(n - 1):
            terms.append(_xx(n, i, i + 1, -J))
        for i in range(n):
            terms.append(PauliString(n, {i: "X"}, -h))
    elif m.family is Family.LONG_RANGE_ISING:
        alpha = m.coupling("alpha_exponent")
        for i in range(n):
            for j in range(i + 1, n):
                terms.append(_xx(n, i, j, -J / float(j - i) ** alpha))
    return terms


def _xx(n: int, i: int, j: int, coef: float) -> PauliString:
    if i == j:
        raise ValueError("bond endpoints coincide")
    return PauliString(n, {i: "X", j: "X"}, coef)


def _sum(terms: Sequence[PauliString], dim: int) -> sp.csr_matrix:
    total = sp.csr_matrix((dim, dim), dtype=float)
    for p in terms:
        total = total + realize_pauli_string(p)
    total.sum_duplicates()
    total.eliminate_zeros()
    return total.tocsr()


def build_hamiltonian(m: ModelSpec) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Return ``(H, dH)`` where ``dH = dH/dlambda``."""
    _check(m)
    dim = 1 << m.n_sites
    lam = m.coupling("lambda")
    dH = _sum(sensing_pauli_terms(m), dim)
    H = _sum(interaction_pauli_terms(m), dim) + lam * dH
    return H.tocsr(), dH


def local_sensing_terms(m: ModelSpec) -> list[sp.csr_matrix]:
    _check(m)
    return [realize_pauli_string(p) for p in sensing_pauli_terms(m)]


@dataclass(frozen=True)
class ProductStateSpec:
    """Uniform spin-coherent state ``cos(theta/2)|up> + sin(theta/2) e^{i phi}|down>``."""

    n_sites: int
    theta: float = 0.0
    phi: float = 0.0

    def spinor(self) -> np.ndarray:
        return np.array([np.cos(self.theta / 2), np.exp(1j * self.phi) * np.sin(self.theta / 2)])

    def bloch_vector(self) -> np.ndarray:
        """Single-site ``(<X>, <Y>, <Z>)``."""
        th, ph = self.theta, self.phi
        return np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def realize_product_state(s: ProductStateSpec) -> np.ndarray:
    if s.n_sites < 1:
        raise ValueError("n_sites must be positive")
    one = s.spinor()
    psi = np.ones(1, dtype=complex)
    for _ in range(s.n_sites):
        psi = np.kron(psi, one)
    return psi


def random_local_model(n_sites: int, rng: np.random.Generator) -> ModelSpec:
    """CUSTOM model with uniform [-1, 1] weights on all one-site and
    nearest-neighbour two-site Pauli terms, and a uniform [-1, 1] field."""
    terms = []
    for i in range(n_sites):
        for a in _LABELS:
            terms.append(PauliString(n_sites, {i: a}, rng.uniform(-1, 1)))
    for i in range(n_sites - 1):
        for a in _LABELS:
            for b in _LABELS:
                terms.append(PauliString(n_sites, {i: a, i + 1: b}, rng.uniform(-1, 1)))
    return ModelSpec(Family.CUSTOM, n_sites, {"lambda": rng.uniform(-1, 1)}, tuple(terms))


def random_product_state(n_sites: int, rng: np.random.Generator) -> ProductStateSpec:
    """Spin-coherent state with the common Bloch vector uniform on the sphere."""
    theta = float(np.arccos(rng.uniform(-1, 1)))
    phi = float(rng.uniform(0, 2 * np.pi))
    return ProductStateSpec(n_sites, theta, phi)
