"""Unitary propagation, the probe-reset channel, and bath observables.

States are dense density matrices tagged with the space they live on:
``"probe_bath"`` for the joint 2^(n+1)-dimensional space (probe most
significant) or ``"bath"`` for the bath alone. All maps are pure functions;
returned arrays are new objects and inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .algebra import DickeDecomposition, OperatorMatrix
from .errors import ContractViolationError, IntegrityError

__all__ = [
    "PROBE_BATH",
    "BATH",
    "DensityMatrix",
    "Propagator",
    "BlockedPropagator",
    "evolve",
    "evolve_blocked",
    "reset_probe",
    "partial_trace_probe",
    "purity",
    "polarization",
    "manifold_populations",
    "ManifoldProjectors",
    "state_fidelity_pure",
]

PROBE_BATH = "probe_bath"
BATH = "bath"

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
MIN_EIGENVALUE = -1e-9
HAMILTONIAN_TOL = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive-semidefinite state over probe+bath or bath alone."""

    matrix: np.ndarray
    space: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        if m.shape[0] & (m.shape[0] - 1):
            raise ValueError(f"dimension {m.shape[0]} is not a power of two")
        if self.space not in (PROBE_BATH, BATH):
            raise ValueError(f"unknown space tag {self.space!r}")
        if self.space == PROBE_BATH and m.shape[0] < 4:
            raise ValueError("probe+bath space needs at least two qubits")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_bath(self) -> int:
        bath_dim = self.dim // 2 if self.space == PROBE_BATH else self.dim
        return bath_dim.bit_length() - 1

    @classmethod
    def initial_state(cls, n: int) -> "DensityMatrix":
        """Probe in its ground (down) state, bath maximally mixed (hot)."""
        bath_dim = 2**n
        m = np.zeros((2 * bath_dim, 2 * bath_dim), dtype=complex)
        m[bath_dim:, bath_dim:] = np.eye(bath_dim) / bath_dim
        return cls(m, PROBE_BATH)

    @classmethod
    def maximally_mixed_bath(cls, n: int) -> "DensityMatrix":
        return cls(np.eye(2**n, dtype=complex) / 2**n, BATH)

    @classmethod
    def from_pure(cls, vector: np.ndarray, space: str) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), space)

    def trace_defect(self) -> float:
        return abs(float(np.trace(self.matrix).real) - 1.0) + abs(
            float(np.trace(self.matrix).imag)
        )

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T.conj())))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def validate(self, full: bool = True) -> None:
        """Raise IntegrityError if the state invariants are violated.

        The cheap checks (hermiticity, trace, diagonal) always run; the
        spectral positivity check runs only with ``full=True`` since it costs
        a full eigendecomposition.
        """
        if self.hermiticity_defect() > HERMITICITY_TOL:
            raise IntegrityError(
                f"hermiticity defect {self.hermiticity_defect():.3e}"
            )
        if self.trace_defect() > TRACE_TOL:
            raise IntegrityError(f"trace defect {self.trace_defect():.3e}")
        diag_min = float(np.min(self.matrix.diagonal().real))
        if diag_min < MIN_EIGENVALUE:
            raise IntegrityError(f"negative diagonal entry {diag_min:.3e}")
        if full and self.min_eigenvalue() < MIN_EIGENVALUE:
            raise IntegrityError(
                f"negative eigenvalue {self.min_eigenvalue():.3e}"
            )


def _require_hamiltonian(h: OperatorMatrix) -> None:
    defect = h.hermiticity_defect()
    if defect > HAMILTONIAN_TOL:
        raise ValueError(f"generator is not Hermitian (defect {defect:.3e})")


@dataclass(frozen=True)
class Propagator:
    """Unitary exp(-i H tau) from a Hermitian eigendecomposition of H."""

    unitary: np.ndarray
    tau: float
    source_tag: Optional[str] = None

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    @classmethod
    def from_hamiltonian(cls, h: OperatorMatrix, tau: float) -> "Propagator":
        _require_hamiltonian(h)
        w, v = np.linalg.eigh(h.matrix)
        u = (v * np.exp(-1j * w * tau)) @ v.T.conj()
        return cls(unitary=u, tau=tau, source_tag=h.tag)

    def unitarity_defect(self) -> float:
        gram = self.unitary.T.conj() @ self.unitary
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.dim != self.dim:
            raise ValueError(f"dimension mismatch: state {rho.dim}, propagator {self.dim}")
        out = self.unitary @ rho.matrix @ self.unitary.T.conj()
        return DensityMatrix(out, rho.space)


def _popcounts(dim: int) -> np.ndarray:
    return np.array([bin(i).count("1") for i in range(dim)])


class BlockedPropagator:
    """Propagator exploiting conservation of total magnetization.

    A generator that commutes with the total z-magnetization never connects
    basis states with different down-spin counts, so exp(-i H tau) is block
    diagonal over the fixed-magnetization sectors (dimensions C(q, k) for q
    qubits). The unitary is built and applied sector by sector; blocks of the
    input that are exactly zero are skipped, which makes protocol runs on
    sector-diagonal states much faster than the dense path.
    """

    def __init__(self, h: OperatorMatrix, tau: float):
        _require_hamiltonian(h)
        dim = h.dim
        counts = _popcounts(dim)
        order = np.argsort(counts, kind="stable")
        self.tau = tau
        self.source_tag = h.tag
        self.dim = dim
        self._order = order
        self._inverse_order = np.argsort(order)
        boundaries = np.searchsorted(counts[order], np.arange(dim.bit_length() + 1))
        self._slices = [
            slice(boundaries[k], boundaries[k + 1])
            for k in range(len(boundaries) - 1)
            if boundaries[k + 1] > boundaries[k]
        ]
        hp = h.matrix[np.ix_(order, order)]
        off = hp.copy()
        for s in self._slices:
            off[s, s] = 0.0
        max_off = float(np.max(np.abs(off))) if dim > 1 else 0.0
        if max_off != 0.0:
            raise ContractViolationError(
                "generator does not conserve total magnetization "
                f"(max cross-sector element {max_off:.3e})"
            )
        self._unitaries = []
        for s in self._slices:
            w, v = np.linalg.eigh(hp[s, s])
            self._unitaries.append((v * np.exp(-1j * w * tau)) @ v.T.conj())

    @property
    def sector_dims(self) -> list[int]:
        return [s.stop - s.start for s in self._slices]

    def dense_unitary(self) -> np.ndarray:
        u = np.zeros((self.dim, self.dim), dtype=complex)
        for s, block in zip(self._slices, self._unitaries):
            u[s, s] = block
        return u[np.ix_(self._inverse_order, self._inverse_order)]

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.dim != self.dim:
            raise ValueError(f"dimension mismatch: state {rho.dim}, propagator {self.dim}")
        rp = rho.matrix[np.ix_(self._order, self._order)]
        out = np.zeros_like(rp)
        for sa, ua in zip(self._slices, self._unitaries):
            for sb, ub in zip(self._slices, self._unitaries):
                block = rp[sa, sb]
                if not block.any():
                    continue
                out[sa, sb] = ua @ block @ ub.T.conj()
        return DensityMatrix(
            out[np.ix_(self._inverse_order, self._inverse_order)], rho.space
        )


def evolve(rho: DensityMatrix, h: OperatorMatrix, tau: float) -> DensityMatrix:
    """Conjugate the state by exp(-i H tau)."""
    if rho.dim != h.dim:
        raise ValueError(f"dimension mismatch: state {rho.dim}, generator {h.dim}")
    return Propagator.from_hamiltonian(h, tau).apply(rho)


def evolve_blocked(rho: DensityMatrix, h: OperatorMatrix, tau: float) -> DensityMatrix:
    """Like :func:`evolve` but computed over fixed-magnetization sectors.

    Requires the generator to commute with the total z-magnetization (exact
    zero pattern); raises ContractViolationError otherwise.
    """
    if rho.dim != h.dim:
        raise ValueError(f"dimension mismatch: state {rho.dim}, generator {h.dim}")
    return BlockedPropagator(h, tau).apply(rho)


def partial_trace_probe(rho: DensityMatrix) -> DensityMatrix:
    if rho.space != PROBE_BATH:
        raise ValueError("partial trace over the probe needs a probe+bath state")
    bath_dim = rho.dim // 2
    r = rho.matrix.reshape(2, bath_dim, 2, bath_dim)
    return DensityMatrix(r[0, :, 0, :] + r[1, :, 1, :], BATH)


def reset_probe(rho: DensityMatrix, fidelity: float = 1.0) -> DensityMatrix:
    """Optical-pumping reset: trace out the probe, re-prepare it spin-down.

    The output factorizes as |down><down| (x) Tr_S(rho), so probe-bath
    correlations are erased while the bath marginal is untouched. With
    ``fidelity`` f < 1 the map interpolates linearly between the input and
    the perfectly reset state (still completely positive and trace
    preserving).
    """
    if rho.space != PROBE_BATH:
        raise ValueError("reset acts on the probe+bath space")
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"reset fidelity must lie in [0, 1], got {fidelity}")
    bath_dim = rho.dim // 2
    bath = partial_trace_probe(rho)
    out = np.zeros_like(rho.matrix)
    out[bath_dim:, bath_dim:] = bath.matrix
    if fidelity < 1.0:
        out = fidelity * out + (1.0 - fidelity) * rho.matrix
    return DensityMatrix(out, PROBE_BATH)


def _require_bath(rho: DensityMatrix) -> None:
    if rho.space != BATH:
        raise ValueError("observable is defined on bath-only states")


def purity(rho: DensityMatrix) -> float:
    """Tr[rho^2], computed as the squared Frobenius norm."""
    _require_bath(rho)
    return float(np.sum(np.abs(rho.matrix) ** 2))


def polarization(rho: DensityMatrix) -> float:
    """Normalized longitudinal bath polarization <sum_k I^z_k> / (n/2)."""
    _require_bath(rho)
    n = rho.n_bath
    weights = (n - 2 * _popcounts(rho.dim)) / 2.0
    value = float(np.real(np.sum(weights * rho.matrix.diagonal())))
    return value / (n / 2.0)


class ManifoldProjectors:
    """Projectors onto the fixed-total-spin manifolds, built once per bath."""

    def __init__(self, dd: DickeDecomposition):
        self.spin_values = dd.spin_values
        self.n = dd.n
        self._projectors = []
        for total_spin in self.spin_values:
            basis = dd.basis_for_spin(total_spin)
            self._projectors.append((basis @ basis.T).astype(complex))

    def populations(self, bath_matrix: np.ndarray) -> np.ndarray:
        return np.array(
            [float(np.vdot(p, bath_matrix).real) for p in self._projectors]
        )


def manifold_populations(rho: DensityMatrix, dd: DickeDecomposition) -> np.ndarray:
    """Probability of each total-spin manifold, ordered by decreasing spin."""
    _require_bath(rho)
    if rho.n_bath != dd.n:
        raise ValueError(f"state has {rho.n_bath} spins, decomposition {dd.n}")
    return ManifoldProjectors(dd).populations(rho.matrix)


def state_fidelity_pure(rho: DensityMatrix, vector: np.ndarray) -> float:
    """Overlap <v|rho|v> with a pure target state."""
    v = np.asarray(vector, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    if v.shape[0] != rho.dim:
        raise ValueError("state and target dimensions differ")
    return float(np.real(v.conj() @ rho.matrix @ v))
