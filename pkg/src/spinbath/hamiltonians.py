"""Hamiltonian builders for the probe + bath system.

All generators act on the joint space of dimension 2^(n+1) with the probe as
the most significant qubit. The probe follows the Pauli convention
(``S_z`` eigenvalues +1/-1, ``S_plus = |up><down|``), bath spins are
spin-1/2. Energies are angular frequencies.
"""

from __future__ import annotations

import enum
from math import ceil, pi

import numpy as np

from .algebra import BathSpec, OperatorMatrix, weighted_lowering, weighted_z_diagonal
from .errors import ConfigurationError

__all__ = [
    "HamiltonianKind",
    "PROBE_SZ",
    "PROBE_PLUS",
    "PROBE_MINUS",
    "build_flip_flop",
    "build_dispersive",
    "build_interacting",
    "build_time_dependent",
    "integrate_time_dependent",
]

PROBE_SZ = np.diag([1.0, -1.0]).astype(complex)
PROBE_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
PROBE_MINUS = PROBE_PLUS.T.conj()


class HamiltonianKind(enum.Enum):
    """Tags for the schedulable generators plus the validation-only one."""

    FLIP_FLOP = "flip_flop"
    DISPERSIVE = "dispersive"
    INTERACTING = "interacting"
    TIME_DEPENDENT_RWA = "time_dependent_rwa"


def build_flip_flop(spec: BathSpec) -> OperatorMatrix:
    """Resonant excitation-exchange generator sum_k gx_k (S+ I-_k + S- I+_k).

    Commutes with the total magnetization S_z/2 + sum_k I^z_k by an exact
    zero pattern, so the sector-blocked propagator applies.
    """
    lowering = weighted_lowering(spec.gx)
    h = np.kron(PROBE_PLUS, lowering)
    h = h + h.T.conj()
    return OperatorMatrix(h, tag=HamiltonianKind.FLIP_FLOP.value)


def build_dispersive(spec: BathSpec) -> OperatorMatrix:
    """Off-resonant generator S^z sum_k gz_k I^z_k, diagonal in the product basis."""
    bath_diag = weighted_z_diagonal(spec.gz)
    full_diag = np.concatenate([bath_diag, -bath_diag]).astype(complex)
    return OperatorMatrix(np.diag(full_diag), tag=HamiltonianKind.DISPERSIVE.value)


def build_interacting(spec: BathSpec) -> OperatorMatrix:
    """Flip-flop exchange plus nearest-neighbour intra-bath hopping.

    The bath chain is open: spec.j[i] couples spins i+1 and i+2 through
    I+_i I-_j + h.c. The fully polarized all-down state is annihilated by
    every term and is therefore an exact eigenstate.
    """
    if spec.j is None:
        raise ConfigurationError("interacting Hamiltonian needs chain couplings j")
    n = spec.n
    dim = 2**n
    h = np.kron(PROBE_PLUS, weighted_lowering(spec.gx))
    hop = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    for i, coupling in enumerate(spec.j):
        hi = 1 << (n - 1 - i)  # spin i+1
        lo = 1 << (n - 2 - i)  # spin i+2
        # I+_{i+1} I-_{i+2}: spin i+1 down->up, spin i+2 up->down.
        src = idx[((idx & hi) != 0) & ((idx & lo) == 0)]
        hop[src - hi + lo, src] += coupling
    h = h + np.kron(np.eye(2), hop)
    h = h + h.T.conj()
    return OperatorMatrix(h, tag=HamiltonianKind.INTERACTING.value)


def build_time_dependent(spec: BathSpec, rabi: float, t: float) -> OperatorMatrix:
    """Interaction-picture generator before the rotating-wave approximation.

    Carries the co-rotating exchange term at phase (rabi - omega_L) t, the
    counter-rotating term at (rabi + omega_L) t, and the longitudinal term at
    rabi * t. At rabi = omega_L the time average over a Larmor period
    approaches the static flip-flop generator to first order in g/omega_L.
    """
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    wl = spec.omega_larmor
    co = np.exp(-1j * (rabi - wl) * t)
    counter = np.exp(-1j * (rabi + wl) * t)
    longitudinal = np.exp(-1j * rabi * t)
    lowering = weighted_lowering(spec.gx)
    raising = lowering.T.conj()
    z_part = np.diag(weighted_z_diagonal(spec.gz).astype(complex))
    upper = co * lowering + counter * raising + longitudinal * z_part
    h = np.kron(PROBE_PLUS, upper)
    h = h + h.T.conj()
    return OperatorMatrix(h, tag=HamiltonianKind.TIME_DEPENDENT_RWA.value)


def integrate_time_dependent(
    spec: BathSpec,
    rabi: float,
    duration: float,
    dt: float | None = None,
) -> np.ndarray:
    """Time-ordered propagator for the pre-RWA generator.

    Second-order midpoint product integration on a uniform grid: the default
    step is a fortieth of the Larmor period, resolving the fastest phase
    rabi + omega_L. Returns the accumulated unitary as a plain array.
    """
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    max_dt = (2 * pi / spec.omega_larmor) / 40
    if dt is None:
        dt = max_dt
    elif dt > max_dt:
        raise ConfigurationError(
            f"dt={dt:g} too coarse for Larmor frequency {spec.omega_larmor:g}; "
            f"need dt <= {max_dt:g}"
        )
    steps = max(1, ceil(duration / dt))
    step = duration / steps
    dim = 2 ** (spec.n + 1)
    u = np.eye(dim, dtype=complex)
    for k in range(steps):
        h = build_time_dependent(spec, rabi, (k + 0.5) * step).matrix
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(-1j * w * step)) @ v.T.conj() @ u
    return u
