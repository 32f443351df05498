"""Spin operators, collective couplings, and the total-spin decomposition.

Conventions used throughout the package:

* Bath spins are spin-1/2: ``iz`` has eigenvalues +1/2 and -1/2, and
  ``i_plus = |up><down|``.
* The probe uses the Pauli convention (``S_z`` eigenvalues +1 and -1); probe
  matrices live in :mod:`spinbath.hamiltonians`.
* Product-basis ordering: bit value 0 means "up", bit value 1 means "down".
  Within a bath of ``n`` spins, spin 1 occupies the most significant bit, so
  basis index ``i`` encodes spin ``k`` as bit ``(i >> (n - k)) & 1``.

These two conventions, and the probe-first ordering of the joint space, are
fixed here and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

import numpy as np

from .errors import DegenerateCouplingError, ResourceError

__all__ = [
    "OperatorMatrix",
    "BathSpec",
    "DickeBlock",
    "DickeDecomposition",
    "single_spin_operator",
    "collective_lowering",
    "collective_dephasing",
    "dicke_multiplicity",
    "dicke_decomposition",
    "closed_form_purity",
    "MAX_DECOMPOSITION_SPINS",
]

# Largest bath size for which the dense total-spin basis is built by default.
MAX_DECOMPOSITION_SPINS = 12

# Single spin-1/2 matrices in the (up, down) basis.
_I2 = np.eye(2, dtype=complex)
_SPIN_HALF = {
    "s_plus": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
    "s_minus": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex),
    "sz": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
    "sx": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    "sy": np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex),
}


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex square operator on an ``n``-spin product space.

    ``matrix`` entries are dimensionless unless the operator plays a
    Hamiltonian role, in which case they carry angular-frequency units.
    Instances are immutable; the wrapped array is marked read-only.
    """

    matrix: np.ndarray
    tag: Optional[str] = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        if m.shape[0] & (m.shape[0] - 1):
            raise ValueError(f"dimension {m.shape[0]} is not a power of two")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_spins(self) -> int:
        return self.dim.bit_length() - 1

    def hermiticity_defect(self) -> float:
        """Max absolute elementwise deviation from self-adjointness."""
        return float(np.max(np.abs(self.matrix - self.matrix.T.conj())))

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.T.conj().copy(), tag=self.tag)


@dataclass(frozen=True)
class BathSpec:
    """Bath size, Larmor frequency and per-spin probe couplings.

    ``gx``/``gz`` are the transverse and longitudinal coupling components of
    each bath spin (angular-frequency units). ``j`` optionally holds the
    ``n - 1`` nearest-neighbour intra-bath couplings of an open chain.

    Negative transverse couplings are canonicalized away on construction: a
    local z-rotation of the affected spin absorbs the sign, which changes no
    observable dynamics. The flipped sites are recorded in ``flipped_sites``.
    """

    n: int
    omega_larmor: float
    gx: np.ndarray
    gz: np.ndarray
    j: Optional[np.ndarray] = None
    flipped_sites: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"bath needs at least one spin, got n={self.n}")
        gx = np.asarray(self.gx, dtype=float).copy()
        gz = np.asarray(self.gz, dtype=float).copy()
        if gx.shape != (self.n,) or gz.shape != (self.n,):
            raise ValueError(
                f"coupling arrays must have length n={self.n}, "
                f"got gx {gx.shape}, gz {gz.shape}"
            )
        flipped = tuple(int(k + 1) for k in np.nonzero(gx < 0)[0])
        gx = np.abs(gx)
        object.__setattr__(self, "gx", _freeze(gx))
        object.__setattr__(self, "gz", _freeze(gz))
        object.__setattr__(self, "flipped_sites", flipped)
        if self.j is not None:
            j = np.asarray(self.j, dtype=float).copy()
            if j.shape != (self.n - 1,):
                raise ValueError(
                    f"chain couplings must have length n-1={self.n - 1}, got {j.shape}"
                )
            object.__setattr__(self, "j", _freeze(j))

    @property
    def g_perp(self) -> float:
        """Root-sum-square transverse coupling."""
        return float(np.linalg.norm(self.gx))

    @property
    def g_par(self) -> float:
        """Root-sum-square longitudinal coupling."""
        return float(np.linalg.norm(self.gz))

    def coupling_ratio(self) -> float:
        """max_k |g_k| / omega_larmor, the weak-coupling figure of merit."""
        mags = np.hypot(self.gx, self.gz)
        return float(np.max(mags) / self.omega_larmor)

    def is_weakly_coupled(self, ratio: float = 1e-2) -> bool:
        return self.coupling_ratio() <= ratio


def single_spin_operator(kind: str, site: int, n_total: int) -> OperatorMatrix:
    """Embed a spin-1/2 operator at ``site`` into an ``n_total``-spin space.

    ``kind`` is one of ``sx, sy, sz, s_plus, s_minus``. Sites are 1-based
    with spin 1 at the most significant bit position.
    """
    if kind not in _SPIN_HALF:
        raise ValueError(f"unknown operator kind {kind!r}")
    if not 1 <= site <= n_total:
        raise ValueError(f"site {site} out of range 1..{n_total}")
    op = _SPIN_HALF[kind]
    before = np.eye(2 ** (site - 1), dtype=complex)
    after = np.eye(2 ** (n_total - site), dtype=complex)
    return OperatorMatrix(np.kron(np.kron(before, op), after))


def weighted_lowering(weights: np.ndarray) -> np.ndarray:
    """Dense sum_k w_k I^-_k on the n-spin product space, built bitwise."""
    n = len(weights)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for k, w in enumerate(weights):
        if w == 0.0:
            continue
        bit = 1 << (n - 1 - k)
        src = np.arange(dim)
        ups = src[(src & bit) == 0]  # spin k up
        out[ups + bit, ups] += w  # lower it
    return out


def collective_lowering(gx: np.ndarray) -> tuple[OperatorMatrix, float]:
    """Normalized coupling-weighted collective lowering operator.

    Returns ``(op, g_perp)`` where ``op = (1/g_perp) sum_k gx_k I^-_k`` and
    ``g_perp`` is the root-sum-square of the weights, so the weight vector of
    the returned operator has unit norm.
    """
    gx = np.asarray(gx, dtype=float)
    g_perp = float(np.linalg.norm(gx))
    if g_perp == 0.0:
        raise DegenerateCouplingError("all transverse couplings are zero")
    return OperatorMatrix(weighted_lowering(gx / g_perp)), g_perp


def collective_dephasing(gz: np.ndarray) -> tuple[OperatorMatrix, float]:
    """Normalized coupling-weighted collective dephasing operator.

    Returns ``(op, g_par)`` with ``op = (1/g_par) sum_k gz_k I^z_k``,
    diagonal in the product basis.
    """
    gz = np.asarray(gz, dtype=float)
    g_par = float(np.linalg.norm(gz))
    if g_par == 0.0:
        raise DegenerateCouplingError("all longitudinal couplings are zero")
    diag = weighted_z_diagonal(gz / g_par)
    return OperatorMatrix(np.diag(diag.astype(complex))), g_par


def weighted_z_diagonal(weights: np.ndarray) -> np.ndarray:
    """Diagonal of sum_k w_k I^z_k in the product basis (length 2^n)."""
    n = len(weights)
    diag = np.zeros(2**n)
    for k, w in enumerate(weights):
        bit = 1 << (n - 1 - k)
        signs = np.where(np.arange(2**n) & bit, -0.5, 0.5)
        diag += w * signs
    return diag


def _two_spin_values(n: int) -> range:
    """Valid 2I values for n spins, decreasing."""
    return range(n, (n % 2) - 1, -2)


def _validate_spin(n: int, total_spin) -> int:
    """Return 2I as an int, rejecting values outside the n-spin ladder."""
    two_i = 2 * Fraction(total_spin)
    if two_i.denominator != 1:
        raise ValueError(f"total spin {total_spin} is not a half-integer")
    two_i = int(two_i)
    if two_i < 0 or two_i > n or (n - two_i) % 2:
        raise ValueError(f"total spin {total_spin} invalid for n={n}")
    return two_i


def dicke_multiplicity(n: int, total_spin) -> int:
    """Number of copies of the spin-I ladder in the n-spin decomposition.

    Evaluated exactly in integer arithmetic via the difference of binomials
    C(n, n/2 - I) - C(n, n/2 - I - 1), which equals
    C(n, n/2 - I) * (2I + 1) / (n/2 + I + 1).
    """
    two_i = _validate_spin(n, total_spin)
    k = (n - two_i) // 2
    return comb(n, k) - (comb(n, k - 1) if k >= 1 else 0)


@dataclass(frozen=True)
class DickeBlock:
    """One copy of a fixed-total-spin ladder.

    ``basis`` has shape ``(2^n, 2I+1)`` with orthonormal columns ordered by
    magnetization m = -I .. +I.
    """

    total_spin: float
    copy: int
    basis: np.ndarray

    @property
    def ladder_dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class DickeDecomposition:
    """Simultaneous eigenbasis of total I^2 and I_z with multiplicity labels.

    Blocks are ordered by decreasing total spin, copies in construction
    order. The union of all block bases is an orthonormal basis of the full
    2^n-dimensional bath space.
    """

    n: int
    blocks: tuple[DickeBlock, ...]
    multiplicity: dict[float, int]

    @property
    def spin_values(self) -> tuple[float, ...]:
        """Distinct total-spin values, decreasing."""
        return tuple(two_i / 2 for two_i in _two_spin_values(self.n))

    def basis_for_spin(self, total_spin: float) -> np.ndarray:
        """All basis columns of the given total spin, copies side by side."""
        cols = [b.basis for b in self.blocks if b.total_spin == total_spin]
        if not cols:
            raise ValueError(f"no manifold with total spin {total_spin}")
        return np.hstack(cols)

    def full_basis(self) -> np.ndarray:
        """(2^n, 2^n) orthogonal matrix stacking every block."""
        return np.hstack([b.basis for b in self.blocks])


def dicke_decomposition(n: int, max_n: int = MAX_DECOMPOSITION_SPINS) -> DickeDecomposition:
    """Build the total-spin decomposition by iterated angular-momentum addition.

    Spins are attached one at a time; each ladder of spin I branches into
    ladders of spin I + 1/2 and I - 1/2 whose states are formed with the
    standard spin-1/2 coupling coefficients. This yields exact multiplicity
    labels without diagonalizing I^2; numerical diagonalization is kept as an
    independent oracle in the test suite.
    """
    if n < 1:
        raise ValueError(f"need at least one spin, got n={n}")
    if n > max_n:
        raise ResourceError(
            f"n={n} exceeds the dense decomposition cap ({max_n}); "
            "the full basis would need "
            f"{(2**n) ** 2 * 8 / 1e9:.1f} GB"
        )

    # Each path is (two_I, basis matrix of shape (2^k, two_I + 1)).
    paths: list[tuple[int, np.ndarray]] = [(1, np.eye(2)[:, ::-1].copy())]
    # Columns are ordered m = -I..+I, so for one spin: (|down>, |up>).

    for _ in range(n - 1):
        grown: list[tuple[int, np.ndarray]] = []
        for two_i, basis in paths:
            dim, width = basis.shape
            up = np.zeros((2 * dim, width + 1))
            dn = np.zeros((2 * dim, width - 1)) if two_i >= 1 else None
            c = np.arange(1, width + 1)
            # Child with total spin I + 1/2.
            up[0::2, 1:] = basis * np.sqrt(c / (two_i + 1))
            up[1::2, :-1] = basis * np.sqrt((two_i + 1 - (c - 1)) / (two_i + 1))
            grown.append((two_i + 1, up))
            # Child with total spin I - 1/2 (absent for a spin-1/2 ladder).
            if dn is not None:
                cc = np.arange(width - 1)
                dn[0::2, :] = -basis[:, :-1] * np.sqrt((two_i - cc) / (two_i + 1))
                dn[1::2, :] = basis[:, 1:] * np.sqrt((cc + 1) / (two_i + 1))
                grown.append((two_i - 1, dn))
        paths = grown

    blocks = []
    copy_counter: dict[int, int] = {}
    for two_i, basis in sorted(paths, key=lambda p: -p[0]):
        copy_counter[two_i] = copy_counter.get(two_i, 0) + 1
        blocks.append(
            DickeBlock(
                total_spin=two_i / 2,
                copy=copy_counter[two_i],
                basis=_freeze(basis),
            )
        )
    multiplicity = {two_i / 2: count for two_i, count in copy_counter.items()}
    for two_i in _two_spin_values(n):
        assert multiplicity[two_i / 2] == dicke_multiplicity(n, two_i / 2)
    return DickeDecomposition(n=n, blocks=tuple(blocks), multiplicity=multiplicity)


def closed_form_purity(n: int) -> float:
    """Stationary bath purity under resonant-only pumping of a hot bath.

    Equals sum_I lambda_I ((2I+1)/2^n)^2: every fixed-total-spin manifold
    keeps its initial population (2I+1)/2^n and ends fully pumped into its
    lowest state. Evaluated in exact integer arithmetic before the final
    float conversion.
    """
    if n < 1:
        raise ValueError(f"need at least one spin, got n={n}")
    numerator = 0
    for two_i in _two_spin_values(n):
        numerator += dicke_multiplicity(n, two_i / 2) * (two_i + 1) ** 2
    return float(Fraction(numerator, 4**n))
