"""Coarse-grained master equation on the bath with collective jump operators.

This engine cross-checks the exact channel model: resonant segments damp the
bath through the coupling-weighted collective lowering operator at its
asymptotic rate g_perp, dispersive segments dephase it through the weighted
z operator at rate g_par. Only these asymptotic (time-independent) rates are
implemented; the fully polarized all-down state is stationary under both.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import (
    BathSpec,
    OperatorMatrix,
    collective_dephasing,
    collective_lowering,
    dicke_decomposition,
)
from .dynamics import BATH, DensityMatrix, ManifoldProjectors, polarization, purity
from .errors import ConfigurationError, IntegrityError
from .protocols import RunRecord, RunRow

__all__ = [
    "Dissipator",
    "MESegment",
    "resonant_dissipator",
    "dispersive_dissipator",
    "alternating_segments",
    "lindblad_rhs",
    "integrate_me",
]

POSITIVITY_BREACH = -1e-6


@dataclass(frozen=True)
class Dissipator:
    """A jump operator on the bath with its nonnegative rate."""

    op: OperatorMatrix
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"dissipator rate must be nonnegative, got {self.rate}")


@dataclass(frozen=True)
class MESegment:
    """A stretch of master-equation evolution with fixed dissipators."""

    dissipators: tuple[Dissipator, ...]
    duration: float
    hamiltonian: Optional[OperatorMatrix] = None

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"segment duration must be positive, got {self.duration}")
        object.__setattr__(self, "dissipators", tuple(self.dissipators))


def resonant_dissipator(spec: BathSpec) -> Dissipator:
    """Collective weighted lowering at its asymptotic rate g_perp."""
    op, g_perp = collective_lowering(spec.gx)
    return Dissipator(op=op, rate=g_perp)


def dispersive_dissipator(spec: BathSpec) -> Dissipator:
    """Collective weighted dephasing at its asymptotic rate g_par."""
    op, g_par = collective_dephasing(spec.gz)
    return Dissipator(op=op, rate=g_par)


def alternating_segments(
    spec: BathSpec,
    pairs: int,
    res_duration: Optional[float] = None,
    disp_duration: Optional[float] = None,
) -> list[MESegment]:
    """Alternate damping-dominated and dephasing-dominated stretches.

    Default durations give each segment several relaxation times of its own
    dissipator (6 / rate).
    """
    res = resonant_dissipator(spec)
    disp = dispersive_dissipator(spec)
    t_res = 6.0 / res.rate if res_duration is None else res_duration
    t_disp = 6.0 / disp.rate if disp_duration is None else disp_duration
    segments: list[MESegment] = []
    for _ in range(pairs):
        segments.append(MESegment((res,), t_res))
        segments.append(MESegment((disp,), t_disp))
    return segments


def lindblad_rhs(
    rho: DensityMatrix,
    hamiltonian: Optional[OperatorMatrix],
    dissipators: Sequence[Dissipator],
) -> np.ndarray:
    """Generator of the master equation in diagonal (GKLS) form.

    Returns  -i[H, rho] + sum_k rate_k (L rho L+ - {L+L, rho}/2)  as a plain
    array. The result is traceless and Hermitian up to roundoff.
    """
    m = rho.matrix
    out = np.zeros_like(m)
    if hamiltonian is not None:
        if hamiltonian.dim != rho.dim:
            raise ValueError(
                f"dimension mismatch: state {rho.dim}, hamiltonian {hamiltonian.dim}"
            )
        hm = hamiltonian.matrix
        out = -1j * (hm @ m - m @ hm)
    for d in dissipators:
        if d.op.dim != rho.dim:
            raise ValueError(
                f"dimension mismatch: state {rho.dim}, jump operator {d.op.dim}"
            )
        if d.rate == 0.0:
            continue
        l = d.op.matrix
        ldl = l.T.conj() @ l
        out = out + d.rate * (
            l @ m @ l.T.conj() - 0.5 * (ldl @ m + m @ ldl)
        )
    return out


def _rk4_step(m: np.ndarray, h, dissipators, dt: float) -> np.ndarray:
    def rhs(x):
        return lindblad_rhs(DensityMatrix(x, BATH), h, dissipators)

    k1 = rhs(m)
    k2 = rhs(m + 0.5 * dt * k1)
    k3 = rhs(m + 0.5 * dt * k2)
    k4 = rhs(m + dt * k3)
    return m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_me(
    rho0: DensityMatrix,
    segments: Sequence[MESegment],
    dt: Optional[float] = None,
    positivity_check_stride: int = 50,
) -> RunRecord:
    """Fixed-step fourth-order integration across dissipator segments.

    The default step is 0.01 over the largest rate in the schedule. Each
    segment start verifies ||rhs|| * dt < 0.1 (configuration error
    otherwise); positivity of the evolving state is monitored every
    ``positivity_check_stride`` steps and a breach below -1e-6 aborts with
    an integrity error. One observable row is recorded per segment.
    """
    if rho0.space != BATH:
        raise ValueError("the master equation acts on bath-only states")
    if not segments:
        raise ConfigurationError("need at least one master-equation segment")
    max_rate = max((d.rate for s in segments for d in s.dissipators), default=0.0)
    if dt is None:
        if max_rate == 0.0:
            raise ConfigurationError("cannot infer a step size from all-zero rates")
        dt = 0.01 / max_rate

    dd = dicke_decomposition(rho0.n_bath)
    projectors = ManifoldProjectors(dd)
    rows: list[RunRow] = []
    elapsed = 0.0

    def record(index: int, m: np.ndarray) -> None:
        state = DensityMatrix(m, BATH)
        rows.append(
            RunRow(
                cycle=index,
                elapsed=elapsed,
                purity=purity(state),
                polarization=polarization(state),
                manifold_populations=projectors.populations(m),
                probe_reset_count=0,
            )
        )

    metadata = {
        "engine": "lindblad-rk4",
        "dt": dt,
        "segments": len(segments),
        "seed": None,
    }
    m = rho0.matrix.copy()
    record(0, m)
    for index, seg in enumerate(segments, start=1):
        rhs0 = lindblad_rhs(DensityMatrix(m, BATH), seg.hamiltonian, seg.dissipators)
        if float(np.linalg.norm(rhs0)) * dt >= 0.1:
            raise ConfigurationError(
                f"step size {dt:g} too coarse for segment {index} "
                f"(||rhs||*dt = {float(np.linalg.norm(rhs0)) * dt:.3f})"
            )
        steps = max(1, int(np.ceil(seg.duration / dt)))
        h = seg.duration / steps
        for step in range(steps):
            m = _rk4_step(m, seg.hamiltonian, seg.dissipators, h)
            if (step + 1) % positivity_check_stride == 0:
                _check_positivity(m, index, rows, dd, metadata)
        _check_positivity(m, index, rows, dd, metadata)
        elapsed += seg.duration
        record(index, m)

    return RunRecord(
        rows=rows, spin_values=dd.spin_values, metadata=metadata, valid=True
    )


def _check_positivity(m, segment_index, rows, dd, metadata) -> None:
    min_eig = float(np.linalg.eigvalsh(m)[0])
    trace = complex(np.trace(m))
    if min_eig < POSITIVITY_BREACH or abs(trace.real - 1.0) + abs(trace.imag) > 1e-8:
        partial = RunRecord(
            rows=rows, spin_values=dd.spin_values, metadata=metadata, valid=False
        )
        raise IntegrityError(
            f"state integrity breached in segment {segment_index}: "
            f"min eigenvalue {min_eig:.3e}, trace {trace:.12g}",
            partial_record=partial,
        )
