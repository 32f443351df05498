"""Cooling schedules: repeated reset + evolution cycles, with per-cycle records.

A schedule is one cycle's segment list plus a repeat count. The three
built-in schedules are

* resonant-only transfer: ``[Reset, Evolve(flip_flop, tau_res)]``
* alternating dispersive-resonant transfer:
  ``[Reset, Evolve(dispersive, tau_disp), Reset, Evolve(flip_flop, tau_res)]``
* interacting-bath transfer: ``[Reset, Evolve(interacting, tau_res)]``

Runs are deterministic functions of (schedule, spec, initial state): any
dispersive-duration jitter is drawn from the seed stored on the schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi
from typing import Optional, Union

import numpy as np

from . import __version__ as _version
from .algebra import BathSpec, dicke_decomposition
from .dynamics import (
    PROBE_BATH,
    BlockedPropagator,
    DensityMatrix,
    ManifoldProjectors,
    partial_trace_probe,
    polarization,
    purity,
    reset_probe,
)
from .errors import ConfigurationError, IntegrityError
from .hamiltonians import (
    HamiltonianKind,
    build_dispersive,
    build_flip_flop,
    build_interacting,
)

__all__ = [
    "Reset",
    "Evolve",
    "Segment",
    "ProtocolSchedule",
    "RunRow",
    "RunRecord",
    "make_drt",
    "make_adrt",
    "make_interacting",
    "run",
    "DEFAULT_DISPERSIVE_PERIODS",
]

# Dispersive segments default to this many base periods 2*pi/g_par. A single
# period leaves the per-spin phase spread too small to mix manifolds at a
# useful rate for n >= 8 (tens of thousands of cycles to saturate); five
# periods saturate the same runs within about a thousand cycles.
DEFAULT_DISPERSIVE_PERIODS = 5.0

CHEAP_TRACE_TOL = 1e-9
CHEAP_POSITIVITY_FLOOR = -1e-9


@dataclass(frozen=True)
class Reset:
    """Probe reset segment (optical pumping, instantaneous)."""

    fidelity: float = 1.0


@dataclass(frozen=True)
class Evolve:
    """Unitary evolution segment under one of the schedulable generators.

    ``jitter`` draws the actual duration uniformly from
    ``tau * (1 +/- jitter)`` each cycle, seeded by the schedule.
    """

    kind: HamiltonianKind
    tau: float
    jitter: float = 0.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"segment duration must be positive, got {self.tau}")
        if not 0.0 <= self.jitter < 1.0:
            raise ValueError(f"jitter fraction must lie in [0, 1), got {self.jitter}")
        if self.kind is HamiltonianKind.TIME_DEPENDENT_RWA:
            raise ConfigurationError(
                "the pre-RWA generator is a validation object, not schedulable"
            )
        if self.jitter > 0.0 and self.kind is not HamiltonianKind.DISPERSIVE:
            raise ConfigurationError(
                "duration jitter is only supported on dispersive segments"
            )


Segment = Union[Reset, Evolve]


@dataclass(frozen=True)
class ProtocolSchedule:
    """One cycle's ordered segments, repeated ``cycles`` times."""

    segments: tuple[Segment, ...]
    cycles: int
    jitter_seed: int = 0
    label: str = "custom"

    def __post_init__(self):
        if self.cycles < 0:
            raise ValueError(f"cycle count must be nonnegative, got {self.cycles}")
        if not any(isinstance(s, Reset) for s in self.segments):
            raise ValueError("every cycle needs at least one reset segment")
        if not any(isinstance(s, Evolve) for s in self.segments):
            raise ValueError("every cycle needs at least one evolution segment")
        object.__setattr__(self, "segments", tuple(self.segments))

    def summary(self) -> dict:
        parts = []
        for s in self.segments:
            if isinstance(s, Reset):
                parts.append({"reset": s.fidelity})
            else:
                parts.append(
                    {"evolve": s.kind.value, "tau": s.tau, "jitter": s.jitter}
                )
        return {
            "label": self.label,
            "cycles": self.cycles,
            "jitter_seed": self.jitter_seed,
            "segments": parts,
        }


@dataclass(frozen=True)
class RunRow:
    cycle: int
    elapsed: float
    purity: float
    polarization: float
    manifold_populations: np.ndarray
    probe_reset_count: int


@dataclass
class RunRecord:
    """Per-cycle observable rows plus reproducibility metadata."""

    rows: list[RunRow]
    spin_values: tuple[float, ...]
    metadata: dict
    valid: bool = True
    converged: bool = False

    @property
    def final(self) -> RunRow:
        return self.rows[-1]

    def purities(self) -> np.ndarray:
        return np.array([r.purity for r in self.rows])

    def polarizations(self) -> np.ndarray:
        return np.array([r.polarization for r in self.rows])


def default_tau_res(spec: BathSpec) -> float:
    """Full swap time of the brightest collective transition, pi/(2 g_perp)."""
    g_perp = spec.g_perp
    if g_perp == 0.0:
        raise ConfigurationError("cannot pick a resonant duration with g_perp = 0")
    return pi / (2 * g_perp)


def default_tau_disp(spec: BathSpec, fallback: float) -> float:
    """Dispersive duration spreading per-spin phases over several turns."""
    g_par = spec.g_par
    if g_par == 0.0:
        # Zero longitudinal coupling: the dispersive generator vanishes and
        # the duration is physically irrelevant.
        return fallback
    return DEFAULT_DISPERSIVE_PERIODS * 2 * pi / g_par


def make_drt(spec: BathSpec, tau_res: Optional[float] = None, cycles: int = 100) -> ProtocolSchedule:
    """Resonant-only transfer: reset then flip-flop exchange, each cycle."""
    tau = default_tau_res(spec) if tau_res is None else tau_res
    return ProtocolSchedule(
        segments=(Reset(), Evolve(HamiltonianKind.FLIP_FLOP, tau)),
        cycles=cycles,
        label="drt",
    )


def make_adrt(
    spec: BathSpec,
    tau_res: Optional[float] = None,
    tau_disp: Optional[float] = None,
    cycles: int = 100,
    jitter: float = 0.2,
    jitter_seed: int = 0,
) -> ProtocolSchedule:
    """Alternating dispersive and resonant transfer.

    Each cycle dephases the bath in the coupling-weighted z-basis, then
    performs the resonant exchange, with a reset before each evolution. The
    dispersive duration is jittered (uniform, +/- ``jitter``) to avoid
    accidental phase revivals.
    """
    tau_r = default_tau_res(spec) if tau_res is None else tau_res
    tau_d = default_tau_disp(spec, fallback=tau_r) if tau_disp is None else tau_disp
    return ProtocolSchedule(
        segments=(
            Reset(),
            Evolve(HamiltonianKind.DISPERSIVE, tau_d, jitter=jitter),
            Reset(),
            Evolve(HamiltonianKind.FLIP_FLOP, tau_r),
        ),
        cycles=cycles,
        jitter_seed=jitter_seed,
        label="adrt",
    )


def make_interacting(
    spec: BathSpec, tau_res: Optional[float] = None, cycles: int = 100
) -> ProtocolSchedule:
    """Resonant transfer with intra-bath hopping active during evolution."""
    if spec.j is None:
        raise ConfigurationError("interacting schedule needs chain couplings j")
    tau = default_tau_res(spec) if tau_res is None else tau_res
    return ProtocolSchedule(
        segments=(Reset(), Evolve(HamiltonianKind.INTERACTING, tau)),
        cycles=cycles,
        label="interacting",
    )


class _DiagonalPhases:
    """Evolution under a product-basis-diagonal generator, applied as phases."""

    def __init__(self, diagonal: np.ndarray):
        self.diagonal = diagonal

    def apply(self, rho: DensityMatrix, tau: float) -> DensityMatrix:
        ph = np.exp(-1j * self.diagonal * tau)
        return DensityMatrix(ph[:, None] * rho.matrix * ph.conj()[None, :], rho.space)


def _cheap_integrity_check(rho: DensityMatrix, cycle: int) -> None:
    m = rho.matrix
    trace = complex(np.trace(m))
    if abs(trace.real - 1.0) + abs(trace.imag) > CHEAP_TRACE_TOL:
        raise IntegrityError(f"trace drifted to {trace:.12g} at cycle {cycle}")
    diag_min = float(np.min(m.diagonal().real))
    if diag_min < CHEAP_POSITIVITY_FLOOR:
        raise IntegrityError(f"negative population {diag_min:.3e} at cycle {cycle}")


def run(
    schedule: ProtocolSchedule,
    spec: BathSpec,
    initial: Optional[DensityMatrix] = None,
    converge_tol: Optional[float] = None,
    converge_window: int = 10,
) -> RunRecord:
    """Execute the schedule, recording bath observables after every cycle.

    The record always carries a cycle-0 row with the initial observables.
    With ``converge_tol`` set, the run stops once the bath purity changed by
    less than the tolerance over ``converge_window`` consecutive cycles;
    ``schedule.cycles`` then acts as the cap.

    Raises IntegrityError (with the partial record attached, flagged
    invalid) if a numerical invariant breaks mid-run.
    """
    if initial is None:
        initial = DensityMatrix.initial_state(spec.n)
    if initial.space != PROBE_BATH or initial.n_bath != spec.n:
        raise ValueError("initial state must live on the probe+bath space of the spec")

    builders = {
        HamiltonianKind.FLIP_FLOP: build_flip_flop,
        HamiltonianKind.INTERACTING: build_interacting,
        HamiltonianKind.DISPERSIVE: build_dispersive,
    }
    propagators: dict[tuple, object] = {}
    for seg in schedule.segments:
        if not isinstance(seg, Evolve):
            continue
        key = (seg.kind, seg.tau)
        if key in propagators:
            continue
        h = builders[seg.kind](spec)
        if seg.kind is HamiltonianKind.DISPERSIVE:
            propagators[key] = _DiagonalPhases(h.matrix.diagonal().real)
        else:
            propagators[key] = BlockedPropagator(h, seg.tau)

    dd = dicke_decomposition(spec.n)
    projectors = ManifoldProjectors(dd)
    rng = np.random.default_rng(schedule.jitter_seed)

    rho = initial
    elapsed = 0.0
    resets = 0
    rows: list[RunRow] = []

    def record(cycle: int) -> None:
        bath = partial_trace_probe(rho)
        rows.append(
            RunRow(
                cycle=cycle,
                elapsed=elapsed,
                purity=purity(bath),
                polarization=polarization(bath),
                manifold_populations=projectors.populations(bath.matrix),
                probe_reset_count=resets,
            )
        )

    metadata = {
        "spec": {
            "n": spec.n,
            "omega_larmor": spec.omega_larmor,
            "gx": spec.gx.tolist(),
            "gz": spec.gz.tolist(),
            "j": None if spec.j is None else spec.j.tolist(),
        },
        "schedule": schedule.summary(),
        "seed": schedule.jitter_seed,
        "version": f"spinbath {_version}",
    }
    record(0)
    converged = False
    try:
        for cycle in range(1, schedule.cycles + 1):
            for seg in schedule.segments:
                if isinstance(seg, Reset):
                    rho = reset_probe(rho, fidelity=seg.fidelity)
                    resets += 1
                    continue
                tau = seg.tau
                if seg.jitter > 0.0:
                    tau *= 1.0 + seg.jitter * (2.0 * rng.random() - 1.0)
                prop = propagators[(seg.kind, seg.tau)]
                if isinstance(prop, _DiagonalPhases):
                    rho = prop.apply(rho, tau)
                else:
                    rho = prop.apply(rho)
                elapsed += tau
            _cheap_integrity_check(rho, cycle)
            record(cycle)
            if (
                converge_tol is not None
                and cycle >= converge_window
                and abs(rows[-1].purity - rows[-1 - converge_window].purity)
                < converge_tol
            ):
                converged = True
                break
    except IntegrityError as err:
        partial = RunRecord(
            rows=rows, spin_values=dd.spin_values, metadata=metadata, valid=False
        )
        raise IntegrityError(str(err), partial_record=partial) from err

    return RunRecord(
        rows=rows,
        spin_values=dd.spin_values,
        metadata=metadata,
        valid=True,
        converged=converged,
    )
