"""Exact simulator of spin-bath cooling by a repeatedly reset central-spin probe.

The package builds the probe-bath Hamiltonians, propagates exact dynamics
with a probe-reset channel, runs the resonant-only / alternating /
interacting cooling schedules with per-cycle records, and cross-checks the
results against a closed-form purity bottleneck and a coarse-grained master
equation.
"""

__version__ = "0.1.0"

from .algebra import (
    BathSpec,
    DickeBlock,
    DickeDecomposition,
    OperatorMatrix,
    closed_form_purity,
    collective_dephasing,
    collective_lowering,
    dicke_decomposition,
    dicke_multiplicity,
    single_spin_operator,
)
from .dynamics import (
    DensityMatrix,
    Propagator,
    BlockedPropagator,
    evolve,
    evolve_blocked,
    manifold_populations,
    partial_trace_probe,
    polarization,
    purity,
    reset_probe,
    state_fidelity_pure,
)
from .errors import (
    ConfigurationError,
    ContractViolationError,
    DegenerateCouplingError,
    IntegrityError,
    ResourceError,
    SpinBathError,
)
from .hamiltonians import (
    HamiltonianKind,
    build_dispersive,
    build_flip_flop,
    build_interacting,
    build_time_dependent,
    integrate_time_dependent,
)
from .lindblad import (
    Dissipator,
    MESegment,
    alternating_segments,
    dispersive_dissipator,
    integrate_me,
    lindblad_rhs,
    resonant_dissipator,
)
from .protocols import (
    Evolve,
    ProtocolSchedule,
    Reset,
    RunRecord,
    RunRow,
    make_adrt,
    make_drt,
    make_interacting,
    run,
)
from .sampling import sample_couplings

__all__ = [name for name in dir() if not name.startswith("_")]
