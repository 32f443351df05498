"""Cross-module invariant suite behind the ``validate`` CLI command.

Each check is a named callable returning a detail string on success and
raising AssertionError on failure. The suite covers the fast invariants;
the acceptance-scale ensemble and convergence studies live in the test
suite.
"""

from __future__ import annotations

from math import pi

import numpy as np

from .algebra import (
    BathSpec,
    closed_form_purity,
    collective_dephasing,
    collective_lowering,
    dicke_decomposition,
    dicke_multiplicity,
    single_spin_operator,
)
from .dynamics import (
    BATH,
    DensityMatrix,
    Propagator,
    evolve,
    evolve_blocked,
    manifold_populations,
    partial_trace_probe,
    purity,
    reset_probe,
)
from .hamiltonians import (
    build_dispersive,
    build_flip_flop,
    build_interacting,
    integrate_time_dependent,
)
from .lindblad import Dissipator, dispersive_dissipator, lindblad_rhs, resonant_dissipator
from .protocols import make_adrt, make_drt, run
from .sampling import sample_couplings

__all__ = ["CHECKS", "validate"]


def _random_density(dim: int, rng) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.T.conj()
    return m / np.trace(m).real


def _random_spec(n: int, seed: int) -> BathSpec:
    return sample_couplings(n, omega_larmor=1.0, range_ratio=1e-2, seed=seed)


def _commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a @ b - b @ a)))


def check_multiplicity_sum_rule() -> str:
    for n in range(1, 41):
        total = sum(
            dicke_multiplicity(n, two_i / 2) * (two_i + 1)
            for two_i in range(n % 2, n + 1, 2)
        )
        assert total == 2**n, f"sum rule broken at n={n}: {total}"
    return "sum over manifolds equals 2^n exactly for n <= 40"

def check_decomposition_basis() -> str:
    n = 5
    dd = dicke_decomposition(n)
    full = dd.full_basis()
    gram = full.T @ full
    defect = float(np.max(np.abs(gram - np.eye(2**n))))
    assert defect < 1e-10, f"basis not orthonormal, defect {defect:.2e}"
    i_sq = sum(
        single_spin_operator(kind, k + 1, n).matrix
        @ single_spin_operator(kind, j + 1, n).matrix
        for kind in ("sx", "sy", "sz")
        for k in range(n)
        for j in range(n)
    )
    worst = 0.0
    for block in dd.blocks:
        ev = block.total_spin * (block.total_spin + 1)
        worst = max(worst, float(np.max(np.abs(i_sq @ block.basis - ev * block.basis))))
    assert worst < 1e-10, f"I^2 eigenproperty defect {worst:.2e}"
    return f"n=5 basis orthonormal and I^2-diagonal (defect {worst:.1e})"


def check_closed_form_matches_block_state() -> str:
    for n in range(1, 9):
        dd = dicke_decomposition(n)
        state = np.zeros((2**n, 2**n))
        for block in dd.blocks:
            weight = block.ladder_dim / 2**n
            lowest = block.basis[:, 0]
            state += weight * np.outer(lowest, lowest)
        explicit = float(np.sum(state**2))
        formula = closed_form_purity(n)
        assert abs(explicit - formula) < 1e-12, (
            f"n={n}: explicit {explicit!r} vs formula {formula!r}"
        )
    return "closed form equals explicitly pumped block state for n <= 8"


def check_purity_slope() -> str:
    ns = np.arange(10, 41)
    logs = np.log([closed_form_purity(int(n)) for n in ns])
    slope = np.polyfit(ns, logs, 1)[0]
    assert abs(slope + 2.0 / 3.0) < 0.05, f"slope {slope:.4f} not within 0.05 of -2/3"
    return f"log-purity slope {slope:.4f} (target -2/3 +/- 0.05)"


def check_hamiltonian_hermiticity() -> str:
    spec = _random_spec(3, seed=11)
    chain = BathSpec(
        n=3, omega_larmor=1.0, gx=spec.gx, gz=spec.gz, j=np.array([0.8, 1.2])
    )
    worst = max(
        build_flip_flop(spec).hermiticity_defect(),
        build_dispersive(spec).hermiticity_defect(),
        build_interacting(chain).hermiticity_defect(),
    )
    assert worst <= 1e-12, f"hermiticity defect {worst:.2e}"
    return f"builders Hermitian (defect {worst:.1e})"


def check_magnetization_conservation() -> str:
    spec = _random_spec(3, seed=12)
    n = spec.n
    h = build_flip_flop(spec).matrix
    jz = np.diag(
        np.array([(n + 1 - 2 * bin(i).count("1")) / 2 for i in range(2 ** (n + 1))])
    ).astype(complex)
    norm = _commutator_norm(h, jz)
    assert norm == 0.0, f"[H_res, J_z] = {norm:.2e}, expected exact zero"
    hd = build_dispersive(spec).matrix
    for k in range(1, n + 1):
        izk = np.kron(np.eye(2), single_spin_operator("sz", k, n).matrix)
        assert _commutator_norm(hd, izk) == 0.0
    return "flip-flop conserves J_z and dispersive conserves every I^z_k exactly"


def check_collectivity_split() -> str:
    n = 3
    i_sq = sum(
        single_spin_operator(kind, k + 1, n).matrix
        @ single_spin_operator(kind, j + 1, n).matrix
        for kind in ("sx", "sy", "sz")
        for k in range(n)
        for j in range(n)
    )
    i_sq_full = np.kron(np.eye(2), i_sq)
    equal = BathSpec(n=n, omega_larmor=1.0, gx=np.ones(n), gz=np.zeros(n))
    mixed = BathSpec(n=n, omega_larmor=1.0, gx=np.array([1.0, 2.0, 0.5]), gz=np.zeros(n))
    c_equal = _commutator_norm(build_flip_flop(equal).matrix, i_sq_full)
    c_mixed = _commutator_norm(build_flip_flop(mixed).matrix, i_sq_full)
    assert c_equal < 1e-12, f"equal couplings should conserve I^2, got {c_equal:.2e}"
    assert c_mixed > 1e-3, f"unequal couplings should break I^2, got {c_mixed:.2e}"
    return f"I^2 conserved iff couplings equal ({c_equal:.1e} vs {c_mixed:.2f})"


def check_polarized_state_is_eigenstate() -> str:
    n = 6
    spec = BathSpec(
        n=n,
        omega_larmor=1.0,
        gx=np.ones(n),
        gz=np.zeros(n),
        j=np.array([0.8, 1.0, 1.2, 1.3, 2.1]),
    )
    h = build_interacting(spec).matrix
    all_down = np.zeros(2 ** (n + 1))
    all_down[-1] = 1.0
    residual = float(np.max(np.abs(h @ all_down)))
    assert residual == 0.0, f"all-down state not annihilated, residual {residual:.2e}"
    return "fully polarized probe+bath state is an exact null eigenstate"


def check_propagator_unitarity() -> str:
    spec = _random_spec(4, seed=13)
    prop = Propagator.from_hamiltonian(build_flip_flop(spec), tau=17.3)
    defect = prop.unitarity_defect()
    assert defect <= 1e-10, f"unitarity defect {defect:.2e}"
    return f"propagator unitary (defect {defect:.1e})"


def check_reset_channel() -> str:
    rng = np.random.default_rng(14)
    worst_trace = worst_eig = worst_marginal = 0.0
    for _ in range(100):
        rho = DensityMatrix(_random_density(16, rng), "probe_bath")
        out = reset_probe(rho)
        worst_trace = max(worst_trace, out.trace_defect())
        worst_eig = max(worst_eig, max(0.0, -out.min_eigenvalue()))
        marg = partial_trace_probe(out).matrix - partial_trace_probe(rho).matrix
        worst_marginal = max(worst_marginal, float(np.max(np.abs(marg))))
        again = reset_probe(out)
        assert float(np.max(np.abs(again.matrix - out.matrix))) < 1e-14
    assert worst_trace <= 1e-9, f"trace defect {worst_trace:.2e}"
    assert worst_eig <= 1e-9, f"negative eigenvalue {worst_eig:.2e}"
    assert worst_marginal <= 1e-12, f"bath marginal changed by {worst_marginal:.2e}"
    return "reset is trace preserving, positive, idempotent, marginal-preserving"


def check_blocked_equals_dense() -> str:
    spec = _random_spec(6, seed=15)
    h = build_flip_flop(spec)
    rng = np.random.default_rng(16)
    rho = DensityMatrix(_random_density(h.dim, rng), "probe_bath")
    tau = 3.7 / spec.g_perp
    diff = np.max(
        np.abs(evolve_blocked(rho, h, tau).matrix - evolve(rho, h, tau).matrix)
    )
    assert diff < 1e-10, f"blocked and dense paths differ by {diff:.2e}"
    return f"sector-blocked evolution matches dense (diff {diff:.1e})"


def check_manifold_drift_under_drt() -> str:
    n = 4
    spec = BathSpec(n=n, omega_larmor=1.0, gx=np.ones(n), gz=np.zeros(n))
    record = run(make_drt(spec, cycles=100), spec)
    pops = np.array([row.manifold_populations for row in record.rows])
    drift = float(np.max(np.abs(pops - pops[0])))
    assert drift <= 1e-10, f"manifold populations drifted by {drift:.2e}"
    return f"equal-coupling manifold populations static over 100 cycles ({drift:.1e})"


def check_adrt_mixes_manifolds() -> str:
    spec = _random_spec(4, seed=17)
    record = run(make_adrt(spec, cycles=1, jitter_seed=17), spec)
    delta = float(
        np.max(np.abs(record.rows[1].manifold_populations - record.rows[0].manifold_populations))
    )
    assert delta >= 1e-3, f"one alternation moved populations by only {delta:.2e}"
    return f"one dispersive+resonant pair moves manifold weight ({delta:.2e})"


def check_adrt_equals_drt_for_collective_couplings() -> str:
    n = 4
    spec = BathSpec(n=n, omega_larmor=1.0, gx=np.ones(n), gz=np.ones(n))
    cycles = 120
    drt = run(make_drt(spec, cycles=cycles), spec)
    adrt = run(make_adrt(spec, cycles=cycles, jitter_seed=3), spec)
    gap = abs(drt.final.purity - adrt.final.purity)
    assert gap < 1e-6, f"collective-coupling purities differ by {gap:.2e}"
    return f"equal gx and gz: alternation changes nothing (gap {gap:.1e})"


def check_lindblad_structure() -> str:
    spec = _random_spec(3, seed=18)
    rng = np.random.default_rng(19)
    rho = DensityMatrix(_random_density(8, rng), BATH)
    rhs = lindblad_rhs(
        rho, None, [resonant_dissipator(spec), dispersive_dissipator(spec)]
    )
    trace = abs(complex(np.trace(rhs)))
    herm = float(np.max(np.abs(rhs - rhs.T.conj())))
    assert trace < 1e-12 and herm < 1e-12, f"trace {trace:.2e}, herm {herm:.2e}"
    all_down = np.zeros(8)
    all_down[-1] = 1.0
    dark = lindblad_rhs(
        DensityMatrix.from_pure(all_down, BATH),
        None,
        [resonant_dissipator(spec), dispersive_dissipator(spec)],
    )
    stationary = float(np.max(np.abs(dark)))
    assert stationary < 1e-12, f"polarized state not stationary ({stationary:.2e})"
    return "generator traceless/Hermitian; fully polarized state stationary"


def check_rwa_limit() -> str:
    n = 1
    g = 1e-2
    spec = BathSpec(n=n, omega_larmor=1.0, gx=np.array([g]), gz=np.zeros(1))
    swap_time = pi / (2 * g)
    u = integrate_time_dependent(spec, rabi=1.0, duration=swap_time)
    # |probe down, bath up> is index 2; the resonant swap sends it to index 1.
    start = np.zeros(4, dtype=complex)
    start[2] = 1.0
    fidelity = float(np.abs(u @ start)[1] ** 2)
    assert fidelity >= 0.95, f"swap fidelity {fidelity:.4f} < 0.95"
    return f"pre-RWA integration reproduces the resonant swap (fidelity {fidelity:.4f})"


def check_sampler() -> str:
    a = sample_couplings(6, omega_larmor=2.0, range_ratio=1e-2, seed=5)
    b = sample_couplings(6, omega_larmor=2.0, range_ratio=1e-2, seed=5)
    assert np.array_equal(a.gx, b.gx) and np.array_equal(a.gz, b.gz)
    assert a.is_weakly_coupled(1e-2), "sampled couplings exceed the weak bound"
    big = sample_couplings(4000, omega_larmor=1.0, range_ratio=1e-2, seed=6)
    frac = np.mean(big.gx**2 / (big.gx**2 + big.gz**2))
    assert abs(frac - 0.5) < 0.02, f"angle statistics off: {frac:.4f}"
    return f"sampler deterministic, bounded, isotropic (mean sin^2 = {frac:.3f})"


CHECKS = [
    ("multiplicity-sum-rule", check_multiplicity_sum_rule),
    ("decomposition-basis", check_decomposition_basis),
    ("closed-form-vs-block-state", check_closed_form_matches_block_state),
    ("purity-slope", check_purity_slope),
    ("hamiltonian-hermiticity", check_hamiltonian_hermiticity),
    ("magnetization-conservation", check_magnetization_conservation),
    ("collectivity-split", check_collectivity_split),
    ("polarized-eigenstate", check_polarized_state_is_eigenstate),
    ("propagator-unitarity", check_propagator_unitarity),
    ("reset-channel", check_reset_channel),
    ("blocked-vs-dense", check_blocked_equals_dense),
    ("drt-manifold-drift", check_manifold_drift_under_drt),
    ("adrt-manifold-mixing", check_adrt_mixes_manifolds),
    ("adrt-drt-collective-equality", check_adrt_equals_drt_for_collective_couplings),
    ("lindblad-structure", check_lindblad_structure),
    ("rwa-limit", check_rwa_limit),
    ("coupling-sampler", check_sampler),
]


def validate(printer=print) -> bool:
    """Run every invariant check, print one line each, return overall pass."""
    all_ok = True
    for name, check in CHECKS:
        try:
            detail = check()
            printer(f"PASS  {name:34s} {detail}")
        except AssertionError as err:
            all_ok = False
            printer(f"FAIL  {name:34s} {err}")
        except Exception as err:  # pragma: no cover - defensive
            all_ok = False
            printer(f"ERROR {name:34s} {type(err).__name__}: {err}")
    return all_ok
