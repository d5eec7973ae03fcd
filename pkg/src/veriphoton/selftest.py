"""Built-in oracle-equivalence suites behind the `selftest` subcommand/endpoint.

Each check re-derives a result along two independent routes (closed form vs
enumeration, fast path vs statevector, simulation vs bound) with fixed seeds,
so a single silent sign flip anywhere in the pipeline turns at least one check
red.  Returns the first failing property by name.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import hamiltonian as hml
from . import i1dc
from . import light_protocol as lp
from . import phaserand
from . import photonics
from . import qcore
from . import qubit_protocol as qp
from .models import SelftestCheck, SelftestResult


def _check_bell_completeness() -> str:
    rng = np.random.default_rng(101)
    for _ in range(20):
        psi = qcore.random_state(2, rng)
        povm = qp.BellTeleportPovm(qcore.random_state(2, rng))
        probs = qp.outcome_distribution(povm, psi)
        if abs(probs.sum() - 1.0) > 1e-10:
            return f"outcome probabilities sum to {probs.sum()}"
    return ""


def _check_fidelity_bounds() -> str:
    rng = np.random.default_rng(102)
    for dim in (2, 4, 8):
        rho = qcore.random_density_matrix(dim, rng)
        sigma = qcore.random_density_matrix(dim, rng)
        f1 = qcore.matrix_fidelity(rho, sigma)
        f2 = qcore.matrix_fidelity(sigma, rho)
        if not 0 <= f1 <= 1 or abs(f1 - f2) > 1e-9:
            return f"fidelity {f1} vs swapped {f2} at dim {dim}"
    return ""


def _check_dense_vs_kron() -> str:
    for seed in (0, 1):
        inst = hml.synth_instance(3, seed, 0.2)
        ham = inst.hamiltonian
        n = ham.n_qubits
        ref = np.zeros((2**n, 2**n), dtype=complex)
        eye = np.eye(2**n)
        for t in ham.terms:
            xx = _two_site(n, t.i, t.j, qcore.GATE_MATRICES["X"])
            yy = _two_site(n, t.i, t.j, qcore.GATE_MATRICES["Y"])
            ref += t.p / 2 * ((eye + t.c * xx) / 2 + (eye + t.c * yy) / 2)
        if np.max(np.abs(ref - hml.dense_matrix(ham))) > 1e-12:
            return f"dense matrix deviates from the kron build at seed {seed}"
    return ""


def _two_site(n: int, i: int, j: int, single: np.ndarray) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for k in range(n):
        out = np.kron(out, single if k in (i, j) else np.eye(2))
    return out


def _check_spectrum_window() -> str:
    for seed in range(5):
        inst = hml.synth_instance(3, seed, 0.3)
        evals, _ = hml.spectrum(inst.hamiltonian)
        if evals[0] < -1e-10 or evals[-1] > 1 + 1e-10:
            return f"eigenvalues [{evals[0]}, {evals[-1]}] escape [0, 1] at seed {seed}"
    return ""


def _check_brute_vs_closed_form() -> str:
    for seed in (3, 4, 5):
        inst = hml.synth_instance(2, seed, 0.3)
        brute = qp.brute_force_pacc(inst, qp.BellTeleportPovm(inst.witness))
        closed = qp.exact_pacc_honest(inst)
        if abs(brute - closed) > 1e-9:
            return f"brute {brute} vs closed form {closed} at seed {seed}"
    return ""


def _check_brute_vs_povm_calculator() -> str:
    inst = hml.synth_instance(2, 9, 0.3)
    for povm in (qp.random_outcome_povm(2), qp.ProductMeasurePovm(2, "Z"),
                 qp.BellTeleportPovm(inst.witness)):
        brute = qp.brute_force_pacc(inst, povm)
        calc = qp.exact_pacc_povm(inst.hamiltonian, povm)
        if abs(brute - calc) > 1e-9:
            return f"brute {brute} vs calculator {calc} for {type(povm).__name__}"
    return ""


def _check_ground_witness_saturation() -> str:
    inst = hml.synth_instance(3, 12, 0.4)
    e0, ground = hml.ground_energy(inst.hamiltonian)
    pacc = qp.exact_pacc_povm(inst.hamiltonian, qp.BellTeleportPovm(ground))
    if abs(pacc - (1 - e0 / 2)) > 1e-9:
        return f"ground POVM gives {pacc}, supremum is {1 - e0 / 2}"
    return ""


def _check_i1dc_formula() -> str:
    for le in (2, 3):
        for angles in itertools.product(range(4), repeat=le):
            for branch in i1dc.run_statevector(angles, exhaustive=True):
                phi = i1dc.phi_from_outcomes(angles, branch.outcomes)
                target = i1dc.plus_state(phi)
                fid = abs(np.vdot(target.amplitudes, branch.state.amplitudes)) ** 2
                if abs(fid - 1.0) > 1e-10:
                    return f"angles {angles} outcomes {branch.outcomes}: formula phi {phi} mismatches"
    return ""


def _check_i1dc_uniform_branches() -> str:
    for le in (2, 3, 4):
        for angles in ((0,) * le, tuple(range(le)), (3,) * le):
            angles = tuple(a % 4 for a in angles)
            for branch in i1dc.run_statevector(angles, exhaustive=True):
                if abs(branch.probability - 2.0 ** -(le - 1)) > 1e-12:
                    return f"branch probability {branch.probability} at L={le}"
    return ""


def _check_threshold_and_floor() -> str:
    rng = np.random.default_rng(105)
    m, alpha = 75, 1.0
    failures = 0
    rounds = 3000
    for _ in range(rounds):
        batch = photonics.sample_batch(m, alpha, rng)
        rep = photonics.qnd_report(batch)
        if photonics.threshold_check(rep.stats.m0, m, alpha):
            if m - rep.stats.m0 < photonics.survivor_lower_bound(m, alpha):
                return f"survivor floor broken with m0 = {rep.stats.m0}"
        else:
            failures += 1
    bound = photonics.honest_reject_bound(m, alpha, 1)
    limit = bound + 3 * math.sqrt(bound * (1 - bound) / rounds)
    if failures / rounds > limit:
        return f"threshold failures {failures}/{rounds} exceed {limit}"
    return ""


def _check_phaserand_series() -> str:
    for r in (2, 9, 16):
        series = phaserand.single_pulse_fidelity_series(r)
        oracle = phaserand.fock_oracle_fidelity(r)
        if abs(series - oracle) > 1e-6:
            return f"series {series} vs Fock oracle {oracle} at R={r}"
    return ""


def _check_floor_below_series() -> str:
    for r in (9, 12, 16):
        series = phaserand.fidelity_series(r, 75, 2)
        floor = phaserand.f_min(75, 2, r)
        if series < floor - 1e-9:
            return f"series {series} below floor {floor} at R={r}"
    return ""


def _check_honest_completeness() -> str:
    ham = hml.LocalHamiltonian(2, ((0, 1, 1.0, 1),))
    _, ground = hml.ground_energy(ham)
    inst = hml.InstanceSpec(ham, a=0.0, b=0.1, f=10.0, witness=ground)
    config = lp.RunConfig(inst, m=75, alpha=1.0, trials=1500, seed=2024)
    res = lp.estimate_pacc(config)
    if not res.bound_ok:
        return f"honest estimate {res.estimate} below bound {res.bound}"
    return ""


def _check_replacement_reduction() -> str:
    ham = hml.LocalHamiltonian(2, ((0, 1, 1.0, 1),))
    _, ground = hml.ground_energy(ham)
    inst = hml.InstanceSpec(ham, a=0.0, b=0.1, f=10.0, witness=ground)
    adv = lp.FixedStateReplace(qcore.DensityMatrix.maximally_mixed(2))
    config = lp.RunConfig(inst, m=75, alpha=1.0, trials=1500, seed=2025, adversary=adv)
    res = lp.estimate_pacc(config)
    predicted = qp.exact_pacc_povm(ham, lp.induced_povm(adv, inst))
    if abs(res.estimate - predicted) > res.ci + 0.02:
        return f"end-to-end {res.estimate} vs induced POVM {predicted} (ci {res.ci})"
    return ""


CHECKS = (
    ("qcore.bell-outcome-completeness", _check_bell_completeness),
    ("qcore.fidelity-bounds", _check_fidelity_bounds),
    ("hamiltonian.dense-matrix-vs-kron", _check_dense_vs_kron),
    ("hamiltonian.spectrum-in-unit-interval", _check_spectrum_window),
    ("qubit-protocol.brute-force-vs-closed-form", _check_brute_vs_closed_form),
    ("qubit-protocol.brute-force-vs-povm-calculator", _check_brute_vs_povm_calculator),
    ("qubit-protocol.ground-witness-saturates-bound", _check_ground_witness_saturation),
    ("i1dc.formula-matches-statevector", _check_i1dc_formula),
    ("i1dc.uniform-branch-probabilities", _check_i1dc_uniform_branches),
    ("photonics.threshold-and-survivor-floor", _check_threshold_and_floor),
    ("phaserand.series-vs-fock-oracle", _check_phaserand_series),
    ("phaserand.floor-below-series", _check_floor_below_series),
    ("light-protocol.honest-completeness", _check_honest_completeness),
    ("light-protocol.replacement-reduction", _check_replacement_reduction),
)


def run_selftest(names: list[str] | None = None) -> SelftestResult:
    selected = [(n, fn) for n, fn in CHECKS if names is None or n in names]
    if names is not None:
        unknown = set(names) - {n for n, _ in CHECKS}
        if unknown:
            raise ValueError(f"unknown selftest checks: {sorted(unknown)}")
    checks = []
    first_failure = None
    for name, fn in selected:
        try:
            detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            detail = f"raised {type(exc).__name__}: {exc}"
        checks.append(SelftestCheck(name=name, passed=not detail, detail=detail))
        if detail and first_failure is None:
            first_failure = name
    return SelftestResult(passed=first_failure is None, first_failure=first_failure, checks=checks)
