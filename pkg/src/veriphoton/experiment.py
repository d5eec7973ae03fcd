"""Experiment orchestration: config resolution, seeded runs, and result emission.

This is the service layer both the CLI and the HTTP app call into.  A run is
fully determined by (config, seed): trial t always draws from a stream seeded
by (seed, t), worker processes only ever sum integer accept counts, and
output numbers are serialized with 12 significant digits, so reruns are
byte-identical at any worker count (VERIPHOTON_THREADS overrides the pool
size, which defaults to the machine parallelism).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import light_protocol as lp
from . import phaserand
from .hamiltonian import InstanceSpec, instance_from_dict, load_instance
from .models import (
    AdversaryModel,
    BoundsResult,
    ExperimentModel,
    PhaseRandRow,
    RunResult,
)
from .photonics import honest_reject_bound, threshold_value
from .qcore import DensityMatrix, StateVector
from .qubit_protocol import (
    exact_pacc_povm,
    prepare_verifier_state,
    sample_secret,
    verdict,
)

THREADS_ENV = "VERIPHOTON_THREADS"


def worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        count = int(env)
        if count < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return count
    return os.cpu_count() or 1


def round12(x: float) -> float:
    """12 significant digits: below every tolerance in the suite, above noise."""
    return float(f"{x:.12g}")


def config_hash(model: ExperimentModel) -> str:
    """Hash of the experiment definition; output paths do not change identity."""
    doc = model.model_dump(mode="json", exclude={"output"})
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _build_adversary(model: AdversaryModel, n_qubits: int) -> lp.AdversarySpec:
    if model.variant == "Honest":
        return lp.Honest()
    if model.variant == "WrongWitness":
        amps = np.array([complex(re, im) for re, im in model.state])
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"adversary state norm {norm} off by more than 1e-9")
        if len(amps) != 2**n_qubits:
            raise ValueError(f"adversary state needs {2**n_qubits} amplitudes, got {len(amps)}")
        return lp.WrongWitness(StateVector(n_qubits, amps / norm))
    if model.variant == "RandomOutcomes":
        return lp.RandomOutcomes()
    if model.variant == "VacuumForge":
        return lp.VacuumForge(model.strategy)
    if model.variant == "FixedStateReplace":
        if model.qubit_state is None:
            return lp.FixedStateReplace(DensityMatrix.maximally_mixed(2))
        mat = np.array([[complex(re, im) for re, im in row] for row in model.qubit_state])
        return lp.FixedStateReplace(DensityMatrix(2, mat))
    if model.variant == "SinglePhotonChannel":
        return lp.SinglePhotonChannel(model.strength)
    raise ValueError(f"unknown adversary variant {model.variant!r}")


@dataclass(frozen=True)
class ExperimentPlan:
    model: ExperimentModel
    instance: InstanceSpec
    adversary: lp.AdversarySpec
    m: int | None
    alpha: float | None
    hash: str


def build_plan(model: ExperimentModel, base_dir: str | Path = ".") -> ExperimentPlan:
    """Resolve the instance, the adversary, and the photonic parameters.

    Every module invariant a config can violate is checked here, before any
    computation starts; RunConfig construction re-validates the combination.
    """
    if isinstance(model.instance, str):
        inst = load_instance(Path(base_dir) / model.instance)
    else:
        inst = instance_from_dict(model.instance.model_dump(exclude_none=True))
    n = inst.hamiltonian.n_qubits
    adversary = _build_adversary(model.adversary, n)
    m, alpha = model.m, model.alpha
    if model.protocol == "p2":
        if m is None or alpha is None:
            f_eff = model.f if model.f is not None else inst.f
            rec_alpha, rec_m = lp.recommended_params(n, f_eff)
            m = m if m is not None else rec_m
            alpha = alpha if alpha is not None else rec_alpha
        # constructing the run config enforces the (m, alpha, N, witness) invariants
        lp.RunConfig(inst, m=m, alpha=alpha, trials=model.trials, seed=model.seed, adversary=adversary)
    else:
        if isinstance(adversary, lp.VacuumForge):
            raise ValueError("VacuumForge only applies to p2")
        if inst.witness is None and isinstance(
            adversary, (lp.Honest, lp.SinglePhotonChannel, lp.FixedStateReplace)
        ):
            raise ValueError("this adversary teleports the instance witness; the instance needs one")
    return ExperimentPlan(model, inst, adversary, m, alpha, config_hash(model))


# ---------------------------------------------------------------------------
# Trial execution (worker-safe chunks)
# ---------------------------------------------------------------------------

def _p1_povm(plan: ExperimentPlan):
    from .qubit_protocol import BellTeleportPovm, random_outcome_povm

    adv = plan.adversary
    if isinstance(adv, lp.Honest):
        return BellTeleportPovm(plan.instance.witness)
    if isinstance(adv, lp.WrongWitness):
        return BellTeleportPovm(adv.state)
    if isinstance(adv, lp.RandomOutcomes):
        return random_outcome_povm(plan.instance.hamiltonian.n_qubits)
    return lp.induced_povm(adv, plan.instance)


def _run_p1_range(plan: ExperimentPlan, start: int, stop: int, max_record: int):
    povm = _p1_povm(plan)
    ham = plan.instance.hamiltonian
    n = ham.n_qubits
    accepts = 0
    records: list[dict] = []
    for t in range(start, stop):
        rng = np.random.default_rng((plan.model.seed, t))
        secret = sample_secret(n, rng)
        psi_v = prepare_verifier_state(secret)
        out = povm.sample(psi_v, rng)
        v = verdict(secret, out, ham, rng)
        if v.accepted:
            accepts += 1
        if t < max_record:
            records.append(
                {
                    "trial": t,
                    "h": list(secret.h),
                    "s": list(secret.s),
                    "w": list(out.w),
                    "z": list(out.z),
                    "pair": list(v.sampled_pair) if v.sampled_pair else None,
                    "branch": v.branch,
                    "accepted": v.accepted,
                }
            )
    return accepts, 0, 0, records


def _round_record(trial: int, tr: lp.RoundTranscript) -> dict:
    reps = []
    for rep in tr.repetitions:
        rec = {
            "j": rep.rep_index,
            "pulses": [
                {"k": k, "angle": int(a), "n": int(c)}
                for k, (a, c) in enumerate(zip(rep.angles, rep.counts))
            ],
            "reported_n": list(rep.reported_counts),
            "m0": rep.actual_m0,
            "m1": rep.actual_m1,
            "reported_m0": rep.reported_m0,
            "threshold_passed": rep.threshold_passed,
        }
        if rep.outcomes is not None:
            rec["i1dc"] = {"o": list(rep.outcomes), "phi": rep.phi, "L": len(rep.outcomes) + 1}
            rec["h"] = rep.h
            rec["s"] = rep.s
        reps.append(rec)
    return {
        "trial": trial,
        "reps": reps,
        "w": list(tr.bell.w) if tr.bell else None,
        "z": list(tr.bell.z) if tr.bell else None,
        "pair": list(tr.verdict.sampled_pair) if tr.verdict.sampled_pair else None,
        "branch": tr.verdict.branch,
        "accepted": tr.verdict.accepted,
    }


def _run_p2_range(plan: ExperimentPlan, start: int, stop: int, max_record: int):
    config = lp.RunConfig(
        plan.instance, m=plan.m, alpha=plan.alpha, trials=plan.model.trials,
        seed=plan.model.seed, adversary=plan.adversary,
    )
    batch = lp.run_trials(config, start, stop, max_record)
    records = [
        _round_record(start + i, tr) for i, tr in enumerate(batch.transcripts)
    ] if start < max_record else []
    return batch.accepts, batch.case_i_rounds, batch.case_ii_accepts, records


def _run_range(args):
    plan, start, stop, max_record = args
    if plan.model.protocol == "p1":
        return _run_p1_range(plan, start, stop, max_record)
    return _run_p2_range(plan, start, stop, max_record)


def execute(plan: ExperimentPlan, workers: int | None = None) -> tuple[RunResult, list[dict]]:
    """Run the experiment; returns the summary record and transcript dicts.

    Aggregation is a sum of integer accept counts and an in-order
    concatenation of transcripts, so the result is independent of the worker
    count.
    """
    trials = plan.model.trials
    max_record = plan.model.output.max_transcripts
    max_record = trials if max_record is None else min(max_record, trials)
    workers = worker_count() if workers is None else workers
    chunk = max(1, math.ceil(trials / workers))
    ranges = [(plan, lo, min(lo + chunk, trials), max_record) for lo in range(0, trials, chunk)]
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_range, ranges))
    else:
        parts = [_run_range(r) for r in ranges]
    accepts = sum(p[0] for p in parts)
    records = [rec for p in parts for rec in p[3]]
    estimate = accepts / trials
    from .qubit_protocol import CI99_Z

    ci = CI99_Z * math.sqrt(estimate * (1 - estimate) / trials)
    stderr = math.sqrt(estimate * (1 - estimate) / trials)
    bound, bound_kind, ok = _bound_for(plan, estimate, stderr)
    result = RunResult(
        config_hash=plan.hash,
        protocol=plan.model.protocol,
        adversary=plan.model.adversary.variant,
        trials=trials,
        accepts=accepts,
        estimate=round12(estimate),
        ci=round12(ci),
        bound=None if bound is None else round12(bound),
        bound_kind=bound_kind,
        bound_check="n/a" if ok is None else ("pass" if ok else "fail"),
    )
    return result, records


def _bound_for(plan: ExperimentPlan, estimate: float, stderr: float):
    inst = plan.instance
    n = inst.hamiltonian.n_qubits
    honest = isinstance(plan.adversary, lp.Honest)
    if plan.model.protocol == "p1":
        if honest:
            bound = 1 - inst.a / 2
            return bound, "completeness-lower", estimate >= bound - 3 * stderr
        if n <= 6:
            b_eff = 2 * (1 - exact_pacc_povm(inst.hamiltonian, _p1_povm(plan)))
            bound = 1 - b_eff / 2
            return bound, "soundness-upper", estimate <= bound + 3 * stderr
        return None, "n/a", None
    per_rep = math.exp(-plan.m * math.exp(-2 * plan.alpha**2) * plan.alpha**4 / 2)
    if honest:
        bound = (1 - per_rep) ** n * (1 - inst.a / 2)
        return bound, "completeness-lower", estimate >= bound - 3 * stderr
    if n <= 6:
        b_eff = lp.effective_energy(plan.adversary, inst)
        bound = 1 - b_eff / 2 + n * per_rep
        return bound, "soundness-upper", estimate <= bound + 3 * stderr
    return None, "n/a", None


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = (
    "config_hash", "protocol", "adversary", "trials", "accepts",
    "estimate", "ci", "bound", "bound_kind", "bound_check",
)


def summary_csv(result: RunResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    row = result.model_dump()
    writer.writerow(["" if row[c] is None else _fmt(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_outputs(result: RunResult, records: list[dict], model: ExperimentModel, fmt: str = "csv") -> dict:
    out = Path(model.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    transcript_path = out / model.output.transcripts
    with open(transcript_path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":")))
            fh.write("\n")
    summary_path = out / model.output.summary
    if fmt == "jsonl":
        summary_path = summary_path.with_suffix(".jsonl") if summary_path.suffix == ".csv" else summary_path
        text = json.dumps(result.model_dump(), sort_keys=True, separators=(",", ":")) + "\n"
    else:
        text = summary_csv(result)
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return {"summary": str(summary_path), "transcripts": str(transcript_path)}


# ---------------------------------------------------------------------------
# Parameter tables (bounds / phaserand subcommands and endpoints)
# ---------------------------------------------------------------------------

def bounds_table(n: int, f: float, m: int | None = None, alpha: float | None = None) -> BoundsResult:
    rec_alpha, rec_m = lp.recommended_params(n, f)
    alpha = rec_alpha if alpha is None else alpha
    m = rec_m if m is None else m
    return BoundsResult(
        n=n,
        f=round12(f),
        alpha=round12(alpha),
        m=m,
        gap_lower_bound=round12(lp.gap_lower_bound(n, f)),
        honest_reject_bound=round12(honest_reject_bound(m, alpha, n)),
        threshold_value=round12(threshold_value(m, alpha)),
    )


def phaserand_table(m: int, n: int, f: float) -> PhaseRandRow:
    r = phaserand.required_R(m, n, f)
    return PhaseRandRow(
        m=m,
        N=n,
        f=round12(f),
        R=r,
        F_series=round12(phaserand.fidelity_series(r, m, n)),
        F_min=round12(phaserand.f_min(m, n, r)),
        shift_bound=round12(phaserand.acceptance_shift_bound(m, n, r)),
    )
