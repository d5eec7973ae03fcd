"""Simulator and numerical library for a coherent-light verification protocol.

The verifier sends only phase-randomized coherent pulses; the package
simulates the full verifier/prover exchange, computes exact and empirical
acceptance probabilities against honest and malicious provers, and checks the
analytic completeness, soundness, and phase-discretization bounds at desk
scale.
"""

__version__ = "0.1.0"

from .hamiltonian import InstanceSpec, LocalHamiltonian, synth_instance
from .light_protocol import (
    EstimateResult,
    FixedStateReplace,
    Honest,
    RandomOutcomes,
    RunConfig,
    SinglePhotonChannel,
    VacuumForge,
    WrongWitness,
    estimate_pacc,
    gap_lower_bound,
    recommended_params,
    run_round,
)
from .qcore import DensityMatrix, GateSpec, StateVector

__all__ = [
    "__version__",
    "DensityMatrix",
    "EstimateResult",
    "FixedStateReplace",
    "GateSpec",
    "Honest",
    "InstanceSpec",
    "LocalHamiltonian",
    "RandomOutcomes",
    "RunConfig",
    "SinglePhotonChannel",
    "StateVector",
    "VacuumForge",
    "WrongWitness",
    "estimate_pacc",
    "gap_lower_bound",
    "recommended_params",
    "run_round",
    "synth_instance",
]
