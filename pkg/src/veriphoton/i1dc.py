"""Interlaced 1D cluster computation over quarter-turn angles.

A chain of L photons |+_sigma_l> = (|0> + i^sigma_l |1>)/sqrt(2) is collapsed
to a single qubit by L-1 rounds of CZ(H (x) I) followed by an X-basis
measurement of the leading photon.  The surviving qubit is |+_phi> with

    phi = sum_{l=1}^{L-1} (-1)^(o_l + ... + o_{L-1}) sigma_l + sigma_L  (mod 4)

All angle arithmetic is exact integer mod-4; floats never represent angles.
X-measurement convention: outcome 0 projects onto |+>, outcome 1 onto |->
(this is the sign convention under which the angle formula holds; the
exhaustive statevector sweep in the test suite pins it).

Two execution paths exist: `run_symbolic` draws uniform outcome bits and
evaluates the angle formula (fast path), `run_statevector` simulates the full
quantum loop and serves as the independent oracle.  Their equivalence is a
verified property, not an assumption.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qcore import StateVector

_SQ2 = np.sqrt(2.0)
_PHASES = np.array([1.0, 1.0j, -1.0, -1.0j])  # i^k for k = 0..3

# phi -> (h, s) with S^h H |s> = |+_phi>
_PHI_TO_HS = {0: (0, 0), 2: (0, 1), 1: (1, 0), 3: (1, 1)}
_HS_TO_PHI = {v: k for k, v in _PHI_TO_HS.items()}


def plus_state(angle: int) -> StateVector:
    """Single-qubit |+_theta> with theta = angle * pi/2."""
    if angle not in range(4):
        raise ValueError(f"angle must be one of 0..3, got {angle}")
    return StateVector(1, np.array([1.0, _PHASES[angle]]) / _SQ2)


def phi_from_outcomes(angles: Sequence[int], outcomes: Sequence[int]) -> int:
    """Propagated angle of the surviving photon, in exact mod-4 arithmetic."""
    angles = [int(a) for a in angles]
    outcomes = [int(o) for o in outcomes]
    le = len(angles)
    if le < 1:
        raise ValueError("need at least one angle")
    if len(outcomes) != le - 1:
        raise ValueError(f"need {le - 1} outcomes for {le} angles, got {len(outcomes)}")
    if any(a not in range(4) for a in angles) or any(o not in (0, 1) for o in outcomes):
        raise ValueError("angles must be 0..3 and outcomes bits")
    phi = angles[-1]
    suffix_parity = 0
    for l in range(le - 2, -1, -1):  # l indexes angle l+1 in 1-based terms
        suffix_parity ^= outcomes[l]
        phi += -angles[l] if suffix_parity else angles[l]
    return phi % 4


@dataclass(frozen=True)
class I1dcTranscript:
    outcomes: tuple[int, ...]
    phi: int
    survivor_count: int

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))
        if self.survivor_count < 2:
            raise ValueError(f"need at least 2 survivors, got {self.survivor_count}")
        if len(self.outcomes) != self.survivor_count - 1:
            raise ValueError("outcome count must be survivor_count - 1")
        if self.phi not in range(4):
            raise ValueError(f"phi must be 0..3, got {self.phi}")


def run_symbolic(angles: Sequence[int], rng: np.random.Generator) -> I1dcTranscript:
    """Fast path: uniform outcome bits plus the angle formula."""
    le = len(angles)
    if le < 2:
        raise ValueError(f"need at least 2 photons, got {le}")
    outcomes = tuple(int(b) for b in rng.integers(0, 2, le - 1))
    return I1dcTranscript(outcomes, phi_from_outcomes(angles, outcomes), le)


@dataclass(frozen=True)
class I1dcBranch:
    outcomes: tuple[int, ...]
    probability: float
    state: StateVector


def _chain_state(angles: Sequence[int]) -> np.ndarray:
    amps = np.array([1.0], dtype=complex)
    for a in angles:
        amps = np.kron(amps, np.array([1.0, _PHASES[a]]) / _SQ2)
    return amps


def _step(amps: np.ndarray) -> tuple[tuple[float, np.ndarray], tuple[float, np.ndarray]]:
    """Apply H to the leading qubit, CZ to the leading pair, then X-measure
    the leading qubit.  Returns ((p0, state0), (p1, state1)) with the measured
    qubit removed; states are normalized (zero-probability branches keep a
    zero vector)."""
    half = amps.shape[0] // 2
    a0, a1 = amps[:half], amps[half:]
    # H on the leading qubit
    b0, b1 = (a0 + a1) / _SQ2, (a0 - a1) / _SQ2
    # CZ on the leading pair: flip the sign where both leading qubits are 1
    b1 = b1.copy()
    b1[half // 2:] = -b1[half // 2:]
    branches = []
    for sign in (1.0, -1.0):
        vec = (b0 + sign * b1) / _SQ2
        p = float(np.sum(np.abs(vec) ** 2))
        branches.append((p, vec / np.sqrt(p) if p > 1e-300 else vec))
    return branches[0], branches[1]


def run_statevector(
    angles: Sequence[int],
    rng: np.random.Generator | None = None,
    exhaustive: bool = False,
) -> list[I1dcBranch] | I1dcBranch:
    """Full statevector execution of the cluster chain (oracle path).

    With `exhaustive=True` every one of the 2^(L-1) measurement branches is
    returned with its exact probability and final single-qubit state; with an
    rng one branch is sampled by the Born rule.
    """
    angles = [int(a) for a in angles]
    le = len(angles)
    if le < 2:
        raise ValueError(f"need at least 2 photons, got {le}")
    if le > 12:
        raise ValueError(f"statevector path supports at most 12 photons, got {le}")
    if exhaustive == (rng is not None):
        raise ValueError("pass exactly one of rng or exhaustive=True")
    init = _chain_state(angles)
    if exhaustive:
        results: list[I1dcBranch] = []
        stack: list[tuple[np.ndarray, tuple[int, ...], float]] = [(init, (), 1.0)]
        while stack:
            amps, outcomes, prob = stack.pop()
            if len(outcomes) == le - 1:
                results.append(I1dcBranch(outcomes, prob, StateVector(1, amps)))
                continue
            (p0, s0), (p1, s1) = _step(amps)
            stack.append((s1, outcomes + (1,), prob * p1))
            stack.append((s0, outcomes + (0,), prob * p0))
        results.sort(key=lambda b: b.outcomes)
        return results
    amps, outcomes = init, ()
    prob = 1.0
    for _ in range(le - 1):
        (p0, s0), (p1, s1) = _step(amps)
        if rng.random() < p0:
            amps, prob = s0, prob * p0
            outcomes = outcomes + (0,)
        else:
            amps, prob = s1, prob * p1
            outcomes = outcomes + (1,)
    return I1dcBranch(outcomes, prob, StateVector(1, amps))


def phi_to_hs(phi: int) -> tuple[int, int]:
    """Decode the surviving angle into the secret bits (h, s) with S^h H |s> = |+_phi>."""
    if phi not in _PHI_TO_HS:
        raise ValueError(f"phi must be 0..3, got {phi}")
    return _PHI_TO_HS[phi]


def hs_to_phi(h: int, s: int) -> int:
    return _HS_TO_PHI[(int(h), int(s))]
