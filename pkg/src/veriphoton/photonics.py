"""Phase-randomized pulse sampling, photon counting, and concentration bounds.

Polarization angles live on the quarter-turn lattice and are stored as
integers 0..3 (value k means k*pi/2 radians); they are never represented as
floats.  Phase randomization makes every pulse diagonal in the Fock basis, so
photon counts are sampled classically from a Poisson law with mean alpha^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ANGLE_COUNT = 4

# P(n > 32) < 1e-35 for alpha <= 1, far below every tolerance in the suite.
POISSON_TRUNCATION = 32


def validate_pulse_params(m: int, alpha: float) -> None:
    if m < 8:
        raise ValueError(f"need at least 8 pulses per repetition, got m = {m}")
    lo = (8.0 / m) ** 0.25
    if not lo <= alpha <= 1.0:
        raise ValueError(f"alpha must satisfy (8/m)^(1/4) = {lo:.6f} <= alpha <= 1, got {alpha}")


@dataclass(frozen=True)
class Pulse:
    angle: int
    photon_count: int

    def __post_init__(self):
        if self.angle not in range(ANGLE_COUNT):
            raise ValueError(f"angle must be one of 0..3, got {self.angle}")
        if not 0 <= self.photon_count <= POISSON_TRUNCATION:
            raise ValueError(f"photon count {self.photon_count} outside [0, {POISSON_TRUNCATION}]")


@dataclass(frozen=True)
class PulseBatch:
    """One repetition's worth of pulses, stored as integer arrays."""

    angles: np.ndarray
    counts: np.ndarray
    alpha: float
    rep_index: int = 0

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        angles.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "counts", counts)
        if angles.shape != counts.shape or angles.ndim != 1:
            raise ValueError("angles and counts must be 1-d arrays of equal length")
        validate_pulse_params(len(angles), self.alpha)
        if angles.min(initial=0) < 0 or angles.max(initial=0) >= ANGLE_COUNT:
            raise ValueError("angles must lie in 0..3")
        if counts.min(initial=0) < 0:
            raise ValueError("photon counts must be non-negative")

    @property
    def m(self) -> int:
        return len(self.angles)

    @property
    def pulses(self) -> tuple[Pulse, ...]:
        return tuple(Pulse(int(a), int(n)) for a, n in zip(self.angles, self.counts))


@dataclass(frozen=True)
class PhotonStats:
    m0: int
    m1: int


@dataclass(frozen=True)
class QndReport:
    """Honest photon-number readout: true counts plus the kept single photons."""

    counts: tuple[int, ...]
    stats: PhotonStats
    survivor_angles: tuple[int, ...]
    survivor_indices: tuple[int, ...]


def sample_batch(m: int, alpha: float, rng: np.random.Generator, rep_index: int = 0) -> PulseBatch:
    """Draw m pulses: uniform quarter-turn angles, Poisson(alpha^2) photon counts."""
    validate_pulse_params(m, alpha)
    angles = rng.integers(0, ANGLE_COUNT, m)
    counts = np.minimum(rng.poisson(alpha * alpha, m), POISSON_TRUNCATION)
    return PulseBatch(angles, counts, alpha, rep_index)


def qnd_report(batch: PulseBatch) -> QndReport:
    """Honest report: the sampled counts, with every n >= 1 pulse reduced to one photon."""
    counts = batch.counts
    keep = counts >= 1
    m0 = int(np.sum(counts == 0))
    m1 = int(np.sum(counts == 1))
    return QndReport(
        counts=tuple(int(c) for c in counts),
        stats=PhotonStats(m0, m1),
        survivor_angles=tuple(int(a) for a in batch.angles[keep]),
        survivor_indices=tuple(int(i) for i in np.flatnonzero(keep)),
    )


def threshold_value(m: int, alpha: float) -> float:
    """Largest admissible vacuum count: m e^{-alpha^2} (1 + alpha^2/2)."""
    return m * math.exp(-alpha * alpha) * (1.0 + alpha * alpha / 2.0)


def threshold_check(m0: int, m: int, alpha: float) -> bool:
    """True iff the reported vacuum count passes the test."""
    if not 0 <= m0 <= m:
        raise ValueError(f"vacuum count {m0} outside [0, {m}]")
    return m0 <= threshold_value(m, alpha)


def honest_reject_bound(m: int, alpha: float, n_reps: int) -> float:
    """Union bound on the honest prover failing any threshold test:
    n_reps * exp(-m e^{-2 alpha^2} alpha^4 / 2)."""
    validate_pulse_params(m, alpha)
    if n_reps < 1:
        raise ValueError(f"need at least one repetition, got {n_reps}")
    return n_reps * math.exp(-m * math.exp(-2.0 * alpha * alpha) * alpha**4 / 2.0)


def survivor_lower_bound(m: int, alpha: float) -> float:
    """Guaranteed photon count m * alpha^4 / 4 whenever the threshold test passes."""
    validate_pulse_params(m, alpha)
    return m * alpha**4 / 4.0
