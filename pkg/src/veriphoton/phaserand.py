"""Continuous vs R-fold discrete phase randomization of the coherent pulses.

Replacing the continuous phase average by R equally spaced phases changes the
pulse state; the closed-form fidelity between the two (at alpha = 1) is

    F_pulse(R) = { sum_{j=0}^{R-1} sqrt( sum_k [ e^{-1} / (kR+j)! ]^2 ) }^2

and the mN-pulse fidelity is F_pulse^{mN}.  A truncated Fock-basis density
matrix computation serves as the independent oracle (and covers general
alpha).  The closed-form floor F_min = 1 - 2mN (e/(R-1))^{R-1} is valid for
R >= e^2 + 1, and |p_acc - q_acc| <= sqrt(1 - F_min) bounds the acceptance
shift, which drives the R sizing rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import DensityMatrix, matrix_fidelity

MIN_VALID_R = 9  # smallest integer R with R >= e^2 + 1
DEFAULT_FOCK_CUTOFF = 40
FOCK_TAIL_BOUND = 1e-20

_INNER_TERM_CUTOFF = 1e-30


@dataclass(frozen=True)
class PhaseRandConfig:
    R: int
    alpha: float = 1.0
    fock_cutoff: int = DEFAULT_FOCK_CUTOFF

    def __post_init__(self):
        if self.R < 2:
            raise ValueError(f"need at least 2 discrete phases, got R = {self.R}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        tail = _poisson_tail(self.alpha, self.fock_cutoff)
        if tail >= FOCK_TAIL_BOUND:
            raise ValueError(
                f"Fock cutoff {self.fock_cutoff} leaves tail mass {tail:.3e} >= {FOCK_TAIL_BOUND}"
            )


def _poisson_tail(alpha: float, cutoff: int) -> float:
    """P(n > cutoff) for Poisson(alpha^2), summed directly to avoid cancellation."""
    lam = alpha * alpha
    tail = 0.0
    for n in range(cutoff + 1, cutoff + 200):
        term = math.exp(-lam + n * math.log(lam) - math.lgamma(n + 1)) if lam > 0 else 0.0
        tail += term
        if term < 1e-320:
            break
    return tail


def single_pulse_fidelity_series(R: int) -> float:
    """Closed-form single-pulse fidelity at alpha = 1 (value in (0, 1])."""
    if R < 1:
        raise ValueError(f"need R >= 1, got {R}")
    base = 0.0
    for j in range(R):
        inner = 0.0
        k = 0
        while True:
            term = math.exp(2.0 * (-1.0 - math.lgamma(k * R + j + 1)))
            inner += term
            k += 1
            if term < _INNER_TERM_CUTOFF * inner or term == 0.0:
                break
        base += math.sqrt(inner)
    return base * base


def fidelity_series(R: int, m: int, n_qubits: int) -> float:
    """Closed-form fidelity of all m*N pulses at alpha = 1: F_pulse^(mN)."""
    if m < 1 or n_qubits < 1:
        raise ValueError("need m >= 1 and N >= 1")
    single = single_pulse_fidelity_series(R)
    return math.exp(m * n_qubits * math.log(single))


def fock_oracle_fidelity(R: int, alpha: float = 1.0, cutoff: int = DEFAULT_FOCK_CUTOFF) -> float:
    """Single-pulse fidelity from truncated Fock-basis density matrices.

    Builds the Poisson-diagonal state and the uniform mixture of R phase-rotated
    coherent states (polarization factored out, common to both) and evaluates
    the matrix fidelity.  Independent oracle for the series formula; works for
    any alpha in (0, 1].
    """
    if R < 1:
        raise ValueError(f"need R >= 1, got {R}")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    tail = _poisson_tail(alpha, cutoff)
    if tail >= FOCK_TAIL_BOUND:
        raise ValueError(f"cutoff {cutoff} leaves tail mass {tail:.3e} >= {FOCK_TAIL_BOUND}")
    lam = alpha * alpha
    ns = np.arange(cutoff + 1)
    log_fact = np.array([math.lgamma(n + 1) for n in ns])
    pmf = np.exp(-lam + ns * math.log(lam) - log_fact) if lam > 0 else (ns == 0).astype(float)
    rho_inf = np.diag(pmf).astype(complex)
    rho_inf /= np.trace(rho_inf).real
    # coherent amplitudes e^{-|b|^2/2} b^n / sqrt(n!) with b = alpha e^{i 2 pi j / R}
    mags = np.exp(-lam / 2.0 + ns * math.log(alpha) - 0.5 * log_fact)
    rho_r = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    for j in range(R):
        coeff = mags * np.exp(1j * 2.0 * math.pi * j * ns / R)
        rho_r += np.outer(coeff, coeff.conj())
    rho_r /= np.trace(rho_r).real
    return matrix_fidelity(DensityMatrix(cutoff + 1, rho_inf), DensityMatrix(cutoff + 1, rho_r))


def f_min(m: int, n_qubits: int, R: int) -> float:
    """Closed-form fidelity floor 1 - 2mN (e/(R-1))^(R-1), valid for R >= 9."""
    if R < MIN_VALID_R:
        raise ValueError(f"the floor is only valid for R >= {MIN_VALID_R}, got {R}")
    if m < 1 or n_qubits < 1:
        raise ValueError("need m >= 1 and N >= 1")
    return 1.0 - 2.0 * m * n_qubits * (math.e / (R - 1)) ** (R - 1)


def acceptance_shift_bound(m: int, n_qubits: int, R: int) -> float:
    """Bound on the acceptance-probability shift from discretization: sqrt(1 - F_min)."""
    return math.sqrt(max(0.0, 1.0 - f_min(m, n_qubits, R)))


def required_R(m: int, n_qubits: int, f: float) -> int:
    """Phase count sufficient to keep the shift below (N-1)/(4Nf).

    R = ceil(ln(32 m N^3 f^2 / (N-1)^2) + 1), clamped to the validity floor 9.
    """
    if n_qubits < 2:
        raise ValueError(f"need at least 2 repetitions, got {n_qubits}")
    if m < 1 or f < 1:
        raise ValueError("need m >= 1 and f >= 1")
    raw = math.log(32.0 * m * n_qubits**3 * f * f / (n_qubits - 1) ** 2) + 1.0
    return max(MIN_VALID_R, math.ceil(raw))
