"""The qubit-channel verification protocol.

One round: the verifier draws secret bit tuples (h, s), sends the product
state of S^h_i H |s_i> qubits, the prover answers with Bell-measurement
outcome bits (w, z), and the verifier samples a Hamiltonian term (i, j) and
checks a parity condition on s'_k = s_k XOR z_k XOR h_k w_k.

The module ships exact acceptance-probability calculators for the honest
teleporting prover and for explicit-POVM malicious provers, plus a brute
force enumerator that serves as the independent oracle for both.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .hamiltonian import InstanceSpec, LocalHamiltonian, dense_matrix, energy, sample_term
from .qcore import StateVector, bell_measure, tensor

CI99_Z = 2.5758293035489004

_SQ2 = np.sqrt(2.0)
# Single-qubit verifier states S^h H |s>, keyed by (h, s).
_VERIFIER_QUBITS = {
    (0, 0): np.array([1, 1], dtype=complex) / _SQ2,
    (0, 1): np.array([1, -1], dtype=complex) / _SQ2,
    (1, 0): np.array([1, 1j], dtype=complex) / _SQ2,
    (1, 1): np.array([1, -1j], dtype=complex) / _SQ2,
}

BRANCH_AUTO_ACCEPT = "auto-accept"
BRANCH_PARITY_ACCEPT = "parity-accept"
BRANCH_PARITY_REJECT = "parity-reject"
BRANCH_THRESHOLD_REJECT = "threshold-reject"


@dataclass(frozen=True)
class VerifierSecret:
    h: tuple[int, ...]
    s: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(int(b) for b in self.h))
        object.__setattr__(self, "s", tuple(int(b) for b in self.s))
        if len(self.h) != len(self.s):
            raise ValueError("h and s must have the same length")
        if any(b not in (0, 1) for b in self.h + self.s):
            raise ValueError("secret tuples must be bits")

    @property
    def n_qubits(self) -> int:
        return len(self.h)


@dataclass(frozen=True)
class BellOutcomes:
    w: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(int(b) for b in self.w))
        object.__setattr__(self, "z", tuple(int(b) for b in self.z))
        if len(self.w) != len(self.z):
            raise ValueError("w and z must have the same length")
        if any(b not in (0, 1) for b in self.w + self.z):
            raise ValueError("outcome tuples must be bits")


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    branch: str
    sampled_pair: tuple[int, int] | None = None

    def __post_init__(self):
        if self.branch == BRANCH_THRESHOLD_REJECT and self.accepted:
            raise ValueError("threshold-reject verdicts cannot accept")
        if self.branch == BRANCH_AUTO_ACCEPT and not self.accepted:
            raise ValueError("auto-accept verdicts must accept")


def sample_secret(n_qubits: int, rng: np.random.Generator) -> VerifierSecret:
    h = rng.integers(0, 2, n_qubits)
    s = rng.integers(0, 2, n_qubits)
    return VerifierSecret(tuple(h), tuple(s))


def prepare_verifier_state(secret: VerifierSecret) -> StateVector:
    """Product state of S^h_i H |s_i> over all qubits."""
    amps = np.array([1.0], dtype=complex)
    for h, s in zip(secret.h, secret.s):
        amps = np.kron(amps, _VERIFIER_QUBITS[(h, s)])
    return StateVector(secret.n_qubits, amps)


def honest_prover(psi_v: StateVector, eta: StateVector, rng: np.random.Generator) -> BellOutcomes:
    """Bell-measure qubit k of the held state eta against qubit k of psi_v.

    This is the teleportation step: the k-th pair is (eta_k, psi_v_k), measured
    in the Bell basis with the Pauli correction acting on the eta side.
    """
    n = psi_v.n_qubits
    if eta.n_qubits != n:
        raise ValueError(f"state sizes differ: {eta.n_qubits} vs {n}")
    state = tensor(eta, psi_v)
    w, z = [], []
    for k in range(n):
        # after k pairs are measured the current pair sits at positions (0, n-k)
        (wk, zk), state = bell_measure(state, (0, n - k), rng)
        w.append(wk)
        z.append(zk)
    return BellOutcomes(tuple(w), tuple(z))


def s_prime(secret: VerifierSecret, out: BellOutcomes) -> tuple[int, ...]:
    """s'_k = s_k XOR z_k XOR (h_k AND w_k)."""
    if len(out.w) != secret.n_qubits:
        raise ValueError("outcome length does not match the secret")
    return tuple(
        s ^ z ^ (h & w) for s, z, h, w in zip(secret.s, out.z, secret.h, out.w)
    )


def verdict(
    secret: VerifierSecret,
    out: BellOutcomes,
    ham: LocalHamiltonian,
    rng: np.random.Generator,
) -> Verdict:
    """Sample a term (i, j) with probability p_ij and apply the accept rule.

    Differing basis bits h_i != h_j auto-accept; otherwise accept iff
    (-1)^(s'_i + s'_j) equals -c_ij.
    """
    i, j = sample_term(ham, rng)
    if secret.h[i] != secret.h[j]:
        return Verdict(True, BRANCH_AUTO_ACCEPT, (i, j))
    sp = s_prime(secret, out)
    c = next(t.c for t in ham.terms if (t.i, t.j) == (i, j))
    if (-1) ** (sp[i] + sp[j]) == -c:
        return Verdict(True, BRANCH_PARITY_ACCEPT, (i, j))
    return Verdict(False, BRANCH_PARITY_REJECT, (i, j))


# ---------------------------------------------------------------------------
# Malicious provers as POVM families
# ---------------------------------------------------------------------------

def _bit_tuples(n: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=n))


def pauli_xz_masks(n: int, w: tuple[int, ...], z: tuple[int, ...]) -> tuple[int, int]:
    """Bit masks (qubit 0 = MSB) for the Pauli product (x)_k X^w_k Z^z_k."""
    wm = zm = 0
    for k in range(n):
        if w[k]:
            wm |= 1 << (n - 1 - k)
        if z[k]:
            zm |= 1 << (n - 1 - k)
    return wm, zm


def pauli_xz_apply(vec: np.ndarray, n: int, w: tuple[int, ...], z: tuple[int, ...]) -> np.ndarray:
    """Apply (x)_k X^w_k Z^z_k to a dense vector (Z phases first, then X flips)."""
    wm, zm = pauli_xz_masks(n, w, z)
    idx = np.arange(vec.shape[0])
    phases = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
    out = np.empty_like(vec)
    out[idx ^ wm] = phases * vec
    return out


class BellTeleportPovm:
    """POVM realized by Bell-measuring a held state against the incoming qubits.

    With the held state equal to the instance witness this is the honest
    prover; any other held state models a prover teleporting the wrong state.
    """

    def __init__(self, held_state: StateVector):
        self.held_state = held_state
        self.n_qubits = held_state.n_qubits

    def element(self, w: tuple[int, ...], z: tuple[int, ...]) -> np.ndarray:
        vec = pauli_xz_apply(self.held_state.amplitudes, self.n_qubits, w, z).conj()
        return np.outer(vec, vec.conj()) / 2**self.n_qubits

    def sample(self, psi_v: StateVector, rng: np.random.Generator) -> BellOutcomes:
        return honest_prover(psi_v, self.held_state, rng)


class StateIndependentPovm:
    """Prover ignoring the received state: Pi_wz = q(w, z) * I."""

    def __init__(self, n_qubits: int, probs: np.ndarray):
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (4**n_qubits,):
            raise ValueError(f"need {4**n_qubits} outcome probabilities, got {probs.shape}")
        if abs(probs.sum() - 1.0) > 1e-10 or np.any(probs < 0):
            raise ValueError("outcome probabilities must be non-negative and sum to 1")
        self.n_qubits = n_qubits
        self.probs = probs
        self._cum = np.cumsum(probs)

    def element(self, w: tuple[int, ...], z: tuple[int, ...]) -> np.ndarray:
        idx = outcome_index(w, z)
        return self.probs[idx] * np.eye(2**self.n_qubits, dtype=complex)

    def sample(self, psi_v: StateVector, rng: np.random.Generator) -> BellOutcomes:
        idx = int(np.searchsorted(self._cum, rng.random(), side="right"))
        idx = min(idx, len(self.probs) - 1)
        return outcome_from_index(self.n_qubits, idx)


def random_outcome_povm(n_qubits: int) -> StateIndependentPovm:
    """Prover reporting uniformly random (w, z)."""
    return StateIndependentPovm(n_qubits, np.full(4**n_qubits, 4.0**-n_qubits))


def constant_outcome_povm(w: tuple[int, ...], z: tuple[int, ...]) -> StateIndependentPovm:
    """Prover always reporting the same (w, z)."""
    n = len(w)
    probs = np.zeros(4**n)
    probs[outcome_index(w, z)] = 1.0
    return StateIndependentPovm(n, probs)


class ProductMeasurePovm:
    """Measure each incoming qubit in a fixed product basis and report it as z.

    The w bits carry no information (fair coins).  basis "Z" measures in the
    computational basis, "X" in the Hadamard basis.
    """

    def __init__(self, n_qubits: int, basis: str = "Z"):
        if basis not in ("Z", "X"):
            raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
        self.n_qubits = n_qubits
        self.basis = basis

    def _basis_vector(self, bit: int) -> np.ndarray:
        if self.basis == "Z":
            return np.array([1.0, 0.0], dtype=complex) if bit == 0 else np.array([0.0, 1.0], dtype=complex)
        return np.array([1.0, 1.0 - 2.0 * bit], dtype=complex) / _SQ2

    def element(self, w: tuple[int, ...], z: tuple[int, ...]) -> np.ndarray:
        mat = np.array([[1.0]], dtype=complex)
        for bit in z:
            v = self._basis_vector(bit)
            mat = np.kron(mat, np.outer(v, v.conj()))
        return mat / 2**self.n_qubits

    def sample(self, psi_v: StateVector, rng: np.random.Generator) -> BellOutcomes:
        amps = psi_v.amplitudes
        if self.basis == "X":
            had = np.array([[1, 1], [1, -1]], dtype=complex) / _SQ2
            for k in range(self.n_qubits):
                from .qcore import _apply_unitary

                amps = _apply_unitary(amps, self.n_qubits, had, (k,))
        probs = np.abs(amps) ** 2
        idx = int(np.searchsorted(np.cumsum(probs / probs.sum()), rng.random(), side="right"))
        idx = min(idx, len(probs) - 1)
        z = tuple((idx >> (self.n_qubits - 1 - k)) & 1 for k in range(self.n_qubits))
        w = tuple(int(b) for b in rng.integers(0, 2, self.n_qubits))
        return BellOutcomes(w, z)


def outcome_index(w: tuple[int, ...], z: tuple[int, ...]) -> int:
    """Flat index of (w, z) with w bits above z bits, MSB first."""
    n = len(w)
    idx = 0
    for b in w + z:
        idx = (idx << 1) | b
    return idx


def outcome_from_index(n: int, idx: int) -> BellOutcomes:
    bits = [(idx >> (2 * n - 1 - k)) & 1 for k in range(2 * n)]
    return BellOutcomes(tuple(bits[:n]), tuple(bits[n:]))


def outcome_distribution(povm, psi_v: StateVector) -> np.ndarray:
    """Born probabilities over all 4^N outcomes for an explicit POVM."""
    n = povm.n_qubits
    probs = np.empty(4**n)
    amps = psi_v.amplitudes
    for idx in range(4**n):
        out = outcome_from_index(n, idx)
        probs[idx] = float(np.vdot(amps, povm.element(out.w, out.z) @ amps).real)
    return probs


# ---------------------------------------------------------------------------
# Acceptance probability calculators
# ---------------------------------------------------------------------------

def exact_pacc_honest(inst: InstanceSpec) -> float:
    """Closed form for the honest teleporting prover: 1 - <eta|H|eta>/2."""
    if inst.witness is None:
        raise ValueError("instance has no witness state")
    return 1.0 - energy(inst.hamiltonian, inst.witness) / 2.0


def exact_pacc_povm(ham: LocalHamiltonian, povm) -> float:
    """Exact acceptance probability of an explicit-POVM prover.

    Averages the verdict over uniform (h, s) and all outcomes by reducing the
    sum to 1/2 + Tr[rho (I - H)]/2, where rho is the uniform average of the
    Pauli-conjugated POVM elements (a valid quantum state), so the result can
    never exceed 1 - E0/2.
    """
    n = ham.n_qubits
    if n > 6:
        raise ValueError(f"explicit POVM enumeration supports at most 6 qubits, got {n}")
    dim = 2**n
    idx = np.arange(dim)
    acc = np.zeros((dim, dim), dtype=complex)
    total = np.zeros((dim, dim), dtype=complex)
    for w in _bit_tuples(n):
        for z in _bit_tuples(n):
            elem = np.asarray(povm.element(w, z), dtype=complex)
            total += elem
            wm, zm = pauli_xz_masks(n, w, z)
            phases = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
            conj = (phases[:, None] * phases[None, :]) * elem
            acc[np.ix_(idx ^ wm, idx ^ wm)] += conj
    if np.max(np.abs(total - np.eye(dim))) > 1e-10:
        raise ValueError("POVM elements do not sum to the identity within 1e-10")
    rho = acc / dim
    h_mat = dense_matrix(ham)
    value = 0.5 + 0.5 * np.trace(rho @ (np.eye(dim) - h_mat)).real
    return float(value)


def _acceptance_weight(ham: LocalHamiltonian, h: tuple[int, ...], sp: tuple[int, ...]) -> float:
    """Expected accept indicator over the (i, j) sampling for fixed h and s'."""
    weight = 0.0
    for t in ham.terms:
        if h[t.i] != h[t.j]:
            weight += t.p
        else:
            weight += t.p * (1 - t.c * (-1) ** (sp[t.i] + sp[t.j])) / 2.0
    return weight


def brute_force_pacc(inst: InstanceSpec, povm, max_qubits: int = 3) -> float:
    """Exhaustive acceptance probability: the independent oracle.

    Sums over all 2^{2N} secrets and all 2^{2N} outcomes with Born/POVM
    probabilities and the exact verdict expectation over (i, j).
    """
    ham = inst.hamiltonian
    n = ham.n_qubits
    if n > max_qubits:
        raise ValueError(f"brute force supports at most {max_qubits} qubits, got {n}")
    total = 0.0
    for h in _bit_tuples(n):
        for s in _bit_tuples(n):
            secret = VerifierSecret(h, s)
            psi_v = prepare_verifier_state(secret)
            amps = psi_v.amplitudes
            for w in _bit_tuples(n):
                for z in _bit_tuples(n):
                    prob = float(np.vdot(amps, povm.element(w, z) @ amps).real)
                    if prob <= 0.0:
                        continue
                    sp = s_prime(secret, BellOutcomes(w, z))
                    total += prob * _acceptance_weight(ham, h, sp)
    return total / 4**n


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    ci: float
    accepts: int
    trials: int


def monte_carlo_pacc(inst: InstanceSpec, povm, trials: int, seed: int) -> MonteCarloResult:
    """Sampled acceptance probability with a 99% normal-approximation CI.

    Each trial uses its own stream seeded by (seed, trial index), so results
    do not depend on execution order.  Within one trial the draw order is
    fixed: h, then s, then the prover's outcomes, then the verdict pair.
    """
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    ham = inst.hamiltonian
    n = ham.n_qubits
    accepts = 0
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        secret = sample_secret(n, rng)
        psi_v = prepare_verifier_state(secret)
        out = povm.sample(psi_v, rng)
        if verdict(secret, out, ham, rng).accepted:
            accepts += 1
    estimate = accepts / trials
    ci = CI99_Z * np.sqrt(estimate * (1 - estimate) / trials)
    return MonteCarloResult(estimate, float(ci), accepts, trials)
