"""Dense complex linear algebra for small multi-qubit systems.

Conventions shared by the whole package:

* Qubit 0 is the most significant bit of a computational-basis index,
  so for an n-qubit state the amplitude of ``|b_0 b_1 ... b_{n-1}>``
  sits at index ``b_0 b_1 ... b_{n-1}`` read as a binary number.
* States and matrices are immutable after construction; all operations
  are pure functions returning fresh objects.
* Anything random takes an explicit ``numpy.random.Generator``.

Tolerances: 1e-12 for identities that hold in exact arithmetic,
1e-9 for eigendecomposition-backed quantities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_QUBITS = 14

ATOL_EXACT = 1e-12
ATOL_EIG = 1e-9

_SQ2 = np.sqrt(2.0)

GATE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / _SQ2,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "S†": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
GATE_ALIASES = {"Sdg": "S†", "Sdag": "S†"}


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateVector:
    """Pure state of ``n_qubits`` qubits as a dense amplitude vector."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _freeze(np.asarray(self.amplitudes).reshape(-1))
        object.__setattr__(self, "amplitudes", amps)
        if self.n_qubits < 0 or self.n_qubits > MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [0, {MAX_QUBITS}], got {self.n_qubits}")
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"amplitude vector has length {amps.shape[0]}, expected {2**self.n_qubits}"
            )
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > ATOL_EXACT:
            raise ValueError(f"squared norm {norm2} deviates from 1 beyond {ATOL_EXACT}")

    @classmethod
    def computational(cls, n_qubits: int, index: int = 0) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex]) -> "StateVector":
        """Build a state from an unnormalized vector (length must be 2^n)."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.shape[0])))
        if 2**n != amps.shape[0]:
            raise ValueError(f"length {amps.shape[0]} is not a power of two")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(n, amps / norm)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state as a dense ``dim x dim`` matrix.

    Hermiticity and unit trace are enforced at 1e-12.  Eigenvalues in
    [-1e-10, 0) are treated as roundoff: they are clipped to zero and the
    matrix is renormalized.  Anything more negative is an error.
    """

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        mat = np.array(np.asarray(self.entries), dtype=complex)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(f"entries have shape {mat.shape}, expected ({self.dim}, {self.dim})")
        if np.max(np.abs(mat - mat.conj().T)) > ATOL_EXACT:
            raise ValueError("matrix is not Hermitian within 1e-12")
        tr = np.trace(mat)
        if abs(tr - 1.0) > ATOL_EXACT:
            raise ValueError(f"trace {tr} deviates from 1 beyond {ATOL_EXACT}")
        evals, evecs = np.linalg.eigh(mat)
        if evals[0] < -1e-10:
            raise ValueError(f"negative eigenvalue {evals[0]} beyond tolerance -1e-10")
        if evals[0] < 0:
            clipped = np.clip(evals, 0.0, None)
            mat = (evecs * clipped) @ evecs.conj().T
            mat = mat / np.trace(mat).real
        object.__setattr__(self, "entries", _freeze(mat))

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        v = state.amplitudes
        return cls(v.shape[0], np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(dim, np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True)
class GateSpec:
    """A named gate (I, X, Y, Z, H, S, S†, CZ) or a custom unitary acting on `targets`."""

    name: str
    targets: tuple[int, ...]
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        name = GATE_ALIASES.get(self.name, self.name)
        object.__setattr__(self, "name", name)
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets {self.targets}")
        if name in GATE_MATRICES:
            if self.matrix is not None:
                raise ValueError(f"named gate {name} must not carry a custom matrix")
            k = 2 if name == "CZ" else 1
            if len(self.targets) != k:
                raise ValueError(f"gate {name} takes exactly {k} target(s), got {len(self.targets)}")
        else:
            if self.matrix is None:
                raise ValueError(f"unknown gate name {name!r} without a custom matrix")
            mat = np.asarray(self.matrix, dtype=complex)
            k = len(self.targets)
            if mat.shape != (2**k, 2**k):
                raise ValueError(f"custom matrix shape {mat.shape} does not fit {k} target(s)")
            if np.max(np.abs(mat.conj().T @ mat - np.eye(2**k))) > ATOL_EXACT:
                raise ValueError("custom gate is not unitary within 1e-12")
            object.__setattr__(self, "matrix", _freeze(mat))

    def unitary(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return GATE_MATRICES[self.name]


def _apply_unitary(amps: np.ndarray, n: int, unitary: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    k = len(targets)
    psi = amps.reshape([2] * n)
    psi = np.moveaxis(psi, targets, range(k))
    psi = unitary @ psi.reshape(2**k, -1)
    psi = np.moveaxis(psi.reshape([2] * n), range(k), targets)
    return psi.reshape(-1)


def apply_gate(state: StateVector, gate: GateSpec) -> StateVector:
    """Apply `gate` to the targeted qubits; norm is preserved."""
    for t in gate.targets:
        if not 0 <= t < state.n_qubits:
            raise ValueError(f"target {t} out of range for {state.n_qubits} qubits")
    amps = _apply_unitary(state.amplitudes, state.n_qubits, gate.unitary(), gate.targets)
    return StateVector(state.n_qubits, amps)


# Bell basis |phi_wz> = (Z^z X^w (x) I)(|00> + |11>)/sqrt(2), Pauli acting on the
# first qubit of the pair, enumerated in outcome order (w, z) = 00, 01, 10, 11.
BELL_OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))
_BELL_BASIS = np.array(
    [
        [1, 0, 0, 1],    # (|00> + |11>)
        [1, 0, 0, -1],   # (|00> - |11>)
        [0, 1, 1, 0],    # (|01> + |10>)
        [0, 1, -1, 0],   # (|01> - |10>)
    ],
    dtype=complex,
) / _SQ2


def bell_measure(
    state: StateVector, pair: tuple[int, int], rng: np.random.Generator
) -> tuple[tuple[int, int], StateVector]:
    """Measure two qubits in the Bell basis; returns ((w, z), remaining state).

    Outcomes follow the Born rule; the measured pair is removed from the
    returned state (remaining qubits keep their relative order).
    """
    qa, qb = pair
    if qa == qb:
        raise ValueError("bell_measure needs two distinct qubits")
    n = state.n_qubits
    for q in (qa, qb):
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    psi = state.amplitudes.reshape([2] * n)
    psi = np.moveaxis(psi, (qa, qb), (0, 1)).reshape(4, -1)
    branches = _BELL_BASIS.conj() @ psi          # (4, rest) outcome amplitudes
    probs = np.sum(np.abs(branches) ** 2, axis=1)
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"Bell outcome probabilities sum to {total}, expected 1")
    idx = int(np.searchsorted(np.cumsum(probs / total), rng.random(), side="right"))
    idx = min(idx, 3)
    post = branches[idx] / np.sqrt(probs[idx])
    return BELL_OUTCOMES[idx], StateVector(n - 2, post)


def expectation(state: StateVector | DensityMatrix, observable: np.ndarray) -> float:
    """<O> for a pure or mixed state; the observable must be Hermitian to 1e-10."""
    obs = np.asarray(observable, dtype=complex)
    if obs.ndim != 2 or obs.shape[0] != obs.shape[1]:
        raise ValueError(f"observable must be square, got shape {obs.shape}")
    if np.max(np.abs(obs - obs.conj().T)) > 1e-10:
        raise ValueError("observable is not Hermitian within 1e-10")
    if isinstance(state, StateVector):
        if obs.shape[0] != state.amplitudes.shape[0]:
            raise ValueError("dimension mismatch between state and observable")
        value = np.vdot(state.amplitudes, obs @ state.amplitudes)
    else:
        if obs.shape[0] != state.dim:
            raise ValueError("dimension mismatch between state and observable")
        value = np.trace(obs @ state.entries)
    if abs(value.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary residue {value.imag}")
    return float(value.real)


def matrix_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, in [0, 1]."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch {rho.dim} vs {sigma.dim}")
    evals, evecs = np.linalg.eigh(rho.entries)
    sqrt_rho = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    inner = sqrt_rho @ sigma.entries @ sqrt_rho
    lam = np.linalg.eigvalsh(inner)
    value = float(np.sum(np.sqrt(np.clip(lam, 0.0, None))) ** 2)
    return min(max(value, 0.0), 1.0)


def tensor(a, b):
    """Tensor product of two StateVectors or two DensityMatrices."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        n = a.n_qubits + b.n_qubits
        if n > MAX_QUBITS:
            raise ValueError(f"tensor product would need {n} qubits (max {MAX_QUBITS})")
        return StateVector(n, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        dim = a.dim * b.dim
        if dim > 2**MAX_QUBITS:
            raise ValueError(f"tensor product dimension {dim} exceeds {2**MAX_QUBITS}")
        return DensityMatrix(dim, np.kron(a.entries, b.entries))
    raise TypeError("tensor takes two StateVectors or two DensityMatrices")


def partial_trace(rho: DensityMatrix | StateVector, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every qubit not in `keep` (qubit indices, qubit 0 = MSB)."""
    if isinstance(rho, StateVector):
        rho = DensityMatrix.from_state(rho)
    n = int(round(np.log2(rho.dim)))
    if 2**n != rho.dim:
        raise ValueError(f"partial_trace needs a qubit system, dim {rho.dim} is not 2^n")
    keep_set = sorted(set(keep))
    if any(q < 0 or q >= n for q in keep_set):
        raise ValueError(f"keep set {keep_set} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep_set]
    cur = rho.entries.reshape([2] * (2 * n))
    m = n
    for q in sorted(traced, reverse=True):
        cur = np.trace(cur, axis1=q, axis2=m + q)
        m -= 1
    dim = 2 ** len(keep_set)
    return DensityMatrix(dim, cur.reshape(dim, dim))


def random_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-ish random pure state (normalized complex Gaussian vector)."""
    dim = 2**n_qubits
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(n_qubits, vec / np.linalg.norm(vec))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random mixed state from a Ginibre factor of the given rank."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    mat = g @ g.conj().T
    return DensityMatrix(dim, mat / np.trace(mat).real)
