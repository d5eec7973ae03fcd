"""Two-local XX+YY Hamiltonians: energies, exact ground states, synthetic instances.

Each term (i, j, p, c) contributes p/2 * [(I + c X_i X_j)/2 + (I + c Y_i Y_j)/2];
with the weights p summing to one the whole operator satisfies 0 <= H <= I.
The instance file format is JSON:

    {"n": 3, "terms": [{"i": 0, "j": 1, "p": 0.5, "c": 1}, ...],
     "a": 0.0, "b": 0.1, "f": 10.0, "witness": [[re, im], ...]}   # witness optional
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .qcore import DensityMatrix, StateVector, expectation

MAX_HAMILTONIAN_QUBITS = 12

PARSE_WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class HamiltonianTerm:
    i: int
    j: int
    p: float
    c: int

    def __post_init__(self):
        if self.c not in (1, -1):
            raise ValueError(f"term sign must be +1 or -1, got {self.c}")
        if self.p < 0:
            raise ValueError(f"term weight must be non-negative, got {self.p}")
        if not 0 <= self.i < self.j:
            raise ValueError(f"term needs 0 <= i < j, got ({self.i}, {self.j})")


@dataclass(frozen=True)
class LocalHamiltonian:
    n_qubits: int
    terms: tuple[HamiltonianTerm, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "terms",
            tuple(t if isinstance(t, HamiltonianTerm) else HamiltonianTerm(*t) for t in self.terms),
        )
        if self.n_qubits < 2:
            raise ValueError(f"need at least 2 qubits, got {self.n_qubits}")
        pairs = [(t.i, t.j) for t in self.terms]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate (i, j) pairs in terms")
        if any(t.j >= self.n_qubits for t in self.terms):
            raise ValueError("term index exceeds qubit count")
        total = sum(t.p for t in self.terms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"term weights sum to {total}, expected 1 within 1e-12")

    @cached_property
    def _cumulative_weights(self) -> np.ndarray:
        return np.cumsum([t.p for t in self.terms])


def dense_matrix(h: LocalHamiltonian) -> np.ndarray:
    """Dense Hermitian matrix of the Hamiltonian (n_qubits <= 12).

    Uses X_i X_j + Y_i Y_j = 2(|01><10| + |10><01|) on the (i, j) pair, so the
    operator is I/2 plus off-diagonal hops of weight p*c/2 between basis states
    whose bits differ at i and j.
    """
    n = h.n_qubits
    if n > MAX_HAMILTONIAN_QUBITS:
        raise ValueError(f"dense_matrix supports at most {MAX_HAMILTONIAN_QUBITS} qubits, got {n}")
    dim = 2**n
    mat = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(mat, 0.5)
    basis = np.arange(dim)
    for t in h.terms:
        bit_i = (basis >> (n - 1 - t.i)) & 1
        bit_j = (basis >> (n - 1 - t.j)) & 1
        mask = (1 << (n - 1 - t.i)) | (1 << (n - 1 - t.j))
        src = basis[bit_i != bit_j]
        mat[src ^ mask, src] += t.p * t.c / 2.0
    return mat


def energy(h: LocalHamiltonian, state: StateVector | DensityMatrix) -> float:
    """<H> for a pure or mixed state; real and within [0, 1] up to roundoff."""
    return expectation(state, dense_matrix(h))


def ground_energy(h: LocalHamiltonian) -> tuple[float, StateVector]:
    """Smallest eigenvalue and one ground eigenvector (exact diagonalization).

    Ground spaces of XX+YY instances are frequently degenerate; callers must
    not assume the returned eigenvector is unique.
    """
    mat = dense_matrix(h)
    evals, evecs = np.linalg.eigh(mat)
    e0 = float(evals[0])
    vec = evecs[:, 0]
    residual = float(np.linalg.norm(mat @ vec - e0 * vec))
    if residual > 1e-8:
        raise ValueError(f"eigenpair residual {residual} exceeds 1e-8")
    return e0, StateVector(h.n_qubits, vec / np.linalg.norm(vec))


def spectrum(h: LocalHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """All eigenvalues (ascending) and eigenvectors as columns."""
    return np.linalg.eigh(dense_matrix(h))


def sample_term(h: LocalHamiltonian, rng: np.random.Generator) -> tuple[int, int]:
    """Draw a pair (i, j) with probability p_ij."""
    cum = h._cumulative_weights
    idx = int(np.searchsorted(cum / cum[-1], rng.random(), side="right"))
    idx = min(idx, len(h.terms) - 1)
    t = h.terms[idx]
    return t.i, t.j


@dataclass(frozen=True)
class InstanceSpec:
    """A Hamiltonian together with energy thresholds a < b and a witness state.

    The honest prover holds a witness with energy <= a; malicious behaviour is
    measured against the declared bound b, with 1 >= b - a >= 1/f.
    """

    hamiltonian: LocalHamiltonian
    a: float
    b: float
    f: float
    witness: StateVector | None = None

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("thresholds a and b must be non-negative")
        gap = self.b - self.a
        if gap > 1.0 + 1e-12 or gap < 1.0 / self.f - 1e-12:
            raise ValueError(f"need 1 >= b - a >= 1/f, got b - a = {gap} with f = {self.f}")
        if self.witness is not None:
            if self.witness.n_qubits != self.hamiltonian.n_qubits:
                raise ValueError("witness qubit count does not match the Hamiltonian")
            e = energy(self.hamiltonian, self.witness)
            if e > self.a + 1e-9:
                raise ValueError(f"witness energy {e} exceeds a = {self.a} beyond 1e-9")


def synth_instance(n_qubits: int, seed: int, gap_target: float) -> InstanceSpec:
    """Random verification instance with an exact ground-state witness.

    Weights are drawn over all pairs and normalized, signs are random, the
    witness is the exact ground state (a = E0), and b = a + gap with
    gap = min(gap_target, 1, spectral spread); f = 1/gap.  Deterministic in
    the seed; redraws if the spectrum is too flat to carve out a gap.
    """
    if not 2 <= n_qubits <= 6:
        raise ValueError(f"synth_instance supports 2..6 qubits, got {n_qubits}")
    if not 0 < gap_target <= 1:
        raise ValueError(f"gap_target must be in (0, 1], got {gap_target}")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n_qubits) for j in range(i + 1, n_qubits)]
    while True:
        weights = rng.random(len(pairs)) + 0.05
        weights = weights / weights.sum()
        signs = rng.choice([1, -1], size=len(pairs))
        ham = LocalHamiltonian(
            n_qubits,
            tuple(
                HamiltonianTerm(i, j, float(p), int(c))
                for (i, j), p, c in zip(pairs, weights, signs)
            ),
        )
        evals, evecs = spectrum(ham)
        spread = float(evals[-1] - evals[0])
        if spread < 1e-6:
            continue
        gap = min(gap_target, 1.0, spread)
        a = float(evals[0])
        witness = StateVector(n_qubits, evecs[:, 0] / np.linalg.norm(evecs[:, 0]))
        return InstanceSpec(ham, a=a, b=a + gap, f=1.0 / gap, witness=witness)


def instance_to_dict(inst: InstanceSpec) -> dict:
    doc = {
        "n": inst.hamiltonian.n_qubits,
        "terms": [{"i": t.i, "j": t.j, "p": t.p, "c": t.c} for t in inst.hamiltonian.terms],
        "a": inst.a,
        "b": inst.b,
        "f": inst.f,
    }
    if inst.witness is not None:
        doc["witness"] = [[float(c.real), float(c.imag)] for c in inst.witness.amplitudes]
    return doc


def instance_from_dict(doc: dict) -> InstanceSpec:
    """Parse the JSON instance document; rejects weight sums off by more than 1e-9.

    Weights (and the witness norm) are renormalized to machine precision after
    the tolerance check, so files written with rounded floats round-trip.
    """
    known = {"n", "terms", "a", "b", "f", "witness"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown instance keys: {sorted(unknown)}")
    n = int(doc["n"])
    raw_terms = doc["terms"]
    total = sum(float(t["p"]) for t in raw_terms)
    if abs(total - 1.0) > PARSE_WEIGHT_TOL:
        raise ValueError(f"term weights sum to {total}, off by more than {PARSE_WEIGHT_TOL}")
    terms = tuple(
        HamiltonianTerm(int(t["i"]), int(t["j"]), float(t["p"]) / total, int(t["c"]))
        for t in raw_terms
    )
    witness = None
    if doc.get("witness") is not None:
        amps = np.array([complex(re, im) for re, im in doc["witness"]])
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > PARSE_WEIGHT_TOL:
            raise ValueError(f"witness norm {norm} off by more than {PARSE_WEIGHT_TOL}")
        witness = StateVector(n, amps / norm)
    return InstanceSpec(
        LocalHamiltonian(n, terms),
        a=float(doc["a"]),
        b=float(doc["b"]),
        f=float(doc["f"]),
        witness=witness,
    )


def load_instance(path: str | Path) -> InstanceSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def save_instance(inst: InstanceSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh)
        fh.write("\n")
