import numpy as np
import pytest

from veriphoton import hamiltonian as hml
from veriphoton.qcore import StateVector


@pytest.fixture(scope="session")
def singlet_instance() -> hml.InstanceSpec:
    """Single-term antiferromagnetic pair: ground state is the singlet, E0 = 0."""
    ham = hml.LocalHamiltonian(2, ((0, 1, 1.0, 1),))
    _, ground = hml.ground_energy(ham)
    return hml.InstanceSpec(ham, a=0.0, b=0.1, f=10.0, witness=ground)


@pytest.fixture(scope="session")
def b_saturating_state(singlet_instance) -> StateVector:
    """State with energy exactly b on the singlet instance (the tightest cheat)."""
    inst = singlet_instance
    evals, evecs = hml.spectrum(inst.hamiltonian)
    weight = inst.b / evals[1]
    amps = np.sqrt(1 - weight) * evecs[:, 0] + np.sqrt(weight) * evecs[:, 1]
    state = StateVector(2, amps / np.linalg.norm(amps))
    assert abs(hml.energy(inst.hamiltonian, state) - inst.b) < 1e-12
    return state


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
