import numpy as np
import pytest

from onewaysim.qcore import DensityMatrix, SingleQubitGate, StateVector


def random_state(rng: np.random.Generator, num_qubits: int) -> StateVector:
    dim = 2**num_qubits
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector.normalized(amps)


def random_density(rng: np.random.Generator, num_qubits: int) -> DensityMatrix:
    dim = 2**num_qubits
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_unitary_gate(rng: np.random.Generator) -> SingleQubitGate:
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    # fix the phase freedom so the decomposition is a proper unitary
    q = q @ np.diag(np.diag(r) / np.abs(np.diag(r)))
    return SingleQubitGate(q)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
