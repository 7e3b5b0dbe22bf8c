"""Shared sampling utilities for the test suite."""

import numpy as np

from ipea_sim.qmath import StateVector, Unitary


def haar_unitary(dim: int, rng: np.random.Generator) -> Unitary:
    """Haar-distributed unitary via QR with the standard phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    d = np.diagonal(r)
    return Unitary(q * (d / np.abs(d)))


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    dim = 1 << num_qubits
    raw = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(num_qubits, raw / np.linalg.norm(raw))


def random_bloch(rng: np.random.Generator, surface: bool = False) -> np.ndarray:
    """Uniform point in (or on) the Bloch ball."""
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v)
    if surface:
        return v
    return v * rng.random() ** (1.0 / 3.0)


def phase_unitary(phi: float) -> Unitary:
    """diag(1, e^{2 pi i phi}) — eigenphase phi on |1>."""
    return Unitary(np.diag([1.0, np.exp(2j * np.pi * phi)]))
