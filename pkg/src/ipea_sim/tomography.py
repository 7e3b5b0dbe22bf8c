"""Single-qubit state tomography from Pauli-basis counts.

Counts are simulated by binomial sampling of the exact +1-outcome
probabilities.  Reconstruction is linear inversion of the empirical
Bloch vector, with one physicality projection: a vector that lands
outside the Bloch ball is rescaled onto its surface.  Error bars come
from a parametric bootstrap that resamples counts from the empirical
frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .qmath import ContractError, DensityMatrix, StateVector

__all__ = [
    "BASES",
    "PauliCounts",
    "ReconstructionReport",
    "expectations",
    "simulate_counts",
    "reconstruct",
    "reconstruct_from_expectations",
    "bootstrap_fidelity",
]

BASES = ("X", "Y", "Z")

_PAULIS = {
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}
_I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class PauliCounts:
    """Plus/minus tallies for each Pauli basis at a common shot count."""

    shots_per_basis: int
    counts: dict[str, tuple[int, int]]

    def __post_init__(self):
        shots = int(self.shots_per_basis)
        if shots < 1:
            raise ContractError(f"shots_per_basis must be >= 1, got {shots}")
        if set(self.counts) != set(BASES):
            raise ContractError(
                f"counts must cover exactly the bases {BASES}, got "
                f"{sorted(self.counts)}"
            )
        clean = {}
        for basis in BASES:
            plus, minus = (int(v) for v in self.counts[basis])
            if plus < 0 or minus < 0 or plus + minus != shots:
                raise ContractError(
                    f"basis {basis}: counts ({plus}, {minus}) do not sum to {shots}"
                )
            clean[basis] = (plus, minus)
        object.__setattr__(self, "shots_per_basis", shots)
        object.__setattr__(self, "counts", clean)

    def empirical_expectations(self) -> dict[str, float]:
        return {
            basis: (plus - minus) / self.shots_per_basis
            for basis, (plus, minus) in self.counts.items()
        }


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    """Reconstructed state with its fidelity point estimate and spread."""

    rho: DensityMatrix
    fidelity_vs_ideal: float
    fidelity_std: float
    shots_per_basis: int

    def __post_init__(self):
        if not 0.0 <= self.fidelity_vs_ideal <= 1.0:
            raise ContractError(
                f"fidelity must lie in [0, 1], got {self.fidelity_vs_ideal!r}"
            )
        if self.fidelity_std < 0.0:
            raise ContractError(f"fidelity_std must be >= 0, got {self.fidelity_std!r}")
        if self.shots_per_basis < 0:
            raise ContractError(
                f"shots_per_basis must be >= 0, got {self.shots_per_basis}"
            )


def _check_single_qubit(rho: DensityMatrix) -> None:
    if rho.dimension != 2:
        raise ContractError(f"tomography handles single qubits, got dim {rho.dimension}")


def expectations(rho: DensityMatrix) -> dict[str, float]:
    """Exact Pauli expectation values of a single-qubit state."""
    _check_single_qubit(rho)
    return {
        basis: float(np.trace(rho.matrix @ sigma).real)
        for basis, sigma in _PAULIS.items()
    }


def simulate_counts(
    rho: DensityMatrix, shots: int, rng: np.random.Generator
) -> PauliCounts:
    """Binomial-sample plus/minus counts in each Pauli basis.

    The +1-outcome probability in basis B is (1 + <B>)/2.
    """
    _check_single_qubit(rho)
    if shots < 1:
        raise ContractError(f"shots must be >= 1, got {shots}")
    exp = expectations(rho)
    counts = {}
    for basis in BASES:
        p_plus = min(1.0, max(0.0, (1.0 + exp[basis]) / 2.0))
        plus = int(rng.binomial(shots, p_plus))
        counts[basis] = (plus, shots - plus)
    return PauliCounts(shots, counts)


def _rho_from_bloch(rx: float, ry: float, rz: float) -> DensityMatrix:
    r = np.array([rx, ry, rz], dtype=float)
    norm = float(np.linalg.norm(r))
    if norm > 1.0:
        r = r / norm  # project onto the Bloch sphere surface
    m = (_I2 + r[0] * _PAULIS["X"] + r[1] * _PAULIS["Y"] + r[2] * _PAULIS["Z"]) / 2.0
    return DensityMatrix(2, m)


def reconstruct_from_expectations(rx: float, ry: float, rz: float) -> DensityMatrix:
    """Linear inversion from (possibly noisy) Pauli expectations."""
    for name, v in (("rx", rx), ("ry", ry), ("rz", rz)):
        if not np.isfinite(v):
            raise ContractError(f"{name} must be finite, got {v!r}")
    return _rho_from_bloch(float(rx), float(ry), float(rz))


def reconstruct(counts: PauliCounts) -> DensityMatrix:
    """Linear inversion of the empirical Bloch vector.

    Always returns a valid state: statistical overshoot past the Bloch
    ball is rescaled back onto the unit sphere.
    """
    if counts.shots_per_basis < 1:
        raise ContractError("cannot reconstruct from zero shots")
    emp = counts.empirical_expectations()
    return _rho_from_bloch(emp["X"], emp["Y"], emp["Z"])


def bootstrap_fidelity(
    counts: PauliCounts,
    ideal: StateVector,
    resamples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Parametric bootstrap of the reconstructed fidelity vs a pure target.

    Counts are resampled binomially from the empirical frequencies,
    each resample is reconstructed, and the mean and (population)
    standard deviation of the resulting fidelities are returned.
    """
    if resamples < 1:
        raise ContractError(f"resamples must be >= 1, got {resamples}")
    if ideal.dim != 2:
        raise ContractError("ideal state must be a single qubit")
    shots = counts.shots_per_basis
    p_hat = {
        basis: plus / shots for basis, (plus, _) in counts.counts.items()
    }
    fids = np.empty(resamples, dtype=float)
    for i in range(resamples):
        redrawn = {}
        for basis in BASES:
            plus = int(rng.binomial(shots, p_hat[basis]))
            redrawn[basis] = (plus, shots - plus)
        rho = reconstruct(PauliCounts(shots, redrawn))
        fids[i] = qmath.fidelity(rho, ideal)
    return float(np.mean(fids)), float(np.std(fids))
