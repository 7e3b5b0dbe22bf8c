"""Phase estimation engines over a black-box controlled unitary.

Two complementary engines live here:

* the iterative engine extracts an m-bit phase one bit per round with a
  single control qubit, least significant bit first, threading every
  measured bit into the feedback rotation of the next round;
* the full-register engine prepares m control qubits at once, applies
  the controlled powers, inverts the Fourier transform exactly, and
  reads the whole register, which is also what drives eigenstate
  generation from non-eigenstate inputs.

Bit convention: measuring the control in the +/- basis maps "+" to bit
0 and "-" to bit 1.  An estimate ``bits = (b1, ..., bm)`` denotes the
binary fraction 0.b1...bm.

Controlled-power providers
--------------------------
``ipea_run`` and ``ipea_iteration`` are generic over how the gate
C-U^(2^(k-1)) is realized.  A provider exposes two methods::

    controlled_state(unitary, target, k, rng) -> ControlledOutcome
    bit_distribution(unitary, target, k, omega) -> (p_bit0, p_bit1)

``MatrixProvider`` below applies the explicit block matrix.  The
photonics module supplies a dual-rail optical realization with parity
post-selection; its odd-parity outcomes are salvaged by flipping the
measured bit, which the ``relabel`` flag communicates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .qmath import (
    CapacityError,
    ContractError,
    StateVector,
    Unitary,
    max_amplitudes,
    max_qubits,
)

__all__ = [
    "EigenproblemSpec",
    "IterationPlan",
    "PhaseEstimate",
    "CollapseResult",
    "MixedCollapseResult",
    "ExactIpeaResult",
    "ControlledOutcome",
    "MatrixProvider",
    "resolve_provider",
    "feedback_angle",
    "ancilla_bit_distribution",
    "ipea_iteration",
    "ipea_run",
    "ipea_run_exact",
    "qft",
    "inverse_qft",
    "qpe_full_distribution",
    "collapse_run",
    "collapse_project",
    "collapse_run_mixed",
    "collapse_project_mixed",
    "circular_distance",
    "bits_of",
]

_SQRT1_2 = 1.0 / np.sqrt(2.0)


def _validated_bits(bits) -> tuple[int, ...]:
    out = []
    for b in bits:
        b = int(b)
        if b not in (0, 1):
            raise ContractError(f"bits must be 0 or 1, got {b}")
        out.append(b)
    return tuple(out)


def bits_of(value: int, width: int) -> tuple[int, ...]:
    """Binary digits of ``value``, most significant first."""
    if not 0 <= value < 1 << width:
        raise ContractError(f"value {value} does not fit in {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def feedback_angle(k: int, measured_bits) -> float:
    """Feedback rotation angle for round k, in radians.

    ``measured_bits`` are the already-extracted lower bits, ordered
    from position k+1 up to m.  The angle is -2*pi times the binary
    fraction 0.0 b_{k+1} ... b_m, evaluated in exact dyadic arithmetic;
    the final round (no measured bits yet) gets angle 0.
    """
    if k < 1:
        raise ContractError(f"iteration index k must be >= 1, got {k}")
    bits = _validated_bits(measured_bits)
    numerator = 0
    for b in bits:
        numerator = (numerator << 1) | b
    xi = numerator / (1 << (len(bits) + 1))
    return -2.0 * np.pi * xi


@dataclass(frozen=True)
class IterationPlan:
    """Everything round k needs: prior bits and the feedback angle.

    ``xi_k`` is the binary fraction 0.0 b_{k+1} ... b_m built from the
    already measured bits and ``omega_k = -2*pi*xi_k``.
    """

    m: int
    k: int
    measured_bits: tuple[int, ...]
    xi_k: float
    omega_k: float

    def __post_init__(self):
        if not 1 <= self.k <= self.m:
            raise ContractError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        bits = _validated_bits(self.measured_bits)
        if len(bits) != self.m - self.k:
            raise ContractError(
                f"round k={self.k} of m={self.m} expects {self.m - self.k} "
                f"measured bits, got {len(bits)}"
            )
        object.__setattr__(self, "measured_bits", bits)
        omega = feedback_angle(self.k, bits)
        xi = -omega / (2.0 * np.pi)
        if self.xi_k != xi or self.omega_k != omega:
            raise ContractError(
                f"inconsistent plan: xi_k={self.xi_k!r}, omega_k={self.omega_k!r} "
                f"do not match bits {bits}"
            )
        if not 0.0 <= self.xi_k < 0.5:
            raise ContractError(f"xi_k must lie in [0, 0.5), got {self.xi_k!r}")

    @classmethod
    def for_iteration(cls, m: int, k: int, measured_bits) -> "IterationPlan":
        bits = _validated_bits(measured_bits)
        omega = feedback_angle(k, bits)
        return cls(m=m, k=k, measured_bits=bits, xi_k=-omega / (2.0 * np.pi), omega_k=omega)


@dataclass(frozen=True)
class PhaseEstimate:
    """An m-bit phase: bits (b1..bm) and the value 0.b1...bm."""

    bits: tuple[int, ...]
    value: float

    def __post_init__(self):
        bits = _validated_bits(self.bits)
        if len(bits) < 1:
            raise ContractError("estimate needs at least one bit")
        object.__setattr__(self, "bits", bits)
        numerator = 0
        for b in bits:
            numerator = (numerator << 1) | b
        exact = numerator / (1 << len(bits))
        if self.value != exact:
            raise ContractError(f"value {self.value!r} does not equal 0.{bits} = {exact!r}")

    @classmethod
    def from_bits(cls, bits) -> "PhaseEstimate":
        bits = _validated_bits(bits)
        numerator = 0
        for b in bits:
            numerator = (numerator << 1) | b
        return cls(bits=bits, value=numerator / (1 << len(bits)))

    def as_string(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True, eq=False)
class EigenproblemSpec:
    """A unitary together with the prepared target state."""

    unitary: Unitary
    input_state: StateVector

    def __post_init__(self):
        if self.unitary.dim != self.input_state.dim:
            raise ContractError(
                f"unitary dim {self.unitary.dim} does not match "
                f"target dim {self.input_state.dim}"
            )


@dataclass(frozen=True, eq=False)
class ControlledOutcome:
    """Provider output: the control+target state, plus bookkeeping.

    ``relabel`` is True when the realization requires flipping the
    measured bit (the odd-parity branch of the optical scheme);
    ``branch`` names the post-selected branch if there is one.
    """

    state: StateVector
    relabel: bool = False
    branch: str | None = None


@dataclass(frozen=True, eq=False)
class CollapseResult:
    """Full-register run on an arbitrary input: estimate plus collapse."""

    estimate: PhaseEstimate
    collapsed_target: StateVector
    outcome_probability: float


@dataclass(frozen=True, eq=False)
class MixedCollapseResult:
    """Like CollapseResult, for runs degraded to a mixed target."""

    estimate: PhaseEstimate
    collapsed_target: "qmath.DensityMatrix"
    outcome_probability: float


@dataclass(frozen=True)
class ExactIpeaResult:
    """Deterministic run: bit choices plus their analytic posteriors.

    ``bit_posteriors[i]`` is the probability of the bit chosen at round
    k = m - i (rounds are ordered as executed, last bit first).
    """

    estimate: PhaseEstimate
    bit_posteriors: tuple[float, ...]


def _phase_on_control(state: StateVector, omega: float) -> StateVector:
    # diag(1, e^{i*omega}) on qubit 0; only the relative phase matters.
    amps = state.amplitudes.copy()
    half = amps.size // 2
    amps[half:] *= np.exp(1j * omega)
    return StateVector(state.num_qubits, amps)


def ancilla_bit_distribution(state: StateVector, omega: float) -> tuple[float, float]:
    """(P(+), P(-)) on the control qubit after the feedback rotation."""
    rotated = _phase_on_control(state, omega)
    return qmath.outcome_probabilities(rotated, 0, qmath.PLUS_MINUS)


def _unitary_power_matrix(unitary: Unitary, k: int) -> np.ndarray:
    if k < 1:
        raise ContractError(f"iteration index k must be >= 1, got {k}")
    if k > 63:
        raise ContractError(f"iteration index k={k} is out of range")
    return np.linalg.matrix_power(unitary.matrix, 1 << (k - 1))


class MatrixProvider:
    """Realize C-U^(2^(k-1)) as the explicit block matrix diag(I, W)."""

    name = "matrix"

    def controlled_state(
        self, unitary: Unitary, target: StateVector, k: int, rng=None
    ) -> ControlledOutcome:
        w = _unitary_power_matrix(unitary, k)
        if w.shape[0] != target.dim:
            raise ContractError(
                f"unitary dim {w.shape[0]} does not match target dim {target.dim}"
            )
        amps = np.concatenate([target.amplitudes, w @ target.amplitudes]) * _SQRT1_2
        return ControlledOutcome(StateVector(target.num_qubits + 1, amps))

    def bit_distribution(
        self, unitary: Unitary, target: StateVector, k: int, omega: float
    ) -> tuple[float, float]:
        out = self.controlled_state(unitary, target, k)
        return ancilla_bit_distribution(out.state, omega)


def resolve_provider(provider):
    """Accept 'matrix', 'photonic', or any provider-shaped object."""
    if isinstance(provider, str):
        if provider == "matrix":
            return MatrixProvider()
        if provider == "photonic":
            from .photonics import PhotonicProvider

            return PhotonicProvider()
        raise ContractError(f"unknown provider {provider!r}")
    if hasattr(provider, "controlled_state") and hasattr(provider, "bit_distribution"):
        return provider
    raise ContractError(f"object {provider!r} does not implement the provider interface")


def ipea_iteration(
    spec: EigenproblemSpec,
    k: int,
    plan: IterationPlan,
    provider,
    rng: np.random.Generator,
) -> tuple[int, StateVector]:
    """One round: entangle, rotate by the feedback angle, measure.

    Returns the extracted bit and the post-measurement target state.
    The provider realizes C-U^(2^(k-1)); if it post-selected an
    odd-parity branch the raw outcome is flipped before use.
    """
    if k != plan.k:
        raise ContractError(f"plan is for k={plan.k}, called with k={k}")
    provider = resolve_provider(provider)
    out = provider.controlled_state(spec.unitary, spec.input_state, k, rng)
    rotated = _phase_on_control(out.state, plan.omega_k)
    mo = qmath.measure(rotated, 0, qmath.PLUS_MINUS, rng)
    bit = mo.outcome_index
    if out.relabel:
        bit ^= 1
    prob, target = qmath.condition(rotated, 0, qmath.PLUS_MINUS, mo.outcome_index)
    if target is None:  # pragma: no cover - sampling never lands on a null branch
        raise ContractError("measured outcome has zero weight")
    return bit, target


def _check_reps(reps_per_bit: int) -> None:
    if reps_per_bit < 1 or reps_per_bit % 2 == 0:
        raise ContractError(
            f"reps_per_bit must be odd and >= 1 so majority votes are decisive, "
            f"got {reps_per_bit}"
        )


def ipea_run(
    spec: EigenproblemSpec,
    m: int,
    reps_per_bit: int = 11,
    provider="matrix",
    rng: np.random.Generator | None = None,
) -> PhaseEstimate:
    """Iterative m-bit estimate with per-bit majority voting.

    Rounds run k = m down to 1; each round repeats ``reps_per_bit``
    times (odd, so the vote is decisive) and the majority bit feeds the
    next round's rotation.  The caller asserts the input is an
    eigenstate; the target is re-prepared fresh for every repetition.
    """
    if m < 1:
        raise ContractError(f"bit count m must be >= 1, got {m}")
    _check_reps(reps_per_bit)
    if rng is None:
        raise ContractError("ipea_run samples and therefore needs an explicit rng")
    provider = resolve_provider(provider)
    tail: list[int] = []
    for k in range(m, 0, -1):
        plan = IterationPlan.for_iteration(m, k, tail)
        ones = 0
        for _ in range(reps_per_bit):
            bit, _ = ipea_iteration(spec, k, plan, provider, rng)
            ones += bit
        tail.insert(0, 1 if ones > reps_per_bit // 2 else 0)
    return PhaseEstimate.from_bits(tail)


def ipea_run_exact(spec: EigenproblemSpec, m: int, provider="matrix") -> ExactIpeaResult:
    """Deterministic variant: each bit is the argmax of its posterior.

    No sampling happens; the provider's analytic bit distribution is
    used directly (for the optical provider that is the average over
    all parity branches, with odd branches already relabeled).  Ties
    resolve to bit 0.
    """
    if m < 1:
        raise ContractError(f"bit count m must be >= 1, got {m}")
    provider = resolve_provider(provider)
    tail: list[int] = []
    posteriors: list[float] = []
    for k in range(m, 0, -1):
        omega = feedback_angle(k, tail)
        p0, p1 = provider.bit_distribution(spec.unitary, spec.input_state, k, omega)
        bit = 1 if p1 > p0 else 0
        posteriors.append(p1 if bit else p0)
        tail.insert(0, bit)
    return ExactIpeaResult(PhaseEstimate.from_bits(tail), tuple(posteriors))


def _check_register_size(m: int) -> None:
    if m < 1:
        raise ContractError(f"register size m must be >= 1, got {m}")
    if (1 << m) ** 2 > max_amplitudes():
        raise CapacityError(
            f"a {m}-qubit Fourier matrix needs {(1 << m) ** 2} entries, "
            f"cap is {max_amplitudes()}"
        )


def qft(m: int) -> Unitary:
    """Fourier transform on m qubits, entries 2^(-m/2) e^{+2i pi jk / 2^m}."""
    _check_register_size(m)
    dim = 1 << m
    j = np.arange(dim)
    return Unitary(np.exp(2j * np.pi * np.outer(j, j) / dim) / np.sqrt(dim))


def inverse_qft(m: int) -> Unitary:
    """Inverse Fourier transform, entries 2^(-m/2) e^{-2i pi jk / 2^m}."""
    _check_register_size(m)
    dim = 1 << m
    j = np.arange(dim)
    return Unitary(np.exp(-2j * np.pi * np.outer(j, j) / dim) / np.sqrt(dim))


def _controlled_stage(unitary: Unitary, input_state: StateVector, m: int) -> np.ndarray:
    """Register x target amplitudes after H^m and all controlled powers.

    Rows are register values (qubit 0 of the register is the most
    significant bit), columns are target basis labels.
    """
    if m < 1:
        raise ContractError(f"register size m must be >= 1, got {m}")
    t = input_state.num_qubits
    if unitary.dim != input_state.dim:
        raise ContractError(
            f"unitary dim {unitary.dim} does not match target dim {input_state.dim}"
        )
    if m + t > max_qubits():
        raise CapacityError(
            f"{m}-qubit register plus {t}-qubit target exceeds the "
            f"{max_qubits()}-qubit cap"
        )
    dim = 1 << m
    stage = np.outer(np.full(dim, 1.0 / np.sqrt(dim)), input_state.amplitudes)
    # squares[e] = U^(2^e); register qubit j controls U^(2^(m-1-j)).
    squares = [unitary.matrix]
    for _ in range(m - 1):
        squares.append(squares[-1] @ squares[-1])
    x = np.arange(dim)
    for j in range(m):
        w = squares[m - 1 - j]
        rows = (x >> (m - 1 - j)) & 1 == 1
        stage[rows] = stage[rows] @ w.T
    return stage


def qpe_full_distribution(spec: EigenproblemSpec, m: int) -> np.ndarray:
    """Exact register distribution of the full m-qubit circuit.

    Entry x is the probability of reading the register value x, whose
    binary digits (most significant first) are the phase bits.  The
    target is traced out, so the table is exact for any input.
    """
    stage = _controlled_stage(spec.unitary, spec.input_state, m)
    rotated = inverse_qft(m).matrix @ stage
    probs = np.sum(np.abs(rotated) ** 2, axis=1)
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-9:
        raise ContractError(f"distribution does not sum to 1: {total!r}")
    return probs


def _premeasure_matrix(unitary: Unitary, input_state: StateVector, m: int) -> np.ndarray:
    stage = _controlled_stage(unitary, input_state, m)
    return inverse_qft(m).matrix @ stage


def collapse_project(
    unitary: Unitary, input_state: StateVector, m: int, outcome: int
) -> tuple[float, StateVector | None]:
    """Probability and conditional target for one register outcome."""
    rotated = _premeasure_matrix(unitary, input_state, m)
    if not 0 <= outcome < rotated.shape[0]:
        raise ContractError(f"outcome {outcome} out of range for m={m}")
    row = rotated[outcome]
    prob = float(np.sum(np.abs(row) ** 2))
    if prob <= 1e-24:
        return 0.0, None
    return prob, StateVector(input_state.num_qubits, row / np.sqrt(prob))


def collapse_run(
    unitary: Unitary, input_state: StateVector, m: int, rng: np.random.Generator
) -> CollapseResult:
    """Run the coherent full-register circuit and read every control.

    For a superposition of eigenstates the register outcome picks one
    eigenphase (with probability given by the input's weight on that
    eigenvector) and the target collapses onto the matching eigenstate.
    """
    rotated = _premeasure_matrix(unitary, input_state, m)
    probs = np.sum(np.abs(rotated) ** 2, axis=1)
    probs = probs / probs.sum()
    x = int(rng.choice(probs.size, p=probs))
    prob = float(probs[x])
    target = StateVector(input_state.num_qubits, rotated[x] / np.sqrt(prob))
    return CollapseResult(PhaseEstimate.from_bits(bits_of(x, m)), target, prob)


def _mixed_outcome_block(
    stage: np.ndarray, q_row: np.ndarray, control_coherence: float
) -> np.ndarray:
    """Unnormalized conditional target density for one register outcome.

    The degradation keeps a ``control_coherence`` fraction of the
    coherent term and replaces the rest with the register-dephased
    mixture (cross-register coherences zeroed before the final
    rotation).
    """
    p = control_coherence
    amp = q_row @ stage
    coherent = np.outer(amp, amp.conj())
    weights = np.abs(q_row) ** 2
    dephased = np.einsum("x,xj,xl->jl", weights, stage, stage.conj())
    return p * coherent + (1.0 - p) * dephased


def _check_coherence(control_coherence: float) -> None:
    if not 0.0 <= control_coherence <= 1.0:
        raise ContractError(
            f"control_coherence must lie in [0, 1], got {control_coherence!r}"
        )


def collapse_project_mixed(
    unitary: Unitary,
    input_state: StateVector,
    m: int,
    outcome: int,
    control_coherence: float,
) -> tuple[float, "qmath.DensityMatrix | None"]:
    """Mixed-state analog of ``collapse_project``.

    Models partial distinguishability of the control: coherence between
    the control register's computational branches survives only with
    weight ``control_coherence``.
    """
    _check_coherence(control_coherence)
    stage = _controlled_stage(unitary, input_state, m)
    q = inverse_qft(m).matrix
    if not 0 <= outcome < q.shape[0]:
        raise ContractError(f"outcome {outcome} out of range for m={m}")
    block = _mixed_outcome_block(stage, q[outcome], control_coherence)
    prob = float(np.trace(block).real)
    if prob <= 1e-24:
        return 0.0, None
    return prob, qmath.DensityMatrix.from_matrix(block / prob)


def collapse_run_mixed(
    unitary: Unitary,
    input_state: StateVector,
    m: int,
    rng: np.random.Generator,
    control_coherence: float,
) -> MixedCollapseResult:
    """Sampled full-register run with degraded control coherence."""
    _check_coherence(control_coherence)
    stage = _controlled_stage(unitary, input_state, m)
    q = inverse_qft(m).matrix
    blocks = [_mixed_outcome_block(stage, q[x], control_coherence) for x in range(q.shape[0])]
    probs = np.array([np.trace(b).real for b in blocks])
    probs = probs / probs.sum()
    x = int(rng.choice(probs.size, p=probs))
    prob = float(probs[x])
    rho = qmath.DensityMatrix.from_matrix(blocks[x] / np.trace(blocks[x]).real)
    return MixedCollapseResult(PhaseEstimate.from_bits(bits_of(x, m)), rho, prob)


def circular_distance(a: float, b: float) -> float:
    """Distance between two phases on the unit circle, in [0, 0.5]."""
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)
