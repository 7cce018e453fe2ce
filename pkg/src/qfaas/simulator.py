"""Gate-level statevector simulator.

State is a dense array of 2^n complex amplitudes.  Basis-state index order
puts qubit 0 at the least-significant bit, so |q_{n-1} ... q_1 q_0> lives at
index sum(q_k * 2^k).  Counts keys render the most-significant qubit first,
matching that ket notation.

Controlled gates are applied by conditional index iteration rather than by
building the full 2^n x 2^n matrix; the independent test oracle does build
the full matrix, which keeps the two implementations honest.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple, TYPE_CHECKING

import numpy as np

from .config import DEFAULT_MAX_QUBITS
from .errors import IndexOutOfRange, MalformedGate, QubitLimitExceeded

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, types only
    from .ir import Circuit


class GateKind(str, enum.Enum):
    U = "u"
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    P = "p"
    CNOT = "cx"
    SWAP = "swap"
    PERMUTATION = "permutation"


# Fixed matrices stay exact (no trig round-off) so algebraic cancellations,
# e.g. H H |0> = |0>, come out bit-exact where IEEE arithmetic allows.
_SQRT_HALF = 1.0 / math.sqrt(2.0)
_FIXED_1Q = {
    GateKind.H: np.array([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]]),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]]),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}

_PARAM_COUNT = {GateKind.U: 3, GateKind.P: 1}


@dataclass(frozen=True)
class Gate:
    """One circuit operation: a unitary on `targets`, conditioned on `controls`.

    params carries (theta,) for P and (theta, phi, lam) for U; perm_table is a
    bijection over the targets' joint basis, present only for PERMUTATION.
    """

    kind: GateKind
    targets: Tuple[int, ...]
    params: Tuple[float, ...] = ()
    controls: Tuple[int, ...] = ()
    perm_table: Optional[Tuple[int, ...]] = None

    def validate(self, num_qubits: int) -> None:
        for q in (*self.targets, *self.controls):
            if not 0 <= q < num_qubits:
                raise IndexOutOfRange(
                    f"gate {self.kind.value} touches qubit {q}, "
                    f"circuit has {num_qubits}"
                )
        if set(self.targets) & set(self.controls):
            raise MalformedGate(
                f"gate {self.kind.value} reuses a qubit as target and control"
            )
        if len(set(self.targets)) != len(self.targets):
            raise MalformedGate(f"gate {self.kind.value} repeats a target qubit")

        want = _PARAM_COUNT.get(self.kind, 0)
        if len(self.params) != want:
            raise MalformedGate(
                f"gate {self.kind.value} takes {want} parameter(s), "
                f"got {len(self.params)}"
            )
        if self.kind is GateKind.SWAP:
            if len(self.targets) != 2:
                raise MalformedGate("swap takes exactly 2 targets")
        elif self.kind is GateKind.CNOT:
            if len(self.targets) != 1 or len(self.controls) < 1:
                raise MalformedGate("cx takes 1 control and 1 target")
        elif self.kind is GateKind.PERMUTATION:
            if not self.targets:
                raise MalformedGate("permutation takes at least 1 target")
            if self.perm_table is None:
                raise MalformedGate("permutation gate is missing its table")
            size = 2 ** len(self.targets)
            if len(self.perm_table) != size or sorted(self.perm_table) != list(
                range(size)
            ):
                raise MalformedGate(
                    "permutation table must be a bijection on "
                    f"range({size})"
                )
        else:
            if len(self.targets) != 1:
                raise MalformedGate(
                    f"gate {self.kind.value} takes exactly 1 target"
                )
        if self.kind is not GateKind.PERMUTATION and self.perm_table is not None:
            raise MalformedGate(
                f"gate {self.kind.value} does not take a permutation table"
            )


# Terse constructors; builders read like circuit diagrams with these.
def h(q: int) -> Gate:
    return Gate(GateKind.H, (q,))


def x(q: int) -> Gate:
    return Gate(GateKind.X, (q,))


def y(q: int) -> Gate:
    return Gate(GateKind.Y, (q,))


def z(q: int) -> Gate:
    return Gate(GateKind.Z, (q,))


def p(theta: float, q: int) -> Gate:
    return Gate(GateKind.P, (q,), (theta,))


def u(theta: float, phi: float, lam: float, q: int) -> Gate:
    return Gate(GateKind.U, (q,), (theta, phi, lam))


def cx(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (target,), controls=(control,))


def cp(theta: float, control: int, target: int) -> Gate:
    return Gate(GateKind.P, (target,), (theta,), controls=(control,))


def swap(a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b))


def permutation(
    targets: Sequence[int],
    table: Sequence[int],
    controls: Sequence[int] = (),
) -> Gate:
    return Gate(
        GateKind.PERMUTATION,
        tuple(targets),
        controls=tuple(controls),
        perm_table=tuple(int(v) for v in table),
    )


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())


class Counts(Dict[str, int]):
    """Bitstring -> occurrences, with the total shot count attached."""

    def __init__(self, data: Dict[str, int], shots: int):
        super().__init__(data)
        self.shots = shots


def _zero_state(num_qubits: int) -> StateVector:
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def new_state(num_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    if not 1 <= num_qubits <= max_qubits:
        raise QubitLimitExceeded(
            f"circuit needs {num_qubits} qubits, allowed range is 1..{max_qubits}",
            detail={"requested": num_qubits, "max_qubits": max_qubits},
        )
    return _zero_state(num_qubits)


def single_qubit_unitary(theta: float, phi: float, lam: float) -> np.ndarray:
    """The general single-qubit gate U(theta, phi, lambda)."""
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (lam + phi)) * c],
        ]
    )


def _matrix_1q(gate: Gate) -> np.ndarray:
    if gate.kind in _FIXED_1Q:
        return _FIXED_1Q[gate.kind]
    if gate.kind is GateKind.CNOT:
        return _FIXED_1Q[GateKind.X]
    if gate.kind is GateKind.P:
        return np.array([[1, 0], [0, np.exp(1j * gate.params[0])]])
    if gate.kind is GateKind.U:
        return single_qubit_unitary(*gate.params)
    raise MalformedGate(f"no single-qubit matrix for {gate.kind.value}")


def _control_mask(indices: np.ndarray, controls: Iterable[int]) -> np.ndarray:
    mask = np.ones(indices.shape, dtype=bool)
    for c in controls:
        mask &= (indices >> c) & 1 == 1
    return mask


def _apply_inplace(amps: np.ndarray, num_qubits: int, gate: Gate) -> None:
    gate.validate(num_qubits)
    indices = np.arange(amps.size, dtype=np.int64)

    if gate.kind is GateKind.SWAP:
        a, b = gate.targets
        sel = ((indices >> a) & 1 == 1) & ((indices >> b) & 1 == 0)
        sel &= _control_mask(indices, gate.controls)
        src = indices[sel]
        dst = src - (1 << a) + (1 << b)
        amps[src], amps[dst] = amps[dst], amps[src]
        return

    if gate.kind is GateKind.PERMUTATION:
        table = np.asarray(gate.perm_table, dtype=np.int64)
        sel = _control_mask(indices, gate.controls)
        src = indices[sel]
        sub = np.zeros(src.shape, dtype=np.int64)
        for j, q in enumerate(gate.targets):
            sub |= ((src >> q) & 1) << j
        mapped = table[sub]
        dst = src.copy()
        for j, q in enumerate(gate.targets):
            dst &= ~np.int64(1 << q)
            dst |= ((mapped >> j) & 1) << q
        # The permutation is a bijection on the selected subspace, so the
        # scatter below writes every selected position exactly once.
        moved = amps[src]
        amps[dst] = moved
        return

    # All remaining kinds are a 2x2 unitary on one target.
    m = _matrix_1q(gate)
    t = gate.targets[0]
    sel = ((indices >> t) & 1 == 0) & _control_mask(indices, gate.controls)
    lo = indices[sel]
    hi = lo + (1 << t)
    a0 = amps[lo]
    a1 = amps[hi]
    amps[lo] = m[0, 0] * a0 + m[0, 1] * a1
    amps[hi] = m[1, 0] * a0 + m[1, 1] * a1


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    out = state.copy()
    _apply_inplace(out.amplitudes, out.num_qubits, gate)
    return out


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def marginal_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Measurement distribution over `qubits`; qubits[j] supplies output bit j."""
    probs = probabilities(state)
    if tuple(qubits) == tuple(range(state.num_qubits)):
        return probs
    indices = np.arange(probs.size, dtype=np.int64)
    sub = np.zeros(probs.size, dtype=np.int64)
    for j, q in enumerate(qubits):
        sub |= ((indices >> q) & 1) << j
    return np.bincount(sub, weights=probs, minlength=2 ** len(qubits))


def sample_counts(
    state: StateVector, qubits: Sequence[int], shots: int, seed: int
) -> Counts:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = marginal_probabilities(state, qubits)
    probs = probs / probs.sum()

    rng = np.random.Generator(np.random.PCG64(seed))
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0  # guard cumulative round-off at the top end
    drawn = np.searchsorted(cdf, rng.random(shots), side="right")
    tally = np.bincount(drawn, minlength=probs.size)

    width = len(qubits)
    seen = np.nonzero(tally)[0]
    data = {format(int(v), f"0{width}b"): int(tally[v]) for v in seen}
    return Counts(data, shots)


def measure_all(state: StateVector, shots: int, seed: int) -> Counts:
    return sample_counts(state, range(state.num_qubits), shots, seed)


def final_state(circuit: "Circuit") -> StateVector:
    """Statevector after all gates, before measurement.

    The qubit cap was already enforced when the circuit was built, so this
    trusts circuit.num_qubits rather than re-checking against a default.
    """
    if circuit.num_qubits < 1:
        raise QubitLimitExceeded("circuit has no qubits")
    state = _zero_state(circuit.num_qubits)
    for gate in circuit.gates:
        _apply_inplace(state.amplitudes, state.num_qubits, gate)
    return state


def run_circuit(circuit: "Circuit", shots: int, seed: int) -> Counts:
    return sample_counts(final_state(circuit), circuit.measured_qubits, shots, seed)
