"""Brute-force state-vector backend.

Ground truth for the tableau engine, and the only backend that accepts
RX/RY/RZ rotations and spin measurements along arbitrary directions.
Amplitude index convention: qubit 0 is the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, Conditional, Gate, Measure
from .errors import CapacityError, DimensionError, InvalidObservableError, NormalizationError
from .pauli import PauliString

MAX_QUBITS = 24
STABILIZED_TOL = 1e-10
NORM_TOL = 1e-12

_S2 = 1 / np.sqrt(2)
PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_FIXED = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "X": PAULI_MATRICES["X"],
    "Y": PAULI_MATRICES["Y"],
    "Z": PAULI_MATRICES["Z"],
}


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    """2x2 unitary of a single-qubit gate; rotations are exp(-i angle P / 2)."""
    kind = kind.upper()
    if kind in _FIXED:
        return _FIXED[kind]
    if kind in ("RX", "RY", "RZ"):
        if angle is None:
            raise ValueError(f"{kind} needs an angle")
        p = PAULI_MATRICES[kind[1]]
        return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * p
    raise ValueError(f"no single-qubit matrix for {kind!r}")


def spin_matrix(direction: Sequence[float]) -> np.ndarray:
    """sigma . m = m_x X + m_y Y + m_z Z for a unit vector m."""
    m = _unit(direction)
    return m[0] * PAULI_MATRICES["X"] + m[1] * PAULI_MATRICES["Y"] + m[2] * PAULI_MATRICES["Z"]


def _unit(direction: Sequence[float]) -> np.ndarray:
    m = np.asarray(getattr(direction, "vector", direction), dtype=float)
    if m.shape != (3,):
        raise NormalizationError(f"direction must be a 3-vector, got shape {m.shape}")
    if abs(np.linalg.norm(m) - 1.0) > 1e-9:
        raise NormalizationError(f"direction {m.tolist()} is not a unit vector")
    return m


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense 2**n x 2**n matrix by Kronecker products (qubit 0 leftmost)."""
    out = np.array([[1j ** p.phase]], dtype=complex)
    for q in range(p.n):
        out = np.kron(out, PAULI_MATRICES[p.char(q)])
    return out


class DenseState:
    def __init__(self, n: int, amplitudes: np.ndarray | None = None, debug: bool = False):
        if n < 1:
            raise DimensionError(f"qubit count must be positive, got {n}")
        if n > MAX_QUBITS:
            raise CapacityError(f"dense backend is capped at {MAX_QUBITS} qubits, got {n}")
        self.n = n
        if amplitudes is None:
            amplitudes = np.zeros(1 << n, dtype=complex)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.array(amplitudes, dtype=complex).reshape(-1)
            if amplitudes.size != 1 << n:
                raise DimensionError(f"expected {1 << n} amplitudes, got {amplitudes.size}")
        self.amplitudes = amplitudes
        self.debug = debug

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amplitudes.copy(), self.debug)

    @property
    def nbytes(self) -> int:
        return self.amplitudes.nbytes

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.n:
            raise DimensionError(f"qubit {q} out of range for n={self.n}")

    def _after(self) -> "DenseState":
        if self.debug and abs(self.norm - 1.0) > NORM_TOL:
            raise AssertionError(f"norm drifted to {self.norm!r}")
        return self

    # gates -----------------------------------------------------------------

    def apply_matrix(self, u: np.ndarray, q: int) -> "DenseState":
        self._check_qubit(q)
        psi = self.amplitudes.reshape(1 << q, 2, -1)
        self.amplitudes = np.einsum("ab,lbr->lar", u, psi).reshape(-1)
        return self._after()

    def cnot(self, c: int, t: int) -> "DenseState":
        self._check_qubit(c)
        self._check_qubit(t)
        if c == t:
            raise DimensionError("CNOT control and target must differ")
        psi = self.amplitudes.reshape((2,) * self.n)
        a = [slice(None)] * self.n
        b = [slice(None)] * self.n
        a[c] = b[c] = 1
        a[t], b[t] = 0, 1
        a, b = tuple(a), tuple(b)
        tmp = psi[a].copy()
        psi[a] = psi[b]
        psi[b] = tmp
        return self._after()

    def apply_gate(self, gate: Gate | str, *qubits: int, angle: float | None = None) -> "DenseState":
        if isinstance(gate, Gate):
            kind, qubits, angle = gate.kind, gate.qubits, gate.angle
        else:
            kind = gate.upper()
        if kind in ("CNOT", "CX"):
            return self.cnot(*qubits)
        if len(qubits) != 1:
            raise DimensionError(f"{kind} takes one qubit")
        return self.apply_matrix(gate_matrix(kind, angle), qubits[0])

    def apply_pauli(self, p: PauliString) -> "DenseState":
        """Multiply the state by the Pauli string ``p`` in place."""
        if p.n != self.n:
            raise DimensionError(f"Pauli has {p.n} qubits, state has {self.n}")
        xm = zm = 0
        n_y = 0
        for q in range(self.n):
            bit = 1 << (self.n - 1 - q)
            c = p.char(q)
            if c in "XY":
                xm |= bit
            if c in "ZY":
                zm |= bit
            n_y += c == "Y"
        idx = np.arange(1 << self.n)
        parity = np.bitwise_count(idx & zm) & 1
        coeff = (1j ** ((p.phase + n_y) % 4)) * (1 - 2 * parity.astype(float))
        out = np.empty_like(self.amplitudes)
        out[idx ^ xm] = coeff * self.amplitudes
        self.amplitudes = out
        return self

    # observables -----------------------------------------------------------

    def is_stabilized_by(self, p: PauliString | str, tol: float = STABILIZED_TOL) -> bool:
        """True iff ||p|psi> - |psi>|| < tol."""
        if isinstance(p, str):
            p = PauliString.from_label(p)
        if not p.is_hermitian:
            raise InvalidObservableError(f"{p.to_label()} is not Hermitian")
        moved = self.copy().apply_pauli(p).amplitudes
        return float(np.linalg.norm(moved - self.amplitudes)) < tol

    def expectation_pauli(self, p: PauliString | str) -> float:
        if isinstance(p, str):
            p = PauliString.from_label(p)
        if not p.is_hermitian:
            raise InvalidObservableError(f"{p.to_label()} is not Hermitian")
        moved = self.copy().apply_pauli(p).amplitudes
        return float(np.vdot(self.amplitudes, moved).real)

    def expectation_spin(self, qubit: int, direction: Sequence[float]) -> float:
        """<psi| sigma.m on ``qubit`` |psi>."""
        moved = self.copy().apply_matrix(spin_matrix(direction), qubit).amplitudes
        return float(np.vdot(self.amplitudes, moved).real)

    def expectation_spin_pair(
        self, q1: int, dir1: Sequence[float], q2: int, dir2: Sequence[float]
    ) -> float:
        """<psi| (sigma.m on q1) (sigma.n on q2) |psi>."""
        if q1 == q2:
            raise DimensionError("spin pair needs two distinct qubits")
        moved = self.copy().apply_matrix(spin_matrix(dir1), q1)
        moved.apply_matrix(spin_matrix(dir2), q2)
        return float(np.vdot(self.amplitudes, moved.amplitudes).real)

    # measurement -------------------------------------------------------------

    def probability_one(self, qubit: int) -> float:
        self._check_qubit(qubit)
        psi = self.amplitudes.reshape(1 << qubit, 2, -1)
        return float(np.sum(np.abs(psi[:, 1, :]) ** 2))

    def measure(
        self, qubit: int, rng: np.random.Generator | None = None, forced: int | None = None
    ) -> int:
        """Born-rule Z measurement; returns +1/-1 and collapses in place."""
        p1 = self.probability_one(qubit)
        if forced is None:
            if rng is None:
                raise ValueError("measurement needs an rng or a forced outcome")
            outcome = -1 if rng.random() < p1 else 1
        else:
            outcome = forced
        bit = 0 if outcome == 1 else 1
        prob = p1 if bit else 1.0 - p1
        if prob <= 0.0:
            raise ValueError(f"outcome {outcome} has zero probability")
        psi = self.amplitudes.reshape(1 << qubit, 2, -1)
        psi[:, 1 - bit, :] = 0.0
        self.amplitudes = self.amplitudes / np.sqrt(prob)
        self._after()
        return outcome

    # comparisons / dumps ---------------------------------------------------------

    def fidelity(self, other: "DenseState") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def to_csv(self) -> str:
        lines = ["index,real,imag"]
        for i, a in enumerate(self.amplitudes):
            lines.append(f"{i},{a.real:.12g},{a.imag:.12g}")
        return "\n".join(lines) + "\n"


def prepare_basis(n: int, bitstring: str | None = None, debug: bool = False) -> DenseState:
    """Computational basis state; ``bitstring[0]`` is qubit 0."""
    if n > MAX_QUBITS:
        raise CapacityError(f"dense backend is capped at {MAX_QUBITS} qubits, got {n}")
    st = DenseState(n, debug=debug)
    if bitstring:
        if len(bitstring) != n or set(bitstring) - {"0", "1"}:
            raise DimensionError(f"bitstring {bitstring!r} does not describe {n} qubits")
        st.amplitudes[0] = 0.0
        st.amplitudes[int(bitstring, 2)] = 1.0
    return st


def apply_gate_dense(state: DenseState, gate: Gate | str, *qubits: int, angle: float | None = None) -> DenseState:
    return state.apply_gate(gate, *qubits, angle=angle)


def is_stabilized_by(state: DenseState, p: PauliString | str, tol: float = STABILIZED_TOL) -> bool:
    return state.is_stabilized_by(p, tol)


def expectation_spin(state: DenseState, qubit: int, direction: Sequence[float]) -> float:
    return state.expectation_spin(qubit, direction)


def expectation_spin_pair(state: DenseState, q1: int, dir1, q2: int, dir2) -> float:
    return state.expectation_spin_pair(q1, dir1, q2, dir2)


def measure_dense(state: DenseState, qubit: int, rng: np.random.Generator) -> int:
    return state.measure(qubit, rng)


@dataclass
class DenseRun:
    state: DenseState
    clbits: list[int]

    @property
    def record(self) -> str:
        return "".join(str(b) for b in self.clbits)


def _apply(state: DenseState, clbits: list[int], ins) -> bool:
    if isinstance(ins, Gate):
        state.apply_gate(ins)
    elif isinstance(ins, Conditional):
        if clbits[ins.clbit]:
            state.apply_gate(ins.gate)
    else:
        return False
    return True


def run_circuit_dense(
    circuit: Circuit, seed: int | None = None, rng: np.random.Generator | None = None
) -> DenseRun:
    if rng is None:
        rng = np.random.default_rng(seed)
    state = DenseState(circuit.n_qubits)
    clbits = [0] * circuit.n_clbits
    for ins in circuit:
        if not _apply(state, clbits, ins):
            clbits[ins.clbit] = 0 if state.measure(ins.qubit, rng) == 1 else 1
    return DenseRun(state, clbits)


@dataclass
class DenseBranch:
    clbits: list[int]
    probability: float
    state: DenseState

    @property
    def record(self) -> str:
        return "".join(str(b) for b in self.clbits)


def dense_branches(circuit: Circuit, prune: float = 1e-12) -> list[DenseBranch]:
    """Every measurement branch with its Born probability, sorted by record.

    Branches below ``prune`` probability are dropped.
    """
    out: list[DenseBranch] = []
    stack = [(DenseState(circuit.n_qubits), [0] * circuit.n_clbits, 0, 1.0)]
    instructions = circuit.instructions
    while stack:
        state, clbits, pc, prob = stack.pop()
        while pc < len(instructions) and _apply(state, clbits, instructions[pc]):
            pc += 1
        if pc == len(instructions):
            out.append(DenseBranch(clbits, prob, state))
            continue
        m: Measure = instructions[pc]
        p1 = state.probability_one(m.qubit)
        for bit, pb in ((0, 1.0 - p1), (1, p1)):
            if pb * prob < prune or pb <= prune:
                continue
            st = state.copy()
            st.measure(m.qubit, forced=1 - 2 * bit)
            cb = list(clbits)
            cb[m.clbit] = bit
            stack.append((st, cb, pc + 1, prob * pb))
    return sorted(out, key=lambda b: b.record)
