"""Why Clifford circuits never beat the CHSH bound.

Clifford conjugation sends every Pauli axis to a signed Pauli axis, so on a
stabilizer state the only observables available are Pauli ones and every
correlation is 0 or +-1.  The functions here check this on the Bloch sphere
and on all two-qubit stabilizer states, and contrast it with arbitrary
spin directions evaluated on the dense backend.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .bell import CHSHSettings, DenseBackend, VIOLATING_ANGLES, chsh_from_correlations, chsh_value
from .circuit import Circuit, Gate, corpus_circuit, random_clifford_circuit
from .errors import ConsistencyError, DimensionError, UnsupportedGateError
from .pauli import PauliString, conjugate
from .statevector import DenseState
from .tableau import StabilizerTableau, new_zero_state, run_circuit

AXES = "XYZ"
BELL_STATES = ("phiplus", "psiplus", "phiminus", "psiminus")


def conjugate_pauli_by_circuit(p: PauliString, circuit: Circuit) -> PauliString:
    """U p U^dagger for the unitary U of a measurement-free Clifford circuit."""
    if p.n != circuit.n_qubits:
        raise DimensionError(f"Pauli has {p.n} qubits, circuit has {circuit.n_qubits}")
    for ins in circuit:
        if not isinstance(ins, Gate):
            raise UnsupportedGateError(f"{ins} is not a unitary Clifford gate")
        if not ins.is_clifford:
            raise UnsupportedGateError(f"{ins.kind} is not a Clifford gate")
        p = conjugate(p, ins.kind, ins.qubits)
    return p


# single-qubit Bloch geometry -----------------------------------------------------


@dataclass(frozen=True)
class BlochRotation:
    matrix: np.ndarray  # column j is the image of axis j (X, Y, Z)
    angle: float
    axis: np.ndarray | None


def axis_action(circuit: Circuit) -> np.ndarray:
    """Signed permutation matrix of a one-qubit Clifford circuit on (X, Y, Z)."""
    if circuit.n_qubits != 1:
        raise DimensionError("axis action is defined for single-qubit circuits")
    m = np.zeros((3, 3), dtype=int)
    for j, kind in enumerate(AXES):
        img = conjugate_pauli_by_circuit(PauliString.from_label(kind), circuit)
        if img.is_identity or not img.is_hermitian:
            raise ConsistencyError(f"{kind} mapped to {img}")
        m[AXES.index(img.char(0)), j] = img.sign
    return m


def _is_signed_permutation(m: np.ndarray) -> bool:
    a = np.abs(m)
    return bool(
        np.all((a == 0) | (a == 1)) and np.all(a.sum(axis=0) == 1) and np.all(a.sum(axis=1) == 1)
    )


def rotation_from_matrix(m: np.ndarray) -> BlochRotation:
    if not _is_signed_permutation(m) or round(np.linalg.det(m)) != 1:
        raise ConsistencyError(f"axis action is not a proper signed permutation:\n{m}")
    angle = math.acos(max(-1.0, min(1.0, (np.trace(m) - 1) / 2)))
    axis = None
    if 1e-9 < angle < math.pi - 1e-9:
        w = np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]], dtype=float)
        axis = w / (2 * math.sin(angle))
    elif angle >= math.pi - 1e-9:
        # (M + I) / 2 = n n^T for a half turn; the sign of n is arbitrary
        outer = (m + np.eye(3)) / 2
        col = outer[:, int(np.argmax(np.diag(outer)))]
        axis = col / np.linalg.norm(col)
    return BlochRotation(m, angle, axis)


def bloch_rotation_of(circuit: Circuit) -> BlochRotation:
    """Rotation of the Bloch sphere performed by a one-qubit Clifford circuit.

    The angle comes from the trace, in [0, pi]. The axis is None for the
    identity and defined only up to sign for a half turn.
    """
    return rotation_from_matrix(axis_action(circuit))


def clifford_axis_actions() -> list[np.ndarray]:
    """Closure of the H and S axis actions under composition."""
    gens = [axis_action(Circuit(1).h(0)), axis_action(Circuit(1).s(0))]
    seen = {np.eye(3, dtype=int).tobytes(): np.eye(3, dtype=int)}
    frontier = list(seen.values())
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                prod = g @ m
                key = prod.tobytes()
                if key not in seen:
                    seen[key] = prod
                    nxt.append(prod)
        frontier = nxt
    return sorted(seen.values(), key=lambda a: a.tobytes())


def proper_signed_permutations() -> list[np.ndarray]:
    """All 3x3 signed permutation matrices with determinant +1 (24 of them)."""
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3), dtype=int)
            for col, (row, s) in enumerate(zip(perm, signs)):
                m[row, col] = s
            if round(np.linalg.det(m)) == 1:
                out.append(m)
    return sorted(out, key=lambda a: a.tobytes())


# two-qubit CHSH audit -------------------------------------------------------------


@dataclass(frozen=True)
class AuditResult:
    value: float
    settings: tuple[str, str, str, str]  # A, A', B, B'
    rows: tuple[tuple[str, str, str, str, float], ...]


def stabilizer_chsh_audit(tableau: StabilizerTableau) -> AuditResult:
    """Maximum CHSH over A, A' in {X,Y,Z} on qubit 0 and B, B' on qubit 1.

    Signed axes are left out: a sign flips an E value but cannot raise the
    maximum of the absolute-value combination.
    """
    if tableau.n != 2:
        raise DimensionError(f"audit needs a 2-qubit tableau, got {tableau.n}")
    e = {
        (a, b): tableau.expectation_pauli(PauliString.from_label(a + b))
        for a in AXES
        for b in AXES
    }
    rows = []
    for a, ap, b, bp in itertools.product(AXES, repeat=4):
        v = float(chsh_from_correlations(e[a, b], e[a, bp], e[ap, b], e[ap, bp]))
        rows.append((a, ap, b, bp, v))
    best = max(rows, key=lambda r: r[4])
    return AuditResult(best[4], best[:4], tuple(rows))


def bell_tableaus() -> dict[str, StabilizerTableau]:
    return {name: run_circuit(corpus_circuit(f"bell_{name}")).tableau for name in BELL_STATES}


def all_two_qubit_stabilizer_states() -> dict[tuple[str, ...], StabilizerTableau]:
    """Every 2-qubit stabilizer state reachable from |00> (there are 60)."""
    start = new_zero_state(2)
    seen = {tuple(start.canonical_labels()): start}
    frontier = [start]
    moves = [("H", (0,)), ("H", (1,)), ("S", (0,)), ("S", (1,)), ("CNOT", (0, 1)), ("CNOT", (1, 0))]
    while frontier:
        nxt = []
        for t in frontier:
            for kind, qs in moves:
                u = t.copy().apply_gate(kind, *qs)
                key = tuple(u.canonical_labels())
                if key not in seen:
                    seen[key] = u
                    nxt.append(u)
        frontier = nxt
    return dict(sorted(seen.items()))


def random_stabilizer_states(count: int, seed: int | None = None, depth: int = 24) -> list[StabilizerTableau]:
    """Two-qubit states from random {H, S, CNOT} circuits of fixed depth."""
    rng = np.random.default_rng(seed)
    return [run_circuit(random_clifford_circuit(2, depth, rng)).tableau for _ in range(count)]


def nonclifford_witness(circuit: Circuit, settings: CHSHSettings, q1: int = 0, q2: int = 1) -> float:
    """CHSH of the circuit's output state for arbitrary spin directions."""
    state = DenseState(circuit.n_qubits)
    for ins in circuit:
        if not isinstance(ins, Gate):
            raise UnsupportedGateError("witness circuits must be measurement-free")
        state.apply_gate(ins)
    return chsh_value(settings, DenseBackend(state, q1, q2))


def singlet_witness() -> float:
    return nonclifford_witness(corpus_circuit("bell_psiminus"), CHSHSettings.planar(*VIOLATING_ANGLES))


# single-qubit preparations of the six stabilizer states +-X, +-Y, +-Z
_ONE_QUBIT_PREP = {
    "+Z": (), "-Z": ("X",), "+X": ("H",), "-X": ("X", "H"), "+Y": ("H", "S"), "-Y": ("X", "H", "S"),
}


def product_stabilizer_states() -> dict[str, StabilizerTableau]:
    out = {}
    for (la, pa), (lb, pb) in itertools.product(_ONE_QUBIT_PREP.items(), repeat=2):
        c = Circuit(2)
        for g in pa:
            c.gate(g, 0)
        for g in pb:
            c.gate(g, 1)
        out[f"product_{la}{lb}"] = run_circuit(c).tableau
    return out


@dataclass
class AuditReport:
    results: dict[str, AuditResult]
    nonclifford: float

    @property
    def pauli_max(self) -> float:
        return max(r.value for r in self.results.values())

    def summary(self) -> str:
        return f"pauli_max={self.pauli_max:.9f} nonclifford={self.nonclifford:.9f}"

    def to_csv(self, all_quadruples: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("state_id", "A", "Aprime", "B", "Bprime", "chsh"))
        for sid, res in self.results.items():
            rows = res.rows if all_quadruples else [(*res.settings, res.value)]
            for a, ap, b, bp, v in rows:
                w.writerow((sid, a, ap, b, bp, f"{v:.9f}"))
        return buf.getvalue() + self.summary() + "\n"


def run_audit(
    n_random: int = 100,
    seed: int | None = 0,
    product_only: bool = False,
    states: Mapping[str, StabilizerTableau] | None = None,
) -> AuditReport:
    """Audit the Bell tableaus plus ``n_random`` random two-qubit states.

    With ``product_only`` the audit covers the 36 product stabilizer states
    instead.
    """
    if states is None:
        if product_only:
            states = product_stabilizer_states()
        else:
            states = dict(bell_tableaus())
            for i, t in enumerate(random_stabilizer_states(n_random, seed)):
                states[f"random_{i:04d}"] = t
    results = {sid: stabilizer_chsh_audit(t) for sid, t in states.items()}
    return AuditReport(results, singlet_witness())


def audit_states(states: Iterable[StabilizerTableau]) -> list[float]:
    return [stabilizer_chsh_audit(t).value for t in states]
