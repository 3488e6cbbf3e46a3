"""Circuit model, the line-oriented text format, and random Clifford circuits.

Text grammar, one instruction per line::

    qubits 3
    clbits 2
    h 0                 # also s, x, y, z
    cnot 0 1
    rz 0.3 0            # rx / ry / rz take an angle in radians first
    measure 1 -> 0
    cif 0 x 2           # apply "x 2" iff classical bit 0 is 1

Angles may also be written as ``pi``, ``-pi/4``, ``3*pi/2`` and so on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Union

import numpy as np

from .errors import DimensionError, ParseError

CLIFFORD_GATES = ("H", "S", "X", "Y", "Z", "CNOT")
ROTATION_GATES = ("RX", "RY", "RZ")
_ARITY = {"H": 1, "S": 1, "X": 1, "Y": 1, "Z": 1, "CNOT": 2, "RX": 1, "RY": 1, "RZ": 1}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    @property
    def is_clifford(self) -> bool:
        return self.kind in CLIFFORD_GATES

    def __str__(self) -> str:
        qs = " ".join(str(q) for q in self.qubits)
        if self.angle is not None:
            return f"{self.kind.lower()} {self.angle!r} {qs}"
        return f"{self.kind.lower()} {qs}"


@dataclass(frozen=True)
class Measure:
    qubit: int
    clbit: int

    def __str__(self) -> str:
        return f"measure {self.qubit} -> {self.clbit}"


@dataclass(frozen=True)
class Conditional:
    clbit: int
    gate: Gate

    def __str__(self) -> str:
        return f"cif {self.clbit} {self.gate}"


Instruction = Union[Gate, Measure, Conditional]


@dataclass
class Circuit:
    """Ordered instruction list over ``n_qubits`` qubits and ``n_clbits`` bits.

    Builder methods return ``self`` so circuits can be written inline:
    ``Circuit(2).h(0).cnot(0, 1)``.
    """

    n_qubits: int
    n_clbits: int = 0
    instructions: list[Instruction] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise DimensionError(f"circuit needs at least one qubit, got {self.n_qubits}")
        if self.n_clbits < 0:
            raise DimensionError("negative classical bit count")
        for ins in self.instructions:
            self._check(ins)

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def _check_gate(self, gate: Gate) -> None:
        if gate.kind not in _ARITY:
            raise DimensionError(f"unknown gate {gate.kind!r}")
        if len(gate.qubits) != _ARITY[gate.kind]:
            raise DimensionError(f"{gate.kind} takes {_ARITY[gate.kind]} qubit(s)")
        for q in gate.qubits:
            if not 0 <= q < self.n_qubits:
                raise DimensionError(f"qubit {q} out of range for {self.n_qubits} qubits")
        if gate.kind == "CNOT" and gate.qubits[0] == gate.qubits[1]:
            raise DimensionError("CNOT control and target must differ")
        if (gate.kind in ROTATION_GATES) != (gate.angle is not None):
            raise DimensionError(f"{gate.kind}: angle given for the wrong gate kind")

    def _check(self, ins: Instruction) -> None:
        if isinstance(ins, Gate):
            self._check_gate(ins)
        elif isinstance(ins, Measure):
            if not 0 <= ins.qubit < self.n_qubits:
                raise DimensionError(f"qubit {ins.qubit} out of range for {self.n_qubits} qubits")
            if not 0 <= ins.clbit < self.n_clbits:
                raise DimensionError(f"clbit {ins.clbit} out of range for {self.n_clbits} clbits")
        elif isinstance(ins, Conditional):
            if not 0 <= ins.clbit < self.n_clbits:
                raise DimensionError(f"clbit {ins.clbit} out of range for {self.n_clbits} clbits")
            self._check_gate(ins.gate)
        else:
            raise TypeError(f"not an instruction: {ins!r}")

    def append(self, ins: Instruction) -> "Circuit":
        self._check(ins)
        self.instructions.append(ins)
        return self

    def gate(self, kind: str, *qubits: int, angle: float | None = None) -> "Circuit":
        return self.append(Gate(kind.upper(), tuple(qubits), angle))

    def h(self, q: int) -> "Circuit":
        return self.gate("H", q)

    def s(self, q: int) -> "Circuit":
        return self.gate("S", q)

    def x(self, q: int) -> "Circuit":
        return self.gate("X", q)

    def y(self, q: int) -> "Circuit":
        return self.gate("Y", q)

    def z(self, q: int) -> "Circuit":
        return self.gate("Z", q)

    def cnot(self, c: int, t: int) -> "Circuit":
        return self.gate("CNOT", c, t)

    def rx(self, theta: float, q: int) -> "Circuit":
        return self.gate("RX", q, angle=float(theta))

    def ry(self, theta: float, q: int) -> "Circuit":
        return self.gate("RY", q, angle=float(theta))

    def rz(self, theta: float, q: int) -> "Circuit":
        return self.gate("RZ", q, angle=float(theta))

    def measure(self, q: int, c: int) -> "Circuit":
        return self.append(Measure(q, c))

    def cif(self, clbit: int, kind: str, *qubits: int, angle: float | None = None) -> "Circuit":
        return self.append(Conditional(clbit, Gate(kind.upper(), tuple(qubits), angle)))

    @property
    def is_clifford(self) -> bool:
        for ins in self.instructions:
            g = ins.gate if isinstance(ins, Conditional) else ins
            if isinstance(g, Gate) and not g.is_clifford:
                return False
        return True

    @property
    def is_unitary(self) -> bool:
        """True when there are no measurements or classically controlled gates."""
        return all(isinstance(ins, Gate) for ins in self.instructions)

    def to_text(self) -> str:
        lines = [f"qubits {self.n_qubits}"]
        if self.n_clbits:
            lines.append(f"clbits {self.n_clbits}")
        lines.extend(str(ins) for ins in self.instructions)
        return "\n".join(lines) + "\n"


# parsing ---------------------------------------------------------------

_ANGLE_RE = re.compile(
    r"^(?P<sign>[+-]?)(?:(?P<coef>\d+(?:\.\d*)?)\*?)?pi(?:/(?P<den>\d+(?:\.\d*)?))?$"
)


def parse_angle(token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        m = _ANGLE_RE.match(token.lower())
        if not m:
            raise ValueError(f"malformed angle {token!r}") from None
        value = math.pi * float(m["coef"] or 1.0) / float(m["den"] or 1.0)
        if m["sign"] == "-":
            value = -value
    if not math.isfinite(value):
        raise ValueError(f"malformed angle {token!r}")
    return value


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _int_token(tok: tuple[str, int], lineno: int, what: str) -> int:
    text, col = tok
    if not re.fullmatch(r"\d+", text):
        raise ParseError(f"expected {what} index, got {text!r}", lineno, col)
    return int(text)


def _parse_gate(toks: list[tuple[str, int]], lineno: int, circ: Circuit) -> Gate:
    name, col = toks[0]
    kind = name.upper()
    if kind == "CX":
        kind = "CNOT"
    if kind not in _ARITY:
        raise ParseError(f"unknown mnemonic {name!r}", lineno, col)
    args = toks[1:]
    angle = None
    if kind in ROTATION_GATES:
        if not args:
            raise ParseError(f"{name} needs an angle and a qubit", lineno, col)
        try:
            angle = parse_angle(args[0][0])
        except ValueError as exc:
            raise ParseError(str(exc), lineno, args[0][1]) from None
        args = args[1:]
    if len(args) != _ARITY[kind]:
        raise ParseError(
            f"{name} takes {_ARITY[kind]} qubit argument(s), got {len(args)}", lineno, col
        )
    qubits = tuple(_int_token(a, lineno, "qubit") for a in args)
    for q, (_, qcol) in zip(qubits, args):
        if q >= circ.n_qubits:
            raise ParseError(f"qubit {q} out of range for {circ.n_qubits} qubits", lineno, qcol)
    if kind == "CNOT" and qubits[0] == qubits[1]:
        raise ParseError("cnot control and target must differ", lineno, args[1][1])
    return Gate(kind, qubits, angle)


def parse_circuit(text: str) -> Circuit:
    """Parse circuit text; errors carry the 1-based line and column."""
    circ: Circuit | None = None
    n_clbits = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        head, col = toks[0]
        word = head.lower()
        if word == "qubits":
            if circ is not None:
                raise ParseError("qubits declared twice", lineno, col)
            if len(toks) != 2:
                raise ParseError("expected 'qubits <n>'", lineno, col)
            n = _int_token(toks[1], lineno, "qubit count")
            if n < 1:
                raise ParseError("qubit count must be positive", lineno, toks[1][1])
            circ = Circuit(n, n_clbits)
            continue
        if word == "clbits":
            if len(toks) != 2:
                raise ParseError("expected 'clbits <m>'", lineno, col)
            if circ is not None and circ.instructions:
                raise ParseError("clbits must be declared before instructions", lineno, col)
            n_clbits = _int_token(toks[1], lineno, "clbit count")
            if circ is not None:
                circ.n_clbits = n_clbits
            continue
        if circ is None:
            raise ParseError("'qubits <n>' must come before any instruction", lineno, col)
        if word == "measure":
            if len(toks) != 4 or toks[2][0] != "->":
                raise ParseError("expected 'measure <qubit> -> <clbit>'", lineno, col)
            q = _int_token(toks[1], lineno, "qubit")
            c = _int_token(toks[3], lineno, "clbit")
            if q >= circ.n_qubits:
                raise ParseError(f"qubit {q} out of range for {circ.n_qubits} qubits", lineno, toks[1][1])
            if c >= circ.n_clbits:
                raise ParseError(f"clbit {c} out of range for {circ.n_clbits} clbits", lineno, toks[3][1])
            circ.instructions.append(Measure(q, c))
        elif word == "cif":
            if len(toks) < 3:
                raise ParseError("expected 'cif <clbit> <gate line>'", lineno, col)
            c = _int_token(toks[1], lineno, "clbit")
            if c >= circ.n_clbits:
                raise ParseError(f"clbit {c} out of range for {circ.n_clbits} clbits", lineno, toks[1][1])
            circ.instructions.append(Conditional(c, _parse_gate(toks[2:], lineno, circ)))
        else:
            circ.instructions.append(_parse_gate(toks, lineno, circ))
    if circ is None:
        raise ParseError("no 'qubits <n>' declaration found")
    return circ


def load_circuit(path: str | Path) -> Circuit:
    return parse_circuit(Path(path).read_text(encoding="utf-8"))


def corpus_names() -> list[str]:
    files = resources.files(__package__).joinpath("corpus").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".circ"))


def corpus_text(name: str) -> str:
    ref = resources.files(__package__).joinpath("corpus", f"{name}.circ")
    if not ref.is_file():
        raise FileNotFoundError(f"no corpus circuit named {name!r}; have {corpus_names()}")
    return ref.read_text(encoding="utf-8")


def corpus_circuit(name: str) -> Circuit:
    return parse_circuit(corpus_text(name))


# random circuits -------------------------------------------------------

def random_clifford_circuit(
    n_qubits: int,
    n_gates: int,
    rng: np.random.Generator,
    gate_set: tuple[str, ...] = ("H", "S", "CNOT"),
    n_measurements: int = 0,
) -> Circuit:
    """Uniform gate choice from ``gate_set`` with uniform qubit choices.

    This is not a uniform sample of the Clifford group.  Measurements, if
    requested, land at uniformly random positions and write to distinct
    classical bits.
    """
    usable = [g for g in gate_set if g != "CNOT" or n_qubits > 1]
    circ = Circuit(n_qubits, n_measurements)
    for _ in range(n_gates):
        kind = usable[rng.integers(len(usable))]
        if kind == "CNOT":
            c, t = rng.choice(n_qubits, size=2, replace=False)
            circ.cnot(int(c), int(t))
        else:
            circ.gate(kind, int(rng.integers(n_qubits)))
    if n_measurements:
        slots = np.sort(rng.integers(0, n_gates + 1, size=n_measurements))
        for offset, (pos, clbit) in enumerate(zip(slots, range(n_measurements))):
            circ.instructions.insert(int(pos) + offset, Measure(int(rng.integers(n_qubits)), clbit))
    return circ


def inverse_circuit(circ: Circuit) -> Circuit:
    """Inverse of a measurement-free Clifford circuit (S becomes S three times)."""
    if not circ.is_unitary:
        raise DimensionError("only measurement-free circuits can be inverted")
    out = Circuit(circ.n_qubits, circ.n_clbits)
    for g in reversed(circ.instructions):
        if g.kind == "S":
            for _ in range(3):
                out.append(g)
        elif g.kind in ROTATION_GATES:
            out.append(Gate(g.kind, g.qubits, -g.angle))
        else:
            out.append(g)
    return out
