"""Stabilizer tableau simulation of Clifford circuits.

The tableau holds ``n`` destabilizer rows followed by ``n`` stabilizer rows.
Row bits are packed eight qubits per byte (qubit ``q`` is bit ``q & 7`` of
byte ``q >> 3``) in two ``(2n, ceil(n/8))`` uint8 arrays, so one gate is a
few numpy operations over every row at once and storage is Theta(n^2) bits.
Measurement uses the destabilizers to avoid any group-membership search.

Phase gate convention: S = diag(1, i), so S X S^dagger = Y.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .circuit import CLIFFORD_GATES, Circuit, Conditional, Gate, Measure
from .errors import ConsistencyError, DimensionError, InvalidObservableError, UnsupportedGateError
from .pauli import PauliString, commutes, multiply

_popcount = np.bitwise_count


def _to_int(row: np.ndarray) -> int:
    return int.from_bytes(row.tobytes(), "little")


def _from_int(value: int, nbytes: int) -> np.ndarray:
    return np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)


def _unsupported(kind: str) -> UnsupportedGateError:
    return UnsupportedGateError(
        f"gate {kind} is outside the Gottesman-Knill set (H, S, X, Y, Z, CNOT); "
        "use the dense backend for rotations"
    )


class StabilizerTableau:
    """A stabilizer state on ``n`` qubits, mutated in place by gates."""

    def __init__(self, n: int, debug: bool = False):
        if n < 1:
            raise DimensionError(f"qubit count must be positive, got {n}")
        self.n = n
        self.nbytes_row = (n + 7) // 8
        self.xs = np.zeros((2 * n, self.nbytes_row), dtype=np.uint8)
        self.zs = np.zeros((2 * n, self.nbytes_row), dtype=np.uint8)
        self.signs = np.zeros(2 * n, dtype=np.uint8)
        self.debug = debug

    # construction / conversion ------------------------------------------

    @classmethod
    def zero_state(cls, n: int, debug: bool = False) -> "StabilizerTableau":
        t = cls(n, debug=debug)
        for q in range(n):
            t.xs[q, q >> 3] |= 1 << (q & 7)
            t.zs[n + q, q >> 3] |= 1 << (q & 7)
        return t

    @classmethod
    def from_rows(
        cls,
        destabilizers: Sequence[PauliString | str],
        stabilizers: Sequence[PauliString | str],
        debug: bool = False,
    ) -> "StabilizerTableau":
        destabilizers = [_as_pauli(p) for p in destabilizers]
        stabilizers = [_as_pauli(p) for p in stabilizers]
        n = len(stabilizers)
        if len(destabilizers) != n:
            raise DimensionError("need as many destabilizers as stabilizers")
        t = cls(n, debug=debug)
        for i, p in enumerate(list(destabilizers) + list(stabilizers)):
            t.set_row(i, p)
        t.check_invariants()
        return t

    @classmethod
    def from_stabilizers(cls, stabilizers: Sequence[PauliString | str], debug: bool = False) -> "StabilizerTableau":
        """Tableau for independent commuting generators; destabilizers are derived."""
        stabs = [_as_pauli(p).require_hermitian() for p in stabilizers]
        n = len(stabs)
        if n == 0 or any(p.n != n for p in stabs):
            raise DimensionError("need exactly n generators on n qubits")
        for i, a in enumerate(stabs):
            for b in stabs[i + 1 :]:
                if not commutes(a, b):
                    raise InvalidObservableError(f"{a} and {b} anticommute")
        if gf2_rank([(p.x << n) | p.z for p in stabs]) != n:
            raise InvalidObservableError("generators are not independent")
        # d_i . s_j = delta_ij under the symplectic form; the form pairs x with z,
        # so solve with each stabilizer's halves swapped
        rows = [(p.z << n) | p.x for p in stabs]
        destabs: list[PauliString] = []
        for i in range(n):
            v = _gf2_solve(rows, 1 << i, 2 * n)
            d = PauliString(n, v >> n, v & ((1 << n) - 1))
            for j, dj in enumerate(destabs):
                if not commutes(d, dj):
                    d = PauliString(n, d.x ^ stabs[j].x, d.z ^ stabs[j].z)
            destabs.append(d)
        return cls.from_rows(destabs, stabs, debug=debug)

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.nbytes_row = self.nbytes_row
        t.xs = self.xs.copy()
        t.zs = self.zs.copy()
        t.signs = self.signs.copy()
        t.debug = self.debug
        return t

    def row(self, i: int) -> PauliString:
        return PauliString(self.n, _to_int(self.xs[i]), _to_int(self.zs[i]), 2 * int(self.signs[i]))

    def set_row(self, i: int, p: PauliString) -> None:
        if p.n != self.n:
            raise DimensionError(f"row has {p.n} qubits, tableau has {self.n}")
        p.require_hermitian()
        self.xs[i] = _from_int(p.x, self.nbytes_row)
        self.zs[i] = _from_int(p.z, self.nbytes_row)
        self.signs[i] = p.phase // 2

    def stabilizers(self) -> list[PauliString]:
        return [self.row(self.n + i) for i in range(self.n)]

    def destabilizers(self) -> list[PauliString]:
        return [self.row(i) for i in range(self.n)]

    @property
    def nbytes(self) -> int:
        """Bytes held by the tableau arrays."""
        return self.xs.nbytes + self.zs.nbytes + self.signs.nbytes

    def render(self) -> str:
        """Destabilizers then stabilizers, one sign-prefixed label per line."""
        return "\n".join(self.row(i).to_label() for i in range(2 * self.n))

    def __repr__(self) -> str:
        stabs = ", ".join(p.to_label() for p in self.stabilizers())
        return f"StabilizerTableau(n={self.n}, stabilizers=[{stabs}])"

    # gates ----------------------------------------------------------------

    def _bits(self, q: int) -> tuple[int, int, np.ndarray, np.ndarray]:
        if not 0 <= q < self.n:
            raise DimensionError(f"qubit {q} out of range for n={self.n}")
        b, s = q >> 3, q & 7
        return b, s, (self.xs[:, b] >> s) & 1, (self.zs[:, b] >> s) & 1

    def h(self, q: int) -> "StabilizerTableau":
        b, s, xb, zb = self._bits(q)
        self.signs ^= xb & zb
        flip = (xb ^ zb) << s
        self.xs[:, b] ^= flip
        self.zs[:, b] ^= flip
        return self._after()

    def s(self, q: int) -> "StabilizerTableau":
        b, s, xb, zb = self._bits(q)
        self.signs ^= xb & zb
        self.zs[:, b] ^= xb << s
        return self._after()

    def x(self, q: int) -> "StabilizerTableau":
        _, _, _, zb = self._bits(q)
        self.signs ^= zb
        return self._after()

    def y(self, q: int) -> "StabilizerTableau":
        _, _, xb, zb = self._bits(q)
        self.signs ^= xb ^ zb
        return self._after()

    def z(self, q: int) -> "StabilizerTableau":
        _, _, xb, _ = self._bits(q)
        self.signs ^= xb
        return self._after()

    def cnot(self, c: int, t: int) -> "StabilizerTableau":
        if c == t:
            raise DimensionError("CNOT control and target must differ")
        bc, sc, xc, zc = self._bits(c)
        bt, st, xt, zt = self._bits(t)
        self.signs ^= xc & zt & (xt ^ zc ^ 1)
        self.xs[:, bt] ^= xc << st
        self.zs[:, bc] ^= zt << sc
        return self._after()

    def apply_gate(self, gate: Gate | str, *qubits: int) -> "StabilizerTableau":
        """Conjugate every row by a Gottesman-Knill gate."""
        if isinstance(gate, Gate):
            kind, qubits = gate.kind, gate.qubits
        else:
            kind = gate.upper()
            if kind == "CX":
                kind = "CNOT"
        if kind not in CLIFFORD_GATES:
            raise _unsupported(kind)
        if kind == "CNOT":
            if len(qubits) != 2:
                raise DimensionError("CNOT takes two qubits")
            return self.cnot(*qubits)
        if len(qubits) != 1:
            raise DimensionError(f"{kind} takes one qubit")
        return getattr(self, kind.lower())(qubits[0])

    def _after(self) -> "StabilizerTableau":
        if self.debug:
            self.check_invariants()
        return self

    # rows as a group ------------------------------------------------------

    def _anticommuting_rows(self, p: PauliString) -> np.ndarray:
        px = _from_int(p.x, self.nbytes_row)
        pz = _from_int(p.z, self.nbytes_row)
        overlap = (self.xs & pz) ^ (self.zs & px)
        return (_popcount(overlap).sum(axis=1, dtype=np.int64) & 1).astype(bool)

    def _multiply_into(self, targets: np.ndarray, src: int) -> None:
        """rows[targets] <- rows[targets] * rows[src]; all pairs must commute."""
        if targets.size == 0:
            return
        x1, z1 = self.xs[targets], self.zs[targets]
        x2, z2 = self.xs[src], self.zs[src]
        anti = (x1 & z2) ^ (z1 & x2)
        plus = ((x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2)) & anti
        i_power = (
            _popcount(plus).sum(axis=1, dtype=np.int64)
            - _popcount(anti & ~plus).sum(axis=1, dtype=np.int64)
        )
        k = (2 * self.signs[targets].astype(np.int64) + 2 * int(self.signs[src]) + i_power) % 4
        if np.any(k & 1):
            raise ConsistencyError("row product is not Hermitian; rows anticommute")
        self.signs[targets] = (k >> 1).astype(np.uint8)
        self.xs[targets] = x1 ^ x2
        self.zs[targets] = z1 ^ z2

    def _stabilizer_product(self, p: PauliString) -> PauliString:
        """The element of the stabilizer group whose Pauli part equals ``p``'s.

        Only valid when ``p`` commutes with every stabilizer row.
        """
        anti = self._anticommuting_rows(p)
        acc = PauliString.identity(self.n)
        for i in np.flatnonzero(anti[: self.n]):
            acc = multiply(acc, self.row(self.n + int(i)))
        if acc.x != p.x or acc.z != p.z:
            raise ConsistencyError("commuting Pauli not generated by the stabilizer rows")
        return acc

    def _check_observable(self, p: PauliString | str) -> PauliString:
        p = _as_pauli(p)
        if p.n != self.n:
            raise DimensionError(f"observable has {p.n} qubits, tableau has {self.n}")
        if not p.is_hermitian:
            raise InvalidObservableError(f"{p.to_label()} is not Hermitian")
        return p

    def is_deterministic(self, p: PauliString | str) -> bool:
        p = self._check_observable(p)
        return not self._anticommuting_rows(p)[self.n :].any()

    def expectation_pauli(self, p: PauliString | str) -> int:
        """+1 if p is in the stabilizer group, -1 if -p is, else 0."""
        p = self._check_observable(p)
        if self._anticommuting_rows(p)[self.n :].any():
            return 0
        return 1 if self._stabilizer_product(p).phase == p.phase else -1

    def contains(self, p: PauliString | str) -> bool:
        """Whether ``p`` (with its sign) is an element of the stabilizer group."""
        return self.expectation_pauli(p) == 1

    def measure_pauli(
        self,
        p: PauliString | str,
        rng: np.random.Generator | None = None,
        forced: int | None = None,
    ) -> tuple[int, bool]:
        """Measure Hermitian ``p``; returns ``(outcome, deterministic)``.

        A random outcome is one draw of ``rng.integers(2)`` (0 means +1), or
        ``forced`` (+1/-1) when given.  Afterwards ``outcome * p`` is a
        stabilizer generator.
        """
        p = self._check_observable(p)
        anti = self._anticommuting_rows(p)
        stab_anti = np.flatnonzero(anti[self.n :])
        if stab_anti.size == 0:
            value = 1 if self._stabilizer_product(p).phase == p.phase else -1
            if forced is not None and forced != value:
                raise ValueError(f"cannot force outcome {forced}: measurement is deterministic ({value})")
            return value, True
        if forced is not None:
            if forced not in (1, -1):
                raise ValueError("forced outcome must be +1 or -1")
            outcome = forced
        else:
            if rng is None:
                raise ValueError("random measurement needs an rng or a forced outcome")
            outcome = 1 - 2 * int(rng.integers(2))
        pivot = self.n + int(stab_anti[0])
        targets = np.flatnonzero(anti)
        # the paired destabilizer is overwritten below, so it is skipped
        self._multiply_into(targets[(targets != pivot) & (targets != pivot - self.n)], pivot)
        self.xs[pivot - self.n] = self.xs[pivot]
        self.zs[pivot - self.n] = self.zs[pivot]
        self.signs[pivot - self.n] = self.signs[pivot]
        self.set_row(pivot, p if outcome == 1 else -p)
        self._after()
        return outcome, False

    def measure(self, qubit: int, rng: np.random.Generator | None = None, forced: int | None = None) -> tuple[int, bool]:
        """Computational-basis measurement of one qubit."""
        return self.measure_pauli(PauliString.single(self.n, qubit, "Z"), rng, forced)

    # canonical form / invariants -----------------------------------------

    def canonical_form(self) -> list[PauliString]:
        """Reduced row-echelon stabilizer generators.

        Eliminates on X bits by qubit index first, then on Z bits.  Two
        tableaus describe the same state iff these lists are equal.
        """
        rows = self.stabilizers()
        n = self.n
        pivot_row = 0
        for attr in ("x", "z"):
            for q in range(n):
                bit = 1 << q
                found = next(
                    (r for r in range(pivot_row, n) if getattr(rows[r], attr) & bit), None
                )
                if found is None:
                    continue
                rows[pivot_row], rows[found] = rows[found], rows[pivot_row]
                for r in range(n):
                    if r != pivot_row and getattr(rows[r], attr) & bit:
                        rows[r] = multiply(rows[r], rows[pivot_row])
                pivot_row += 1
        return rows

    def canonical_labels(self) -> list[str]:
        return [p.to_label() for p in self.canonical_form()]

    def same_state(self, other: "StabilizerTableau") -> bool:
        return self.n == other.n and self.canonical_form() == other.canonical_form()

    def qubit_stabilizer(self, qubit: int) -> PauliString | None:
        """Signed single-qubit Pauli fixing ``qubit``, or None if it is entangled."""
        for kind in "XYZ":
            p = PauliString.single(self.n, qubit, kind)
            e = self.expectation_pauli(p)
            if e:
                return PauliString.single(1, 0, kind, 0 if e == 1 else 2)
        return None

    def check_invariants(self) -> None:
        stabs = self.stabilizers()
        destabs = self.destabilizers()
        for i, s in enumerate(stabs):
            anti = self._anticommuting_rows(s)
            if anti[self.n :].any():
                raise ConsistencyError(f"stabilizer row {i} anticommutes with another stabilizer")
            expected = np.zeros(self.n, dtype=bool)
            expected[i] = True
            if not np.array_equal(anti[: self.n], expected):
                raise ConsistencyError(f"destabilizer pairing broken at row {i}")
        if gf2_rank([(p.x << self.n) | p.z for p in stabs]) != self.n:
            raise ConsistencyError("stabilizer rows are dependent")
        del destabs


def gf2_rank(rows: list[int]) -> int:
    """Rank over GF(2) of rows given as int bit masks."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def _gf2_solve(rows: list[int], rhs: int, width: int) -> int:
    """A vector v (width bits) with parity(rows[j] & v) = bit j of rhs."""
    m = len(rows)
    aug = [(rows[j], (rhs >> j) & 1) for j in range(m)]
    pivots = []
    r = 0
    for col in range(width - 1, -1, -1):
        bit = 1 << col
        found = next((k for k in range(r, m) if aug[k][0] & bit), None)
        if found is None:
            continue
        aug[r], aug[found] = aug[found], aug[r]
        for k in range(m):
            if k != r and aug[k][0] & bit:
                aug[k] = (aug[k][0] ^ aug[r][0], aug[k][1] ^ aug[r][1])
        pivots.append(col)
        r += 1
    if any(val for vec, val in aug[r:]):
        raise ConsistencyError("inconsistent GF(2) system")
    v = 0
    for k, col in enumerate(pivots):
        if aug[k][1]:
            v |= 1 << col
    return v


def _as_pauli(p: PauliString | str) -> PauliString:
    return PauliString.from_label(p) if isinstance(p, str) else p


def new_zero_state(n: int, debug: bool = False) -> StabilizerTableau:
    return StabilizerTableau.zero_state(n, debug=debug)


def check_clifford(circuit: Circuit) -> None:
    for ins in circuit:
        g = ins.gate if isinstance(ins, Conditional) else ins
        if isinstance(g, Gate) and not g.is_clifford:
            raise _unsupported(g.kind)


# circuit execution ------------------------------------------------------


@dataclass
class TableauRun:
    tableau: StabilizerTableau
    clbits: list[int]

    @property
    def record(self) -> str:
        return "".join(str(b) for b in self.clbits)


def _step(tab: StabilizerTableau, clbits: list[int], ins) -> bool:
    """Apply one non-measurement instruction; False if ``ins`` is a measurement."""
    if isinstance(ins, Gate):
        tab.apply_gate(ins)
    elif isinstance(ins, Conditional):
        if clbits[ins.clbit]:
            tab.apply_gate(ins.gate)
    else:
        return False
    return True


def run_circuit(
    circuit: Circuit,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
    forced: Sequence[int] | None = None,
    debug: bool = False,
) -> TableauRun:
    """Run ``circuit`` from |0...0>.

    Each random measurement consumes one ``rng.integers(2)`` draw unless an
    outcome (+1/-1) is taken from ``forced``, which is consumed in order.
    """
    check_clifford(circuit)
    if rng is None:
        rng = np.random.default_rng(seed)
    pending = list(forced or [])[::-1]
    tab = new_zero_state(circuit.n_qubits, debug=debug)
    clbits = [0] * circuit.n_clbits
    for ins in circuit:
        if _step(tab, clbits, ins):
            continue
        z = PauliString.single(tab.n, ins.qubit, "Z")
        if tab.is_deterministic(z):
            outcome, _ = tab.measure_pauli(z)
        else:
            outcome, _ = tab.measure_pauli(z, rng, pending.pop() if pending else None)
        clbits[ins.clbit] = 0 if outcome == 1 else 1
    return TableauRun(tab, clbits)


class _Node:
    __slots__ = ("tab", "clbits", "pc", "children", "qubit", "clbit")

    def __init__(self, tab: StabilizerTableau, clbits: list[int], pc: int):
        self.tab, self.clbits, self.pc = tab, clbits, pc
        self.children: dict[int, _Node] = {}


class BranchTree:
    """Lazily expanded tree of a circuit's random measurement outcomes.

    Every shot that has seen the same outcomes so far shares the same
    tableau, so sampling many shots costs one simulation per distinct
    branch.
    """

    def __init__(self, circuit: Circuit, debug: bool = False):
        check_clifford(circuit)
        self.circuit = circuit
        self.root = self._advance(
            _Node(new_zero_state(circuit.n_qubits, debug=debug), [0] * circuit.n_clbits, 0)
        )

    def _advance(self, node: _Node) -> _Node:
        instructions = self.circuit.instructions
        while node.pc < len(instructions):
            ins = instructions[node.pc]
            if not _step(node.tab, node.clbits, ins):
                z = PauliString.single(node.tab.n, ins.qubit, "Z")
                if not node.tab.is_deterministic(z):
                    return node
                outcome, _ = node.tab.measure_pauli(z)
                node.clbits[ins.clbit] = 0 if outcome == 1 else 1
            node.pc += 1
        return node

    def child(self, node: _Node, bit: int) -> _Node:
        nxt = node.children.get(bit)
        if nxt is None:
            ins = self.circuit.instructions[node.pc]
            tab = node.tab.copy()
            clbits = list(node.clbits)
            tab.measure_pauli(PauliString.single(tab.n, ins.qubit, "Z"), forced=1 - 2 * bit)
            clbits[ins.clbit] = bit
            nxt = self._advance(_Node(tab, clbits, node.pc + 1))
            node.children[bit] = nxt
        return nxt

    def is_leaf(self, node: _Node) -> bool:
        return node.pc >= len(self.circuit.instructions)

    def sample(self, shots: int, rng: np.random.Generator) -> tuple[np.ndarray, _Node]:
        """Records (as a string array) for ``shots`` runs, and the last shot's leaf.

        Shots reaching a pending measurement are split by one vectorized
        coin draw, depth first with outcome 0 before 1.
        """
        records = np.empty(shots, dtype=object)
        last = None
        stack = [(self.root, np.arange(shots))]
        while stack:
            node, idx = stack.pop()
            if self.is_leaf(node):
                records[idx] = "".join(str(b) for b in node.clbits)
                if idx[-1] == shots - 1:
                    last = node
                continue
            coins = rng.integers(2, size=idx.size)
            for bit in (1, 0):
                sub = idx[coins == bit]
                if sub.size:
                    stack.append((self.child(node, bit), sub))
        return records, last

    def branches(self) -> Iterator["Branch"]:
        """Every leaf with its probability (2**-k for k random outcomes)."""
        stack = [(self.root, 0, ())]
        while stack:
            node, depth, forced = stack.pop()
            if self.is_leaf(node):
                yield Branch(node.clbits, 0.5**depth, node.tab, forced)
                continue
            for bit in (1, 0):
                stack.append((self.child(node, bit), depth + 1, forced + (1 - 2 * bit,)))


@dataclass
class Branch:
    clbits: list[int]
    probability: float
    tableau: StabilizerTableau
    forced: tuple[int, ...] = field(default=())

    @property
    def record(self) -> str:
        return "".join(str(b) for b in self.clbits)


def enumerate_branches(circuit: Circuit) -> list[Branch]:
    return sorted(BranchTree(circuit).branches(), key=lambda b: b.record)


def _sample_block(
    circuit: Circuit, size: int, seed: np.random.SeedSequence
) -> tuple[list[str], StabilizerTableau | None]:
    if size == 0:
        return [], None
    records, leaf = BranchTree(circuit).sample(size, np.random.default_rng(seed))
    return list(records), leaf.tab


def sample_shots(
    circuit: Circuit,
    shots: int,
    seed: int | None = None,
    workers: int = 1,
) -> tuple[list[str], StabilizerTableau]:
    """Per-shot classical records and the final tableau of the last shot.

    Shots are split into ``workers`` contiguous blocks, each driven by its own
    stream spawned from ``seed`` and run in its own process when
    ``workers > 1``.  Output depends only on ``(seed, workers)``.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    if workers < 1:
        raise ValueError("workers must be positive")
    check_clifford(circuit)
    seeds = np.random.SeedSequence(seed).spawn(workers)
    sizes = [shots // workers + (1 if w < shots % workers else 0) for w in range(workers)]
    if workers == 1:
        results = [_sample_block(circuit, sizes[0], seeds[0])]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sample_block, [circuit] * workers, sizes, seeds))
    records = [r for block, _ in results for r in block]
    last = next(tab for _, tab in reversed(results) if tab is not None)
    return records, last
