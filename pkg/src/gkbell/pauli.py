"""Exact n-qubit Pauli group arithmetic on packed bit masks.

A :class:`PauliString` is ``i**phase * P_0 (x) P_1 (x) ... (x) P_{n-1}`` where
qubit ``q`` carries X, Z or Y according to bit ``q`` of ``x`` and ``z``
(``x=1, z=1`` is Y itself, not XZ).  The masks are Python ints, so every
product, commutation test and conjugation is a handful of word-parallel
bit operations regardless of ``n``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    CapacityError,
    DimensionError,
    DomainError,
    InvalidObservableError,
    ParseError,
    UnsupportedGateError,
)

_PREFIXES = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_SIGNS = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_CHARS = "IXZY"  # index = x | (z << 1)


def _mask(n: int) -> int:
    return (1 << n) - 1


def _product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent of i picked up by the single-qubit products, summed over qubits."""
    anti = (x1 & z2) ^ (z1 & x2)
    if not anti:
        return 0
    # cyclic pairs X*Y, Y*Z, Z*X give +i; the reversed pairs give -i
    plus = (
        (x1 & ~z1 & x2 & z2)
        | (x1 & z1 & ~x2 & z2)
        | (~x1 & z1 & x2 & ~z2)
    ) & anti
    return plus.bit_count() - (anti & ~plus).bit_count()


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DimensionError(f"qubit count must be positive, got {self.n}")
        m = _mask(self.n)
        if self.x & ~m or self.z & ~m or self.x < 0 or self.z < 0:
            raise DimensionError(f"bit masks exceed {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction -----------------------------------------------------

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels such as ``"+XXI"``, ``"-iYZ"`` or ``"ZZ"``."""
        body_start = 0
        while body_start < len(label) and label[body_start] in "+-i":
            body_start += 1
        prefix, body = label[:body_start], label[body_start:]
        if prefix not in _PREFIXES:
            raise ParseError(f"malformed phase prefix {prefix!r} in {label!r}", column=1)
        if not body:
            raise ParseError(f"no Pauli characters in {label!r}", column=body_start + 1)
        x = z = 0
        for q, ch in enumerate(body):
            k = _CHARS.find(ch.upper()) if ch.upper() in _CHARS else -1
            if k < 0:
                raise ParseError(
                    f"invalid Pauli character {ch!r} at position {body_start + q} of {label!r}",
                    column=body_start + q + 1,
                )
            x |= (k & 1) << q
            z |= (k >> 1) << q
        return cls(len(body), x, z, _PREFIXES[prefix])

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str, phase: int = 0) -> "PauliString":
        """``kind`` (one of I, X, Y, Z) on ``qubit``, identity elsewhere."""
        if not 0 <= qubit < n:
            raise DimensionError(f"qubit {qubit} out of range for n={n}")
        k = _CHARS.index(kind)
        return cls(n, (k & 1) << qubit, (k >> 1) << qubit, phase)

    # views ------------------------------------------------------------

    def to_label(self) -> str:
        return _SIGNS[self.phase] + "".join(self.char(q) for q in range(self.n))

    def char(self, qubit: int) -> str:
        return _CHARS[((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)]

    def __str__(self) -> str:
        return self.to_label()

    def __repr__(self) -> str:
        return f"PauliString({self.to_label()!r})"

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian strings."""
        if not self.is_hermitian:
            raise InvalidObservableError(f"{self.to_label()} is not Hermitian")
        return 1 if self.phase == 0 else -1

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def sort_key(self) -> tuple[int, int, int]:
        return (self.z, self.x, self.phase)

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, phase)

    def __neg__(self) -> "PauliString":
        return self.with_phase(self.phase + 2)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def require_hermitian(self) -> "PauliString":
        if not self.is_hermitian:
            raise InvalidObservableError(
                f"{self.to_label()} is not Hermitian; observables need phase +1 or -1"
            )
        return self

    def conjugate(self, gate: str, qubits: Sequence[int]) -> "PauliString":
        """Return ``U P U^dagger`` for a Clifford gate ``U``."""
        return conjugate(self, gate, qubits)


def _check_same(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise DimensionError(f"qubit count mismatch: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Group product ``a * b`` with the phase tracked exactly."""
    _check_same(a, b)
    k = a.phase + b.phase + _product_phase(a.x, a.z, b.x, b.z)
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, k)


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_same(a, b)
    return (((a.x & b.z) ^ (a.z & b.x)).bit_count() & 1) == 0


def weight(a: PauliString) -> int:
    return a.weight()


def from_label(label: str) -> PauliString:
    return PauliString.from_label(label)


def to_label(p: PauliString) -> str:
    return p.to_label()


@dataclass(frozen=True)
class Closure:
    """Result of :func:`group_closure`: canonically ordered elements."""

    elements: tuple[PauliString, ...]
    contains_minus_identity: bool

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, p: object) -> bool:
        return p in self.elements

    def labels(self) -> list[str]:
        return [p.to_label() for p in self.elements]


def group_closure(generators: Iterable[PauliString], cap: int = 1 << 16, n: int | None = None) -> Closure:
    """Multiplicative closure of ``generators``, identity included.

    ``n`` is only needed when ``generators`` is empty.  A group containing
    ``-I`` stabilizes no state; that case is flagged rather than raised.
    """
    gens = list(generators)
    if cap < 1:
        raise DomainError(f"cap must be positive, got {cap}")
    if gens:
        n = gens[0].n
        for g in gens[1:]:
            _check_same(gens[0], g)
    elif n is None:
        raise DimensionError("qubit count required for an empty generating set")
    seen = {PauliString.identity(n)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for el in frontier:
            for g in gens:
                prod = multiply(el, g)
                if prod not in seen:
                    seen.add(prod)
                    if len(seen) > cap:
                        raise CapacityError(f"closure exceeds cap of {cap} elements")
                    nxt.append(prod)
        frontier = nxt
    elements = tuple(sorted(seen, key=PauliString.sort_key))
    minus_i = PauliString(n, 0, 0, 2) in seen
    return Closure(elements, minus_i)


def conjugate(p: PauliString, gate: str, qubits: Sequence[int]) -> PauliString:
    """Heisenberg update of a single string under one Clifford gate."""
    g = gate.upper()
    x, z, k = p.x, p.z, p.phase
    if g == "CNOT" or g == "CX":
        c, t = qubits
        if c == t:
            raise DimensionError("CNOT control and target must differ")
        for q in (c, t):
            if not 0 <= q < p.n:
                raise DimensionError(f"qubit {q} out of range for n={p.n}")
        xc, zc = (x >> c) & 1, (z >> c) & 1
        xt, zt = (x >> t) & 1, (z >> t) & 1
        k += 2 * (xc & zt & (xt ^ zc ^ 1))
        x ^= xc << t
        z ^= zt << c
        return PauliString(p.n, x, z, k)
    if len(qubits) != 1:
        raise DimensionError(f"gate {gate} acts on one qubit, got {list(qubits)}")
    (q,) = qubits
    if not 0 <= q < p.n:
        raise DimensionError(f"qubit {q} out of range for n={p.n}")
    xq, zq = (x >> q) & 1, (z >> q) & 1
    bit = 1 << q
    if g == "H":
        k += 2 * (xq & zq)
        if xq != zq:
            x ^= bit
            z ^= bit
    elif g == "S":
        k += 2 * (xq & zq)
        z ^= xq << q
    elif g == "SDG":
        k += 2 * (xq & (zq ^ 1))
        z ^= xq << q
    elif g == "X":
        k += 2 * zq
    elif g == "Y":
        k += 2 * (xq ^ zq)
    elif g == "Z":
        k += 2 * xq
    else:
        raise UnsupportedGateError(
            f"gate {gate!r} is not a Clifford gate; only H, S, X, Y, Z, CNOT "
            "are simulable under Gottesman-Knill"
        )
    return PauliString(p.n, x, z, k)


def all_pauli_strings(n: int) -> Iterable[PauliString]:
    """Every unsigned n-qubit string (4**n of them), in label order."""
    for chars in itertools.product("IXYZ", repeat=n):
        yield PauliString.from_label("".join(chars))
