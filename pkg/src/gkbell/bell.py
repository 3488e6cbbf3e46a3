"""Spin correlation models and the CHSH functional.

Models share one interface, ``correlation(m, n) -> E`` with ``E`` in
[-1, 1], so the CHSH value can be evaluated the same way for the quantum
singlet, Bell's sign-function hidden-variable model (closed form or Monte
Carlo), and the two simulators.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, NormalizationError, UnsupportedObservableError
from .pauli import PauliString

UNIT_TOL = 1e-9
TSIRELSON = 2 * math.sqrt(2)


@dataclass(frozen=True)
class Direction:
    """Unit 3-vector for a spin measurement."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        norm = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if abs(norm - 1.0) > UNIT_TOL:
            raise NormalizationError(f"({self.x}, {self.y}, {self.z}) has norm {norm}, not 1")

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "Direction":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    @classmethod
    def planar(cls, angle: float) -> "Direction":
        """Direction in the x-z plane at ``angle`` from +z towards +x."""
        return cls(math.sin(angle), 0.0, math.cos(angle))

    @classmethod
    def axis(cls, label: str) -> "Direction":
        """``"X"``, ``"-Z"`` and so on."""
        sign = -1.0 if label.startswith("-") else 1.0
        kind = label.lstrip("+-").upper()
        v = [0.0, 0.0, 0.0]
        v["XYZ".index(kind)] = sign
        return cls(*v)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "Direction") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def pauli_axis(self) -> tuple[str, int] | None:
        """``(kind, sign)`` if this is a signed Pauli axis, else None."""
        for kind, c in zip("XYZ", (self.x, self.y, self.z)):
            if abs(abs(c) - 1.0) <= UNIT_TOL:
                return kind, (1 if c > 0 else -1)
        return None


class HiddenVariable(Direction):
    """The shared unit vector assigned to both subsystems at preparation."""


def angle_between(m: Direction, n: Direction) -> float:
    return math.acos(max(-1.0, min(1.0, m.dot(n))))


@dataclass(frozen=True)
class CHSHSettings:
    m: Direction
    m_prime: Direction
    n: Direction
    n_prime: Direction

    @classmethod
    def planar(cls, a: float, a_prime: float, b: float, b_prime: float) -> "CHSHSettings":
        return cls(*(Direction.planar(t) for t in (a, a_prime, b, b_prime)))

    def __iter__(self) -> Iterator[Direction]:
        return iter((self.m, self.m_prime, self.n, self.n_prime))


# orientations of m, m', n, n' that violate the LHV bound
VIOLATING_ANGLES = (0.0, math.pi / 2, math.pi / 4, -math.pi / 4)


# single-trial outcomes -------------------------------------------------------


class Party(enum.Enum):
    ALICE = "alice"
    BOB = "bob"


def _sign(v: float) -> int:
    return 1 if v >= 0 else -1


def lhv_outcome(lam: Direction, direction: Direction, party: Party | str) -> int:
    """Alice reports sign(m.lambda), Bob -sign(n.lambda); sign(0) is +1."""
    party = Party(party) if isinstance(party, str) else party
    s = _sign(direction.dot(lam))
    return s if party is Party.ALICE else -s


def _check_theta(theta: float) -> float:
    if not (0.0 <= theta <= math.pi) or math.isnan(theta):
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    return theta


def lhv_joint_probabilities(theta: float) -> tuple[float, float, float, float]:
    """(P(+,+), P(-,-), P(+,-), P(-,+)) for uniformly distributed lambda."""
    _check_theta(theta)
    same = theta / (2 * math.pi)
    diff = 0.5 * (1 - theta / math.pi)
    return same, same, diff, diff


def lhv_correlation(theta: float) -> float:
    _check_theta(theta)
    return 2 * theta / math.pi - 1


def singlet_correlation(m: Direction, n: Direction) -> float:
    return -m.dot(n)


# Monte Carlo -------------------------------------------------------------------


def _sphere_block(seed: np.random.SeedSequence, size: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((size, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_hidden_variables(samples: int, seed: int | None, workers: int = 1) -> np.ndarray:
    """``(samples, 3)`` uniform points on the unit sphere.

    Samples are split into ``workers`` contiguous blocks, each from its own
    spawned stream, so the result depends on ``(seed, workers)`` only.
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    if workers < 1:
        raise DomainError("need at least one worker")
    seeds = np.random.SeedSequence(seed).spawn(workers)
    sizes = [samples // workers + (1 if w < samples % workers else 0) for w in range(workers)]
    if workers == 1:
        return _sphere_block(seeds[0], sizes[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(_sphere_block, seeds, sizes))
    return np.concatenate(blocks)


def _outcomes(lams: np.ndarray, d: Direction) -> np.ndarray:
    return np.where(lams @ d.vector >= 0, 1, -1)


class MonteCarloEstimate(NamedTuple):
    estimate: float
    stderr: float


def _estimate(products: np.ndarray) -> MonteCarloEstimate:
    k = products.size
    mean = float(products.mean())
    if k < 2:
        return MonteCarloEstimate(mean, math.inf)
    return MonteCarloEstimate(mean, float(products.std(ddof=1) / math.sqrt(k)))


def lhv_monte_carlo(
    m: Direction, n: Direction, samples: int, seed: int | None = None, workers: int = 1
) -> MonteCarloEstimate:
    """Mean of A*B over uniformly sampled lambda, with its standard error."""
    lams = sample_hidden_variables(samples, seed, workers)
    return _estimate(_outcomes(lams, m) * -_outcomes(lams, n))


def lhv_joint_frequencies(
    m: Direction, n: Direction, samples: int, seed: int | None = None, workers: int = 1
) -> tuple[float, float, float, float]:
    """Empirical (++, --, +-, -+) frequencies of the sign model."""
    lams = sample_hidden_variables(samples, seed, workers)
    a, b = _outcomes(lams, m), -_outcomes(lams, n)
    return (
        float(np.mean((a == 1) & (b == 1))),
        float(np.mean((a == -1) & (b == -1))),
        float(np.mean((a == 1) & (b == -1))),
        float(np.mean((a == -1) & (b == 1))),
    )


# correlation models ----------------------------------------------------------------


class CorrelationModel:
    name = "model"

    def correlation(self, m: Direction, n: Direction) -> float:
        raise NotImplementedError

    def correlation_planar(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """E for x-z plane angles, broadcasting over arrays."""
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        out = np.empty(a.shape)
        for idx in np.ndindex(a.shape):
            out[idx] = self.correlation(Direction.planar(a[idx]), Direction.planar(b[idx]))
        return out


class QuantumSinglet(CorrelationModel):
    """Closed-form singlet correlation -m.n."""

    name = "singlet"

    def correlation(self, m: Direction, n: Direction) -> float:
        return singlet_correlation(m, n)

    def correlation_planar(self, a, b):
        return -np.cos(np.asarray(a) - np.asarray(b))


class LHVClosedForm(CorrelationModel):
    """Bell's sign model averaged analytically: 2 theta / pi - 1."""

    name = "lhv"

    def correlation(self, m: Direction, n: Direction) -> float:
        return lhv_correlation(angle_between(m, n))

    def correlation_planar(self, a, b):
        theta = np.arccos(np.clip(np.cos(np.asarray(a) - np.asarray(b)), -1.0, 1.0))
        return 2 * theta / np.pi - 1


class LHVMonteCarlo(CorrelationModel):
    """Sign model averaged over one fixed sample of hidden variables.

    All correlations of one instance share the same lambda sample, so a CHSH
    value computed from it is itself a hidden-variable average.
    """

    name = "lhv-mc"

    def __init__(self, samples: int = 100_000, seed: int | None = None, workers: int = 1):
        self.samples, self.seed, self.workers = samples, seed, workers
        self._lams: np.ndarray | None = None

    @property
    def hidden_variables(self) -> np.ndarray:
        if self._lams is None:
            self._lams = sample_hidden_variables(self.samples, self.seed, self.workers)
        return self._lams

    def estimate(self, m: Direction, n: Direction) -> MonteCarloEstimate:
        lams = self.hidden_variables
        return _estimate(_outcomes(lams, m) * -_outcomes(lams, n))

    def correlation(self, m: Direction, n: Direction) -> float:
        return self.estimate(m, n).estimate


class DenseBackend(CorrelationModel):
    """Spin correlations of two qubits of a state vector."""

    name = "dense"

    def __init__(self, state, q1: int = 0, q2: int = 1):
        self.state, self.q1, self.q2 = state, q1, q2

    def correlation(self, m: Direction, n: Direction) -> float:
        return self.state.expectation_spin_pair(self.q1, m.vector, self.q2, n.vector)


class TableauBackend(CorrelationModel):
    """Correlations read off a stabilizer tableau; Pauli axes only."""

    name = "tableau"

    def __init__(self, tableau, q1: int = 0, q2: int = 1):
        self.tableau, self.q1, self.q2 = tableau, q1, q2

    def correlation(self, m: Direction, n: Direction) -> float:
        am, an = m.pauli_axis(), n.pauli_axis()
        for d, ax in ((m, am), (n, an)):
            if ax is None:
                raise UnsupportedObservableError(
                    f"direction {tuple(d.vector.round(12))} is not a signed Pauli axis; "
                    "a stabilizer tableau only answers Pauli observables"
                )
        chars = ["I"] * self.tableau.n
        chars[self.q1], chars[self.q2] = am[0], an[0]
        e = self.tableau.expectation_pauli(PauliString.from_label("".join(chars)))
        return float(am[1] * an[1] * e)


MODELS = {"singlet": QuantumSinglet, "lhv": LHVClosedForm, "lhv-mc": LHVMonteCarlo}


# CHSH ------------------------------------------------------------------------------


def chsh_from_correlations(e_mn: float, e_mnp: float, e_mpn: float, e_mpnp: float):
    """|E(m,n) + E(m,n')| + |E(m',n) - E(m',n')|; works elementwise on arrays."""
    return np.abs(e_mn + e_mnp) + np.abs(e_mpn - e_mpnp)


def chsh_value(settings: CHSHSettings, model: CorrelationModel) -> float:
    m, mp, n, np_ = settings
    return float(
        chsh_from_correlations(
            model.correlation(m, n),
            model.correlation(m, np_),
            model.correlation(mp, n),
            model.correlation(mp, np_),
        )
    )


def chsh_planar(model: CorrelationModel, a, ap, b, bp) -> np.ndarray:
    """CHSH for x-z plane angles, broadcasting over arrays."""
    e = model.correlation_planar
    return chsh_from_correlations(e(a, b), e(a, bp), e(ap, b), e(ap, bp))


def chsh_grid_values(model: CorrelationModel, angles: Sequence[float]) -> np.ndarray:
    """CHSH at every quadruple drawn from ``angles``; shape ``(k, k, k, k)``."""
    g = np.asarray(angles, dtype=float)
    a, ap, b, bp = np.meshgrid(g, g, g, g, indexing="ij")
    return chsh_planar(model, a, ap, b, bp)


@dataclass(frozen=True)
class SearchResult:
    value: float
    angles: tuple[float, float, float, float]

    @property
    def settings(self) -> CHSHSettings:
        return CHSHSettings.planar(*self.angles)


def chsh_max_search(
    model: CorrelationModel, resolution: int = 16, refinement_rounds: int = 30
) -> SearchResult:
    """Maximize CHSH over four in-plane angles.

    A ``resolution**4`` grid over [-pi, pi) is followed by rounds of a 5**4
    local grid around the incumbent, halving the step each round.
    """
    if resolution < 8:
        raise DomainError("resolution must be at least 8 points per angle")
    grid = np.linspace(-np.pi, np.pi, resolution, endpoint=False)
    values = chsh_grid_values(model, grid)
    idx = np.unravel_index(int(np.argmax(values)), values.shape)
    best = np.array([grid[i] for i in idx])
    best_value = float(values[idx])
    step = 2 * np.pi / resolution
    offsets = np.linspace(-1.0, 1.0, 5)
    for _ in range(refinement_rounds):
        axes = [best[k] + step * offsets for k in range(4)]
        mesh = np.meshgrid(*axes, indexing="ij")
        vals = chsh_planar(model, *mesh)
        j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[j] > best_value:
            best_value = float(vals[j])
            best = np.array([axes[k][j[k]] for k in range(4)])
        step /= 2
    return SearchResult(best_value, tuple(float(t) for t in best))


# deterministic local strategies -------------------------------------------------------


def deterministic_strategies() -> list[tuple[int, int, int, int]]:
    """All 16 assignments (A(m), A(m'), B(n), B(n')) in {+1, -1}**4."""
    return list(itertools.product((1, -1), repeat=4))


def strategy_correlations(weights: Sequence[float]) -> tuple[float, float, float, float]:
    """E(m,n), E(m,n'), E(m',n), E(m',n') for a mixture of deterministic strategies."""
    w = np.asarray(weights, dtype=float)
    s = np.array(deterministic_strategies(), dtype=float)
    if w.shape != (len(s),) or np.any(w < 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-12):
        raise DomainError("weights must be a probability vector over the 16 strategies")
    a, ap, b, bp = s.T
    return tuple(float(w @ v) for v in (a * b, a * bp, ap * b, ap * bp))


def strategy_chsh(weights: Sequence[float]) -> float:
    return float(chsh_from_correlations(*strategy_correlations(weights)))


# sweeps -------------------------------------------------------------------------------

SWEEP_HEADER = ("model", "theta_m", "theta_mp", "theta_n", "theta_np", "chsh")


def sweep_family(phis: Iterable[float]) -> list[tuple[float, float, float, float]]:
    """The one-parameter family (0, 2 phi, phi, -phi); phi = pi/4 is optimal."""
    return [(0.0, 2 * p, p, -p) for p in phis]


def chsh_sweep(model: CorrelationModel, quadruples: Iterable[Sequence[float]]) -> list[tuple]:
    rows = []
    for q in quadruples:
        rows.append((model.name, *q, chsh_value(CHSHSettings.planar(*q), model)))
    return rows


def sweep_csv(rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for name, *vals in rows:
        w.writerow([name, *(f"{v + 0.0:.9g}" for v in vals)])
    return buf.getvalue()
