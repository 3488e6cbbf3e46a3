"""Command line: ``gkbell run | chsh | audit | bench | corpus``.

Exit codes: 0 success, 2 parse error, 3 gate or observable unsupported by
the chosen backend, 4 capacity exceeded, 1 anything else.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bell
from .audit import run_audit
from .bench import bench_csv, run_bench
from .circuit import Circuit, corpus_names, corpus_text, parse_angle, parse_circuit
from .errors import GKError, ParseError
from .statevector import DenseState, run_circuit_dense
from .tableau import check_clifford, sample_shots


@dataclass
class RunRecord:
    seed: int
    backend: str
    shots: int
    workers: int
    records: list[str] = field(default_factory=list)
    final_state: str = ""

    def counts(self) -> list[tuple[str, int]]:
        return sorted(Counter(self.records).items())

    def render(self, per_shot: bool = False) -> str:
        lines = [f"seed={self.seed} backend={self.backend} shots={self.shots} workers={self.workers}"]
        lines.append("record,count,frequency")
        for rec, k in self.counts():
            lines.append(f"{rec or '-'},{k},{k / self.shots:.6f}")
        if per_shot:
            lines.append("shot,record")
            lines.extend(f"{i},{r or '-'}" for i, r in enumerate(self.records))
        lines.append("final_state")
        lines.append(self.final_state.rstrip("\n"))
        return "\n".join(lines) + "\n"


def _dense_block(circuit: Circuit, size: int, seed: np.random.SeedSequence):
    rng = np.random.default_rng(seed)
    records, last = [], None
    for _ in range(size):
        last = run_circuit_dense(circuit, rng=rng)
        records.append(last.record)
    return records, last.state if last else None


def run_shots(circuit: Circuit, backend: str, shots: int, seed: int, workers: int = 1) -> RunRecord:
    """Execute ``shots`` runs; the record depends only on (circuit, seed, backend, workers)."""
    if backend == "tableau":
        records, tab = sample_shots(circuit, shots, seed, workers)
        final = tab.render()
    elif backend == "dense":
        DenseState(circuit.n_qubits)  # fail fast on the qubit cap
        seeds = np.random.SeedSequence(seed).spawn(workers)
        sizes = [shots // workers + (1 if w < shots % workers else 0) for w in range(workers)]
        if workers == 1:
            blocks = [_dense_block(circuit, sizes[0], seeds[0])]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                blocks = list(pool.map(_dense_block, [circuit] * workers, sizes, seeds))
        records = [r for b, _ in blocks for r in b]
        final = next(s for _, s in reversed(blocks) if s is not None).to_csv()
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return RunRecord(seed, backend, shots, workers, records, final)


def _read_circuit(arg: str) -> Circuit:
    path = Path(arg)
    if path.exists():
        return parse_circuit(path.read_text(encoding="utf-8"))
    if arg in corpus_names():
        return parse_circuit(corpus_text(arg))
    raise FileNotFoundError(f"{arg}: no such file or corpus circuit")


def cmd_run(args) -> int:
    circuit = _read_circuit(args.circuit)
    if args.backend == "tableau":
        check_clifford(circuit)
    rec = run_shots(circuit, args.backend, args.shots, args.seed, args.parallel_shots)
    sys.stdout.write(rec.render(per_shot=args.per_shot))
    return 0


def _parse_angles(text: str) -> tuple[float, float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ParseError(f"--angles needs four comma-separated values, got {text!r}")
    try:
        return tuple(parse_angle(p) for p in parts)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _parse_sweep(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ParseError(f"--sweep expects start:stop:num, got {text!r}")
    try:
        start, stop, num = parse_angle(parts[0]), parse_angle(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if num < 1:
        raise ParseError("--sweep needs at least one point")
    return np.linspace(start, stop, num)


def _model(args) -> bell.CorrelationModel:
    if args.model == "lhv-mc":
        return bell.LHVMonteCarlo(args.samples, args.seed, args.workers)
    return bell.MODELS[args.model]()


def cmd_chsh(args) -> int:
    model = _model(args)
    if args.sweep:
        quads = bell.sweep_family(_parse_sweep(args.sweep))
        sys.stdout.write(bell.sweep_csv(bell.chsh_sweep(model, quads)))
        return 0
    angles = _parse_angles(args.angles) if args.angles else bell.VIOLATING_ANGLES
    value = bell.chsh_value(bell.CHSHSettings.planar(*angles), model)
    print(f"{value:.9f}")
    return 0


def cmd_audit(args) -> int:
    report = run_audit(args.states, args.seed, product_only=args.product_only)
    sys.stdout.write(report.to_csv(all_quadruples=args.all_quadruples))
    return 0


def cmd_bench(args) -> int:
    rows = run_bench(args.min_qubits, args.max_qubits, args.gates, args.seed, args.dense_max)
    sys.stdout.write(bench_csv(rows))
    return 0


def cmd_corpus(args) -> int:
    if args.name:
        sys.stdout.write(corpus_text(args.name))
    else:
        print("\n".join(corpus_names()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gkbell", description="Stabilizer simulation and CHSH correlation experiments"
    )
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a circuit file (or corpus name) for some shots")
    r.add_argument("circuit")
    r.add_argument("--backend", choices=("tableau", "dense"), default="tableau")
    r.add_argument("--shots", type=int, default=1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--parallel-shots", type=int, default=1, metavar="K")
    r.add_argument("--per-shot", action="store_true", help="also list every shot's record")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("chsh", help="evaluate or sweep the CHSH functional")
    c.add_argument("--model", choices=sorted(bell.MODELS), default="singlet")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--angles", help="theta_m,theta_mp,theta_n,theta_np in radians (x-z plane)")
    g.add_argument("--sweep", help="start:stop:num over phi for angles (0, 2phi, phi, -phi)")
    c.add_argument("--samples", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--workers", type=int, default=1)
    c.set_defaults(func=cmd_chsh)

    a = sub.add_parser("audit", help="CHSH over Pauli observables on stabilizer states")
    a.add_argument("--states", type=int, default=100, help="random 2-qubit states to add")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--product-only", action="store_true")
    a.add_argument("--all-quadruples", action="store_true")
    a.set_defaults(func=cmd_audit)

    b = sub.add_parser("bench", help="tableau vs dense scaling CSV")
    b.add_argument("--min-qubits", type=int, default=16)
    b.add_argument("--max-qubits", type=int, default=128)
    b.add_argument("--gates", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--dense-max", type=int, default=20)
    b.set_defaults(func=cmd_bench)

    k = sub.add_parser("corpus", help="list shipped circuits or print one")
    k.add_argument("name", nargs="?")
    k.set_defaults(func=cmd_corpus)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GKError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
