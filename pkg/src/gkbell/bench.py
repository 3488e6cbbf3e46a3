"""Tableau vs. state-vector scaling on random Clifford circuits."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from .circuit import random_clifford_circuit
from .statevector import MAX_QUBITS, DenseState
from .tableau import new_zero_state

BENCH_HEADER = ("n", "gates", "backend", "wall_time_ns", "peak_bytes")


@dataclass(frozen=True)
class BenchRow:
    n: int
    gates: int
    backend: str
    wall_time_ns: int | str
    peak_bytes: int | str


def qubit_ladder(min_qubits: int, max_qubits: int) -> list[int]:
    """min, 2*min, 4*min, ... capped by max (which is always included)."""
    if min_qubits < 1 or max_qubits < min_qubits:
        raise ValueError("need 1 <= min_qubits <= max_qubits")
    out, n = [], min_qubits
    while n < max_qubits:
        out.append(n)
        n *= 2
    out.append(max_qubits)
    return out


def time_tableau(circuit) -> tuple[int, int]:
    t0 = time.perf_counter_ns()
    tab = new_zero_state(circuit.n_qubits)
    for g in circuit:
        tab.apply_gate(g)
    return time.perf_counter_ns() - t0, tab.nbytes


def time_dense(circuit) -> tuple[int, int]:
    t0 = time.perf_counter_ns()
    st = DenseState(circuit.n_qubits)
    for g in circuit:
        st.apply_gate(g)
    return time.perf_counter_ns() - t0, st.nbytes


def run_bench(
    min_qubits: int = 16,
    max_qubits: int = 128,
    gates: int = 1000,
    seed: int | None = 0,
    dense_max: int = 20,
) -> list[BenchRow]:
    """One random {H, S, CNOT} circuit per qubit count, timed on each backend.

    Dense runs above ``MAX_QUBITS`` are reported as ``skipped:cap``; those
    above the softer ``dense_max`` as ``skipped:limit``.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for n in qubit_ladder(min_qubits, max_qubits):
        circ = random_clifford_circuit(n, gates, rng)
        ns, nbytes = time_tableau(circ)
        rows.append(BenchRow(n, gates, "tableau", ns, nbytes))
        if n > MAX_QUBITS:
            rows.append(BenchRow(n, gates, "dense", "skipped:cap", "skipped:cap"))
        elif n > dense_max:
            rows.append(BenchRow(n, gates, "dense", "skipped:limit", "skipped:limit"))
        else:
            ns, nbytes = time_dense(circ)
            rows.append(BenchRow(n, gates, "dense", ns, nbytes))
    return rows


def bench_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    for r in rows:
        w.writerow((r.n, r.gates, r.backend, r.wall_time_ns, r.peak_bytes))
    return buf.getvalue()


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(value) against log(n)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])
