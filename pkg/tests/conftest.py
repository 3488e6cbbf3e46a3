"""Independent dense-matrix oracles shared by the test modules.

Nothing here goes through the package's Pauli arithmetic: labels are parsed
by hand and turned into matrices with Kronecker products.
"""

from __future__ import annotations

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
MATS = {"I": I2, "X": X, "Y": Y, "Z": Z}
PREFIX = {"+": 1, "-": -1, "+i": 1j, "-i": -1j, "": 1}


def label_matrix(label: str) -> np.ndarray:
    body = label.lstrip("+-i")
    prefix = label[: len(label) - len(body)]
    out = np.array([[PREFIX[prefix]]], dtype=complex)
    for ch in body:
        out = np.kron(out, MATS[ch])
    return out


def kron_all(*ms):
    out = np.array([[1]], dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def embed(u: np.ndarray, q: int, n: int) -> np.ndarray:
    return kron_all(*[u if k == q else I2 for k in range(n)])


def cnot_matrix(c: int, t: int, n: int) -> np.ndarray:
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        j = int("".join(map(str, bits)), 2)
        out[j, i] = 1
    return out


def circuit_unitary(circuit) -> np.ndarray:
    """Full unitary of a measurement-free circuit, built gate by gate."""
    n = circuit.n_qubits
    u = np.eye(1 << n, dtype=complex)
    single = {"H": H, "S": S, "X": X, "Y": Y, "Z": Z}
    for g in circuit:
        if g.kind == "CNOT":
            m = cnot_matrix(*g.qubits, n)
        elif g.kind in single:
            m = embed(single[g.kind], g.qubits[0], n)
        else:
            axis = MATS[g.kind[1]]
            r = np.cos(g.angle / 2) * I2 - 1j * np.sin(g.angle / 2) * axis
            m = embed(r, g.qubits[0], n)
        u = m @ u
    return u


def state_of(circuit) -> np.ndarray:
    u = circuit_unitary(circuit)
    return u[:, 0]


def same_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    return abs(abs(np.vdot(a, b)) - 1) < tol


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    if report.when == "call" or report.failed:
        _CRITERIA[number] = ("PASS" if report.passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title = _CRITERIA[number]
        terminalreporter.write_line(f"{status} criterion {number}: {title}")
