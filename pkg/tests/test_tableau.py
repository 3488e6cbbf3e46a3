import time
from pathlib import Path

import numpy as np
import pytest

from gkbell.circuit import Circuit, corpus_circuit, random_clifford_circuit
from gkbell.errors import DimensionError, InvalidObservableError, UnsupportedGateError
from gkbell.pauli import PauliString, group_closure
from gkbell.statevector import dense_branches
from gkbell.tableau import (
    BranchTree,
    StabilizerTableau,
    enumerate_branches,
    new_zero_state,
    run_circuit,
    sample_shots,
)

from conftest import label_matrix, state_of

GOLDEN = Path(__file__).parent / "golden"


def P(label):
    return PauliString.from_label(label)


def stabilizes(label, psi):
    return np.linalg.norm(label_matrix(label) @ psi - psi) < 1e-10


def phiplus():
    return run_circuit(corpus_circuit("bell_phiplus")).tableau


class TestZeroState:
    def test_one_qubit(self):
        t = new_zero_state(1)
        assert [p.to_label() for p in t.stabilizers()] == ["+Z"]
        assert [p.to_label() for p in t.destabilizers()] == ["+X"]

    def test_three_qubits(self):
        assert [p.to_label() for p in new_zero_state(3).stabilizers()] == ["+ZII", "+IZI", "+IIZ"]

    def test_sixty_four(self):
        t = new_zero_state(64)
        assert len(t.stabilizers()) == 64
        assert t.stabilizers()[63].to_label() == "+" + "I" * 63 + "Z"
        t.check_invariants()

    def test_zero_qubits(self):
        with pytest.raises(DimensionError):
            new_zero_state(0)

    def test_canonical_is_z_in_order(self):
        assert new_zero_state(4).canonical_labels() == ["+ZIII", "+IZII", "+IIZI", "+IIIZ"]


class TestGates:
    def test_h_on_zero_gives_x(self):
        t = new_zero_state(1).h(0)
        assert [p.to_label() for p in t.stabilizers()] == ["+X"]

    def test_phiplus(self):
        t = new_zero_state(2).h(0).cnot(0, 1)
        assert t.canonical_labels() == ["+XX", "+ZZ"]

    def test_singlet_circuit(self):
        c = Circuit(2).x(0).x(1).h(0).cnot(0, 1)
        psi = state_of(c)
        assert np.allclose(psi, np.array([0, 1, -1, 0]) / np.sqrt(2))
        assert stabilizes("-XX", psi) and stabilizes("-ZZ", psi)
        assert run_circuit(c).tableau.canonical_labels() == ["-XX", "-ZZ"]

    def test_s_convention(self):
        t = new_zero_state(1).h(0).s(0)
        assert [p.to_label() for p in t.stabilizers()] == ["+Y"]

    def test_rotation_rejected(self):
        with pytest.raises(UnsupportedGateError, match="Gottesman-Knill"):
            new_zero_state(1).apply_gate("RZ", 0)

    def test_circuit_with_rotation_rejected(self):
        with pytest.raises(UnsupportedGateError):
            run_circuit(Circuit(1).h(0).rz(0.3, 0))

    def test_bad_qubit(self):
        with pytest.raises(DimensionError):
            new_zero_state(2).h(2)
        with pytest.raises(DimensionError):
            new_zero_state(2).cnot(1, 1)

    @pytest.mark.parametrize("n", [1, 3, 9, 17])
    def test_matches_single_string_conjugation(self, n, rng):
        """Vectorized row updates agree with the per-string rules."""
        t = new_zero_state(n)
        rows = [t.row(i) for i in range(2 * n)]
        for g in random_clifford_circuit(n, 60, rng, gate_set=("H", "S", "X", "Y", "Z", "CNOT")):
            t.apply_gate(g)
            rows = [r.conjugate(g.kind, g.qubits) for r in rows]
        assert [t.row(i) for i in range(2 * n)] == rows


class TestMeasurement:
    def test_zi_on_phiplus_random_then_correlated(self):
        outcomes = []
        for seed in range(400):
            t = phiplus()
            first, det = t.measure_pauli(P("ZI"), np.random.default_rng(seed))
            assert not det
            second, det2 = t.measure_pauli(P("IZ"))
            assert det2 and second == first
            outcomes.append(first)
        frac = outcomes.count(1) / len(outcomes)
        assert abs(frac - 0.5) < 4 * 0.5 / np.sqrt(len(outcomes))

    def test_z_on_zero(self):
        assert new_zero_state(1).measure_pauli(P("Z")) == (1, True)

    def test_xx_on_phiplus(self):
        assert phiplus().measure_pauli(P("XX")) == (1, True)

    def test_minus_xx_on_phiplus(self):
        assert phiplus().measure_pauli(P("-XX")) == (-1, True)

    def test_outcome_becomes_stabilizer(self, rng):
        t = phiplus()
        out, _ = t.measure_pauli(P("YI"), rng)
        assert t.expectation_pauli(P("YI")) == out
        t.check_invariants()

    def test_non_hermitian(self):
        with pytest.raises(InvalidObservableError):
            phiplus().measure_pauli(P("+iXX"))

    def test_wrong_size(self):
        with pytest.raises(DimensionError):
            phiplus().measure_pauli(P("X"))

    def test_forced_deterministic_mismatch(self):
        with pytest.raises(ValueError):
            new_zero_state(1).measure_pauli(P("Z"), forced=-1)

    def test_random_needs_source(self):
        with pytest.raises(ValueError):
            phiplus().measure_pauli(P("ZI"))


class TestExpectation:
    @pytest.mark.parametrize(
        "circuit,label",
        [("bell_phiplus", "ZI"), ("bell_phiplus", "ZZ"), ("bell_psiminus", "XX"), ("bell_psiminus", "YY")],
    )
    def test_against_dense(self, circuit, label):
        c = corpus_circuit(circuit)
        psi = state_of(c)
        dense = np.vdot(psi, label_matrix(label) @ psi).real
        assert run_circuit(c).tableau.expectation_pauli(P(label)) == pytest.approx(dense, abs=1e-12)

    def test_zz_on_phiplus(self):
        assert phiplus().expectation_pauli(P("ZZ")) == 1

    def test_xx_on_singlet(self):
        t = run_circuit(corpus_circuit("bell_psiminus")).tableau
        assert t.expectation_pauli(P("XX")) == -1

    def test_does_not_mutate(self):
        t = phiplus()
        before = t.render()
        t.expectation_pauli(P("ZI"))
        assert t.render() == before

    def test_all_paulis_against_dense(self, rng):
        for _ in range(20):
            c = random_clifford_circuit(3, 25, rng)
            psi = state_of(c)
            t = run_circuit(c).tableau
            for chars in np.array(list("IXYZ"))[rng.integers(4, size=(10, 3))]:
                lab = "".join(chars)
                dense = np.vdot(psi, label_matrix(lab) @ psi).real
                assert t.expectation_pauli(P(lab)) == pytest.approx(dense, abs=1e-10)


class TestDeterminism:
    def test_expectation_nonzero_iff_deterministic(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 6))
            t = run_circuit(random_clifford_circuit(n, 30, rng)).tableau
            for _ in range(8):
                lab = "".join(rng.choice(list("IXYZ"), size=n))
                e = t.expectation_pauli(P(lab))
                _, det = t.copy().measure_pauli(P(lab), rng)
                assert (e != 0) == det


class TestCanonical:
    def test_same_group_same_form(self):
        a = StabilizerTableau.from_stabilizers(["+ZZ", "+XX"])
        b = StabilizerTableau.from_stabilizers(["+XX", "-YY"])
        assert set(group_closure([P("ZZ"), P("XX")]).labels()) == set(
            group_closure([P("XX"), P("-YY")]).labels()
        )
        assert a.canonical_form() == b.canonical_form()
        assert a.same_state(b)

    def test_psiplus(self):
        c = corpus_circuit("bell_psiplus")
        psi = state_of(c)
        assert stabilizes("+XX", psi) and stabilizes("-ZZ", psi)
        assert run_circuit(c).tableau.canonical_labels() == ["+XX", "-ZZ"]

    def test_invariant_under_generator_products(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 7))
            t = run_circuit(random_clifford_circuit(n, 40, rng)).tableau
            gens = t.stabilizers()
            for _ in range(3 * n):
                i, j = rng.choice(n, size=2, replace=False)
                gens[i] = gens[i] * gens[j]
            gens = [gens[k] for k in rng.permutation(n)]
            assert StabilizerTableau.from_stabilizers(gens).canonical_form() == t.canonical_form()

    def test_different_states_differ(self):
        assert not phiplus().same_state(run_circuit(corpus_circuit("bell_psiplus")).tableau)

    def test_from_stabilizers_rejects_anticommuting(self):
        with pytest.raises(InvalidObservableError):
            StabilizerTableau.from_stabilizers(["XI", "ZI"])

    def test_from_stabilizers_rejects_dependent(self):
        with pytest.raises(InvalidObservableError):
            StabilizerTableau.from_stabilizers(["ZZ", "-ZZ"])


class TestRunCircuit:
    def test_empty_circuit(self):
        assert run_circuit(Circuit(3)).tableau.render() == new_zero_state(3).render()

    @pytest.mark.parametrize(
        "bits,expected",
        [("00", ["+XX", "+ZZ"]), ("01", ["+XX", "-ZZ"]), ("10", ["-XX", "+ZZ"]), ("11", ["-XX", "-ZZ"])],
    )
    def test_bell_table(self, bits, expected):
        c = Circuit(2)
        for q, b in enumerate(bits):
            if b == "1":
                c.x(q)
        c.h(0).cnot(0, 1)
        psi = state_of(c)
        assert all(stabilizes(g, psi) for g in expected)
        assert run_circuit(c).tableau.canonical_labels() == expected

    def test_same_seed_same_record(self):
        c = corpus_circuit("teleport_plus")
        assert run_circuit(c, seed=5).clbits == run_circuit(c, seed=5).clbits

    def test_forced_branches(self):
        c = corpus_circuit("teleport_plus")
        for forced in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
            run = run_circuit(c, forced=forced)
            assert run.clbits == [0 if o == 1 else 1 for o in forced]
            assert run.tableau.qubit_stabilizer(2).to_label() == "+X"

    def test_teleport_all_branches_against_dense(self):
        c = corpus_circuit("teleport_plus")
        tab = enumerate_branches(c)
        dense = dense_branches(c)
        assert [b.record for b in tab] == [b.record for b in dense] == ["00", "01", "10", "11"]
        for tb, db in zip(tab, dense):
            assert tb.probability == pytest.approx(0.25) and db.probability == pytest.approx(0.25)
            assert tb.tableau.qubit_stabilizer(2) == P("+X")
            assert db.state.expectation_pauli(P("IIX")) == pytest.approx(1.0, abs=1e-12)

    def test_debug_invariants_through_measurements(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 7))
            c = random_clifford_circuit(n, 60, rng, n_measurements=4)
            run_circuit(c, rng=rng, debug=True)

    def test_conditional_gate_applied_only_when_set(self):
        c = Circuit(1, 1).x(0).measure(0, 0).cif(0, "X", 0)
        run = run_circuit(c, seed=0)
        assert run.clbits == [1]
        assert run.tableau.canonical_labels() == ["+Z"]


class TestSampling:
    def test_phiplus_measured(self):
        c = corpus_circuit("bell_phiplus")
        c.n_clbits = 2
        c.measure(0, 0).measure(1, 1)
        records, _ = sample_shots(c, 10_000, seed=11)
        counts = {r: records.count(r) for r in set(records)}
        assert set(counts) == {"00", "11"}
        sigma = np.sqrt(10_000 * 0.25)
        assert abs(counts["00"] - 5000) < 4 * sigma

    def test_reproducible(self):
        c = corpus_circuit("teleport_plus")
        assert sample_shots(c, 500, seed=3)[0] == sample_shots(c, 500, seed=3)[0]
        assert sample_shots(c, 500, seed=3)[0] != sample_shots(c, 500, seed=4)[0]

    def test_reproducible_with_workers(self):
        c = corpus_circuit("teleport_plus")
        a, ta = sample_shots(c, 301, seed=3, workers=3)
        b, tb = sample_shots(c, 301, seed=3, workers=3)
        assert a == b and len(a) == 301
        assert ta.render() == tb.render()

    def test_last_shot_state_matches_record(self):
        c = Circuit(1, 1).h(0).measure(0, 0)
        records, tab = sample_shots(c, 9, seed=2)
        assert tab.canonical_labels() == (["+Z"] if records[-1] == "0" else ["-Z"])

    def test_branch_probabilities_sum_to_one(self, rng):
        for _ in range(20):
            c = random_clifford_circuit(4, 30, rng, n_measurements=4)
            assert sum(b.probability for b in BranchTree(c).branches()) == pytest.approx(1.0)


class TestOracleEquivalence:
    def test_random_unitary_circuits(self, rng):
        for _ in range(150):
            n = int(rng.integers(1, 7))
            c = random_clifford_circuit(n, int(rng.integers(1, 80)), rng)
            psi = state_of(c)
            for g in run_circuit(c).tableau.canonical_form():
                assert stabilizes(g.to_label(), psi)


class TestFormat:
    def test_golden_render(self):
        assert phiplus().render() + "\n" == (GOLDEN / "phiplus_tableau.txt").read_text()

    def test_storage_is_quadratic(self):
        assert new_zero_state(64).nbytes == 2 * 128 * 8 + 128
        assert new_zero_state(128).nbytes == 2 * 256 * 16 + 256


def test_thousand_gates_on_64_qubits_is_fast(rng):
    c = random_clifford_circuit(64, 1000, rng)
    t0 = time.perf_counter()
    run_circuit(c)
    assert time.perf_counter() - t0 < 1.0
