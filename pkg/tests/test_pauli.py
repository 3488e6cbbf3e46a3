import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gkbell.errors import CapacityError, DimensionError, ParseError
from gkbell.pauli import PauliString, commutes, from_label, group_closure, multiply, weight

from conftest import label_matrix


def P(label):
    return PauliString.from_label(label)


def pauli_strings(n):
    return st.builds(
        lambda chars, k: PauliString.from_label("".join(chars)).with_phase(k),
        st.lists(st.sampled_from("IXYZ"), min_size=n, max_size=n),
        st.integers(0, 3),
    )


class TestLabels:
    def test_plus_xx(self):
        p = from_label("+XX")
        assert (p.n, p.phase, p.x, p.z) == (2, 0, 0b11, 0)

    def test_minus_zz(self):
        p = from_label("-ZZ")
        assert (p.phase, p.x, p.z) == (2, 0, 0b11)

    def test_plus_i_y(self):
        p = from_label("+iY")
        assert (p.n, p.phase, p.x, p.z) == (1, 1, 1, 1)

    def test_default_sign(self):
        assert from_label("XZ") == from_label("+XZ")

    @pytest.mark.parametrize("label", ["+XX", "-YY", "+iXYZ", "-iIIZ", "+I"])
    def test_round_trip(self, label):
        assert P(label).to_label() == label

    def test_bad_character_names_position(self):
        with pytest.raises(ParseError, match="position 2"):
            from_label("+XQZ")

    @pytest.mark.parametrize("label", ["--X", "+-X", "ii X", "+ii"])
    def test_bad_prefix(self, label):
        with pytest.raises(ParseError):
            from_label(label)

    def test_empty_body(self):
        with pytest.raises(ParseError):
            from_label("-i")

    @given(pauli_strings(3))
    def test_round_trip_property(self, p):
        assert P(p.to_label()) == p


class TestMultiply:
    def test_x_times_z(self):
        assert np.allclose(label_matrix("X") @ label_matrix("Z"), label_matrix("-iY"))
        assert multiply(P("X"), P("Z")) == P("-iY")

    def test_zz_squared(self):
        assert multiply(P("ZZ"), P("ZZ")) == P("+II")

    def test_xx_times_zz(self):
        assert np.allclose(label_matrix("XX") @ label_matrix("ZZ"), label_matrix("-YY"))
        assert multiply(P("XX"), P("ZZ")) == P("-YY")

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            multiply(P("X"), P("XX"))

    @pytest.mark.parametrize("n", [1, 2])
    def test_exhaustive_against_dense(self, n):
        labels = ["".join(c) for c in itertools.product("IXYZ", repeat=n)]
        phases = ["+", "-i"]
        for la, lb in itertools.product(labels, repeat=2):
            for sa, sb in itertools.product(phases, repeat=2):
                a, b = P(sa + la), P(sb + lb)
                got = multiply(a, b)
                assert np.allclose(label_matrix(got.to_label()), label_matrix(sa + la) @ label_matrix(sb + lb))

    @given(pauli_strings(4), pauli_strings(4), pauli_strings(4))
    def test_associative(self, a, b, c):
        assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))

    @given(pauli_strings(5))
    def test_squares_to_plus_minus_identity(self, a):
        sq = multiply(a, a)
        assert sq.is_identity and sq.phase in (0, 2)
        # Hermitian exactly when the square is +I
        assert (sq.phase == 0) == a.is_hermitian

    @given(pauli_strings(3))
    def test_hermitian_matches_dense(self, a):
        m = label_matrix(a.to_label())
        assert np.allclose(m, m.conj().T) == a.is_hermitian


class TestCommutes:
    def test_xx_zz(self):
        a, b = label_matrix("XX"), label_matrix("ZZ")
        assert np.linalg.norm(a @ b - b @ a) == 0
        assert commutes(P("XX"), P("ZZ"))

    def test_xi_zi(self):
        a, b = label_matrix("XI"), label_matrix("ZI")
        assert np.linalg.norm(a @ b - b @ a) > 0
        assert not commutes(P("XI"), P("ZI"))

    @given(pauli_strings(6))
    def test_self(self, a):
        assert commutes(a, a)

    def test_exhaustive_two_qubits(self):
        labels = ["".join(c) for c in itertools.product("IXYZ", repeat=2)]
        for la, lb in itertools.product(labels, repeat=2):
            a, b = label_matrix(la), label_matrix(lb)
            dense = np.allclose(a @ b, b @ a)
            assert commutes(P(la), P(lb)) == dense

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            commutes(P("X"), P("XI"))


class TestClosure:
    def test_two_zz_generators(self):
        closure = group_closure([P("ZZI"), P("IZZ")])
        assert set(closure.labels()) == {"+III", "+ZZI", "+IZZ", "+ZIZ"}
        assert not closure.contains_minus_identity

    def test_empty(self):
        assert group_closure([], n=3).labels() == ["+III"]

    def test_empty_needs_n(self):
        with pytest.raises(DimensionError):
            group_closure([])

    def test_xx_zz(self):
        # brute force: all products of subsets, computed with dense matrices
        gens = {"XX": label_matrix("XX"), "ZZ": label_matrix("ZZ")}
        dense = [np.eye(4), gens["XX"], gens["ZZ"], gens["XX"] @ gens["ZZ"]]
        closure = group_closure([P("XX"), P("ZZ")])
        assert len(closure) == 4
        for el in closure:
            assert any(np.allclose(label_matrix(el.to_label()), d) for d in dense)
        assert set(closure.labels()) == {"+II", "+XX", "+ZZ", "-YY"}

    def test_canonical_order(self):
        closure = group_closure([P("ZZ"), P("XX")])
        assert closure.labels() == ["+II", "+XX", "+ZZ", "-YY"]

    def test_minus_identity_flag(self):
        closure = group_closure([P("Z"), P("-Z")])
        assert closure.contains_minus_identity

    def test_cap(self):
        with pytest.raises(CapacityError):
            group_closure([P("XII"), P("IXI"), P("IIX")], cap=4)

    def test_mixed_sizes(self):
        with pytest.raises(DimensionError):
            group_closure([P("X"), P("XX")])


class TestWeight:
    @pytest.mark.parametrize("label,w", [("III", 0), ("ZZI", 2), ("-iXYZ", 3)])
    def test_examples(self, label, w):
        assert weight(P(label)) == w


class TestConjugate:
    @pytest.mark.parametrize("gate", ["H", "S", "X", "Y", "Z"])
    def test_single_qubit_against_dense(self, gate):
        from conftest import H, S, X, Y, Z

        u = {"H": H, "S": S, "X": X, "Y": Y, "Z": Z}[gate]
        for lab in ("X", "Y", "Z", "-iY"):
            got = P(lab).conjugate(gate, [0])
            assert np.allclose(label_matrix(got.to_label()), u @ label_matrix(lab) @ u.conj().T)

    def test_cnot_against_dense(self):
        from conftest import cnot_matrix

        u = cnot_matrix(0, 1, 2)
        for la in ("".join(c) for c in itertools.product("IXYZ", repeat=2)):
            got = P(la).conjugate("CNOT", [0, 1])
            assert np.allclose(label_matrix(got.to_label()), u @ label_matrix(la) @ u.conj().T)

    def test_rotation_rejected(self):
        from gkbell.errors import UnsupportedGateError

        with pytest.raises(UnsupportedGateError, match="Gottesman-Knill"):
            P("X").conjugate("RZ", [0])
