import pytest
from hypothesis import given, strategies as st

from adder832.pauli import (PauliString, PropagationError, conjugate, pauli_mul, phase_exponent,
                            symplectic_product)

P = PauliString.from_str


def paulis(n):
    return st.builds(lambda x, z, s: PauliString(n, x, z, s),
                     st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1), st.sampled_from([1, -1]))


def test_render_and_parse():
    p = P("-XIZY")
    assert str(p) == "-XIZY"
    assert p.weight == 3 and p.support == [0, 2, 3]
    assert str(P("xz")) == "+XZ"
    with pytest.raises(ValueError, match="position 1"):
        P("XQ")


def test_identity_weight():
    assert PauliString.identity(5).weight == 0


def test_single_qubit_products():
    # X Z = -i Y; only the real sign is kept, so the +-i phase is dropped
    assert pauli_mul(P("X"), P("Z")).unsigned() == P("Y")
    assert pauli_mul(P("Y"), P("Y")) == P("I")


def test_all_x_times_all_z_is_all_y():
    assert pauli_mul(P("X" * 8), P("Z" * 8)).unsigned() == P("Y" * 8)


def test_logical_product_from_table():
    x2 = PauliString.from_support(8, "X", [0, 1, 4, 5])
    x3 = PauliString.from_support(8, "X", [0, 2, 4, 6])
    assert x2 * x3 == PauliString.from_support(8, "X", [1, 2, 5, 6])


def test_length_mismatch():
    with pytest.raises(ValueError):
        pauli_mul(P("XX"), P("X"))
    with pytest.raises(ValueError):
        P("XX").commutes(P("XXX"))


def test_bad_sign_and_bits():
    with pytest.raises(ValueError):
        PauliString(2, 1, 0, sign=2)
    with pytest.raises(ValueError):
        PauliString(2, 4, 0)


@given(paulis(6), paulis(6))
def test_commutation_is_symplectic(p, q):
    assert p.commutes(q) == (symplectic_product(p, q) == 0)


@given(paulis(5), paulis(5))
def test_sign_symmetry_iff_commuting(p, q):
    assert p.commutes(q) == (pauli_mul(p, q) == pauli_mul(q, p))


@given(paulis(5), paulis(5), paulis(5))
def test_associative_up_to_real_sign(p, q, r):
    # imaginary phases are dropped, so only the operator part is compared
    assert (p * q * r).unsigned() == (p * (q * r)).unsigned()


@given(paulis(6))
def test_square_is_identity(p):
    sq = p * p
    assert sq.is_identity()


@given(paulis(4), st.sampled_from(["H", "S", "SDG", "X", "Y", "Z"]), st.integers(0, 3))
def test_conjugation_preserves_commutation(p, g, q):
    ref = P("ZXYI")
    a = conjugate(p, g, [q])
    b = conjugate(ref, g, [q])
    assert a.commutes(b) == p.commutes(ref)


def test_cx_rules():
    assert conjugate(P("XI"), "CX", [0, 1]) == P("XX")
    assert conjugate(P("ZI"), "CX", [0, 1]) == P("ZI")
    assert conjugate(P("IZ"), "CX", [0, 1]) == P("ZZ")
    assert conjugate(P("IX"), "CX", [0, 1]) == P("IX")


def test_cz_and_swap():
    assert conjugate(P("XI"), "CZ", [0, 1]) == P("XZ")
    assert conjugate(P("XZ"), "SWAP", [0, 1]) == P("ZX")


def test_non_clifford_rejected():
    with pytest.raises(PropagationError):
        conjugate(P("X"), "T", [0])


def test_phase_exponent_single():
    # X * Z = -i Y  ->  exponent of i is 3
    assert phase_exponent(1, 0, 0, 1) % 4 == 3


def test_embed_restrict_permute():
    p = P("XZ").embed(4, [1, 3])
    assert p == P("IXIZ")
    assert p.restrict([1, 3]) == P("XZ")
    assert P("XYZ").permuted([2, 0, 1]) == P("YZX")


def test_bit_vectors():
    p = P("XIYZ")
    assert p.x_bits == (1, 0, 1, 0) and p.z_bits == (0, 0, 1, 1)
