import itertools

import numpy as np
import pytest

from adder832 import builders
from adder832.codes import code_832
from adder832.logical import (check_branches_statevector, check_branches_tableau, diagonal_phases,
                              encoded_basis_state, is_ccz, permutation_basis_map)

REFLECTION = (0, 3, 2, 1, 4, 7, 6, 5)
BASIS = list(itertools.product((0, 1), repeat=3))


def test_encoded_basis_states_are_orthonormal():
    states = [encoded_basis_state(b) for b in BASIS]
    gram = np.array([[np.vdot(a.amps, b.amps) for b in states] for a in states])
    assert np.allclose(gram, np.eye(8))


def test_encoded_basis_in_codespace():
    s = encoded_basis_state((1, 0, 1))
    for g in code_832().stabilizers:
        assert np.isclose(s.expectation(g), 1)


def test_t_layer_is_ccz():
    assert is_ccz(builders.T_PATTERN)
    assert not is_ccz(("T",) * 8)


def test_exactly_two_t_patterns_give_ccz():
    hits = [p for p in itertools.product(("T", "TDG"), repeat=8) if is_ccz(p)]
    assert len(hits) == 2
    assert tuple(builders.T_PATTERN) in hits
    # the other one is the conjugate pattern
    flip = {"T": "TDG", "TDG": "T"}
    assert tuple(flip[g] for g in builders.T_PATTERN) in hits


def test_diagonal_phases_are_unit():
    ph = diagonal_phases(("T",) * 8)
    assert all(np.isclose(abs(v), 1) for v in ph.values())


def test_reflection_is_cnot_2_3():
    m = permutation_basis_map(REFLECTION)
    assert m == {b: (b[0], b[1], b[1] ^ b[2]) for b in BASIS}


def test_adder_relabel_is_cnot_1_3():
    m = permutation_basis_map(builders.CNOT_1_3)
    assert m == {b: (b[0], b[1], b[0] ^ b[2]) for b in BASIS}


def test_non_symmetry_relabel_rejected():
    with pytest.raises(ValueError):
        permutation_basis_map((4, 1, 2, 3, 0, 5, 6, 7))


@pytest.mark.parametrize("name", ["hadamard_double", "hadamard_single"])
def test_hadamards_exact_on_every_branch(name, get_circuit):
    r = check_branches_tableau(get_circuit(name))
    assert r.ok and r.branches > 0
    assert 0 < r.acceptance <= 1


@pytest.mark.parametrize("name", ["hadamard_double", "hadamard_single"])
def test_hadamards_on_dense_trajectories(name, get_circuit):
    r = check_branches_statevector(get_circuit(name), samples=12, seed=1)
    assert r.ok


@pytest.mark.parametrize("build", [builders.build_hadamard_double, builders.build_hadamard_single])
def test_missing_frame_corrections_are_caught(build):
    r = check_branches_tableau(build(corrections=False))
    assert r.failures > 0
