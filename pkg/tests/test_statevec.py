import numpy as np
import pytest
from hypothesis import given, strategies as st

from adder832 import builders
from adder832.faults import arithmetic_error
from adder832.logical import encoded_basis_state
from adder832.pauli import PauliString
from adder832.statevec import (MAX_QUBITS, ResourceError, StateVector, enumerate_branches, fidelity,
                               measure, outcome_distribution)


def test_ccz_basis_action():
    for idx, sign in ((0b011, 1), (0b111, -1)):
        sv = StateVector.basis(3, idx).apply("CCZ", [0, 1, 2])
        assert np.isclose(sv.amps[idx], sign)


def test_t_four_times_is_z():
    sv = StateVector(1).apply("H", [0])
    for _ in range(4):
        sv.apply("T", [0])
    assert np.isclose(sv.expectation(PauliString.from_str("X")), -1)


def test_measure_definite_and_uniform():
    rng = np.random.default_rng(4)
    one = StateVector.basis(1, 1)
    assert all(measure(one, 0, "Z", rng)[0] == 1 for _ in range(10))
    bits = [measure(StateVector(1), 0, "X", rng)[0] for _ in range(400)]
    assert 150 < sum(bits) < 250


def test_size_limit():
    with pytest.raises(ResourceError):
        StateVector(MAX_QUBITS + 1)


def test_duplicate_qubits_rejected():
    with pytest.raises(ValueError):
        StateVector(2).apply("CX", [0, 0])


@given(st.lists(st.tuples(st.sampled_from(["H", "S", "T", "TDG", "X", "CX", "CZ", "SWAP"]),
                          st.integers(0, 3), st.integers(0, 3)), max_size=30))
def test_norm_preserved(word):
    sv = StateVector(4)
    for g, a, b in word:
        if g in ("CX", "CZ", "SWAP"):
            if a == b:
                continue
            sv.apply(g, [a, b])
        else:
            sv.apply(g, [a])
    assert abs(sv.norm() - 1) < 1e-10


def test_t_layer_negates_only_111():
    layer = builders.T_PATTERN
    for bits in np.ndindex(2, 2, 2):
        s = encoded_basis_state(bits)
        t = s.copy()
        for q, g in enumerate(layer):
            t.apply(g, [q])
        want = -1 if all(bits) else 1
        assert np.isclose(np.vdot(s.amps, t.amps), want)


def test_branch_probabilities_sum_to_one(get_circuit):
    for name in ("nonft_adder", "ft_preparation", "ft_adder"):
        br = enumerate_branches(get_circuit(name))
        assert abs(sum(b.probability for b in br) - 1) < 1e-9


def test_ft_adder_branches_valid(get_circuit):
    c = get_circuit("ft_adder")
    tally = {}
    for b in enumerate_branches(c):
        assert c.accepted(b.records)
        v = c.read(b.records)
        key = f"{v['a']}{v['s0']}{v['s1']}"
        tally[key] = tally.get(key, 0) + b.probability
    assert set(tally) == {"000", "010", "101", "110"}
    assert all(abs(p - 0.25) < 1e-9 for p in tally.values())


def test_five_x_results_have_even_parity(get_circuit):
    c = get_circuit("ft_adder")
    pred = next(p for p in c.postselect if p.name == "s_x_parity")
    assert len(pred.records) == 5
    for b in enumerate_branches(c):
        assert pred.holds(b.records)


def test_x_before_readout_breaks_nonft_adder(get_circuit):
    c = get_circuit("nonft_adder")
    idx = next(i for i, ins in enumerate(c.instructions) if getattr(ins, "record", None) == 1)
    fault = (idx - 1, PauliString.single(3, 1, "X"))
    dist = outcome_distribution(c, [fault])
    bad = 0.0
    for rec, p in enumerate(dist):
        bits = [rec >> r & 1 for r in range(3)]
        v = c.read(bits)
        if arithmetic_error(v["a"], v["s0"] + 2 * v["s1"]):
            bad += p
    # half the valid sums turn into invalid ones
    assert np.isclose(bad, 0.5)


def test_branch_cap(get_circuit):
    with pytest.raises(ResourceError):
        enumerate_branches(get_circuit("ft_adder"), cap=4)


def test_deferred_distribution_matches_branches(get_circuit):
    c = get_circuit("ft_adder")
    dist = outcome_distribution(c)
    for b in enumerate_branches(c):
        idx = sum(bit << r for r, bit in enumerate(b.records))
        assert abs(dist[idx] - b.probability) < 1e-9


def test_fidelity_symmetric():
    a = StateVector(2).apply("H", [0])
    b = StateVector(2)
    assert np.isclose(fidelity(a, b), 0.5) and np.isclose(fidelity(b, a), 0.5)
