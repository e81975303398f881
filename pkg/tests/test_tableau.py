import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adder832.codes import code_832
from adder832.pauli import PauliString
from adder832.statevec import StateVector
from adder832.tableau import (ContradictionError, StabilizerState, apply_clifford, canonical_key,
                              measure_pauli)

P = PauliString.from_str
GATES1 = ["H", "S", "SDG", "X", "Y", "Z"]
GATES2 = ["CX", "CZ", "SWAP"]


@st.composite
def clifford_words(draw, n_max=5, length=25):
    n = draw(st.integers(1, n_max))
    word = []
    for _ in range(draw(st.integers(0, length))):
        if n > 1 and draw(st.booleans()):
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            word.append((draw(st.sampled_from(GATES2)), a, b))
        else:
            word.append((draw(st.sampled_from(GATES1)), draw(st.integers(0, n - 1))))
    return n, word


def run(n, word):
    s = StabilizerState.zero(n)
    for g in word:
        s.apply(g[0], g[1:])
    return s


def test_h_on_zero():
    s = apply_clifford(StabilizerState.zero(1), "H", [0])
    assert s.stabilizers() == [P("X")]


def test_cx_conjugation():
    s = StabilizerState.from_stabilizers([P("XI"), P("IZ")])
    s.apply("CX", [0, 1])
    assert s == StabilizerState.from_stabilizers([P("XX"), P("ZZ")])


def test_bad_indices():
    s = StabilizerState.zero(2)
    with pytest.raises(IndexError):
        s.apply("H", [2])
    with pytest.raises(ValueError):
        s.apply("CX", [1, 1])


def test_measure_z_on_zero():
    o, det, _ = measure_pauli(StabilizerState.zero(1), P("Z"))
    assert (o, det) == (1, True)


def test_measure_random_then_repeat():
    s = apply_clifford(StabilizerState.zero(1), "H", [0])
    seen = set()
    for seed in range(20):
        o, det, t = measure_pauli(s, P("Z"), rng=np.random.default_rng(seed))
        assert not det
        seen.add(o)
        o2, det2, _ = measure_pauli(t, P("Z"))
        assert det2 and o2 == o
    assert seen == {1, -1}


def test_forced_contradiction():
    s = StabilizerState.zero(1)
    with pytest.raises(ContradictionError):
        s.measure_pauli(P("Z"), forced=-1)
    assert s.expectation(P("Z")) == 1  # state untouched


def test_plus_state_has_all_x():
    s = code_832().codespace_state("X")
    o, det, _ = measure_pauli(s, P("X" * 8))
    assert (o, det) == (1, True)


def test_bell_presentations_share_key():
    a = StabilizerState.from_stabilizers([P("XX"), P("ZZ")])
    b = StabilizerState.from_stabilizers([P("XX"), P("-YY")])
    assert canonical_key(a) == canonical_key(b)


def test_distinct_states_distinct_keys():
    a = StabilizerState.zero(2)
    b = apply_clifford(a, "H", [1])
    assert canonical_key(a) != canonical_key(b)


def test_six_single_qubit_states():
    # brute force: close {|0>} under H and S
    keys, frontier = set(), [StabilizerState.zero(1)]
    while frontier:
        s = frontier.pop()
        k = s.canonical_key()
        if k in keys:
            continue
        keys.add(k)
        frontier += [apply_clifford(s, g, [0]) for g in ("H", "S")]
    assert len(keys) == 6


@given(clifford_words())
def test_tableau_invariants(nw):
    run(*nw).check_invariants()


@given(clifford_words(n_max=6), st.randoms(use_true_random=False))
def test_key_ignores_generator_order(nw, rnd):
    s = run(*nw)
    gens = s.stabilizers()
    # shuffle and multiply rows together; the group is unchanged
    rnd.shuffle(gens)
    for i in range(1, len(gens)):
        if rnd.random() < 0.5:
            gens[i] = gens[i] * gens[i - 1]
    assert StabilizerState.from_stabilizers(gens).canonical_key() == s.canonical_key()


@settings(max_examples=200)
@given(clifford_words(n_max=5, length=30), st.lists(st.sampled_from([1, -1]), min_size=8, max_size=8),
       st.lists(st.sampled_from("XYZ"), min_size=8, max_size=8))
def test_measurements_match_state_vector(nw, forced, letters):
    """Determinism flags and values agree with dense simulation."""
    n, word = nw
    tab = run(n, word)
    sv = StateVector(n)
    for g in word:
        sv.apply(g[0], g[1:])
    for i in range(4):
        q = i % n
        p = PauliString.single(n, q, letters[i])
        ev = sv.expectation(p)
        try:
            o, det = tab.measure_pauli(p, forced=forced[i])
        except ContradictionError:
            assert abs(ev + forced[i]) < 1e-9
            o, det = -forced[i], True
        assert det == (abs(abs(ev) - 1) < 1e-9)
        if det:
            assert abs(ev - o) < 1e-9
        # project the dense state onto the same outcome
        moved = sv.copy().apply_pauli(p)
        sv.amps = (sv.amps + o * moved.amps) / 2
        sv.amps /= np.sqrt(sv.norm())
