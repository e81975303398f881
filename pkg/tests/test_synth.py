"""Minimal-CNOT synthesis against an independent dense-vector oracle."""
import itertools
from functools import lru_cache

import numpy as np
import pytest

from adder832.builders import build
from adder832.circuits import Circuit
from adder832.codes import code_832
from adder832.pauli import PauliString
from adder832.statevec import ResourceError, StateVector, fidelity
from adder832.synth import ExhaustedError, detectable_error_analysis, min_cnot_prep, simulate_clifford
from adder832.tableau import StabilizerState

P = PauliString.from_str
ORACLE_DEPTH = 4


def _key(amps):
    """Amplitudes with the global phase removed, rounded for hashing."""
    k = np.flatnonzero(np.abs(amps) > 1e-9)[0]
    a = amps * (abs(amps[k]) / amps[k])
    return tuple(np.round(a.real, 6)) + tuple(np.round(a.imag, 6))


def _apply(n, amps, word):
    sv = StateVector(n, amps.copy())
    for g in word:
        sv.apply(g[0], list(g[1:]))
    return sv.amps


@lru_cache(maxsize=None)
def stabilizer_states(n):
    """All n-qubit stabilizer states by closing |0..0> under H, S and CX; key -> (amps, word)."""
    gens = [("H", q) for q in range(n)] + [("S", q) for q in range(n)]
    gens += [("CX", a, b) for a in range(n) for b in range(n) if a != b]
    zero = StateVector(n).amps
    seen = {_key(zero): (zero, ())}
    frontier = [_key(zero)]
    while frontier:
        nxt = []
        for k in frontier:
            amps, word = seen[k]
            for g in gens:
                a2 = _apply(n, amps, [g])
                k2 = _key(a2)
                if k2 not in seen:
                    seen[k2] = (a2, word + (g,))
                    nxt.append(k2)
        frontier = nxt
    return seen


def _purity(n, amps, keep):
    psi = amps.reshape([2] * n)  # axis i is qubit n-1-i
    axes_keep = [n - 1 - q for q in keep]
    rest = [i for i in range(n) if i not in axes_keep]
    m = np.transpose(psi, axes_keep + rest).reshape(2 ** len(keep), -1)
    rho = m @ m.conj().T
    return float(np.real(np.trace(rho @ rho)))


def endpoint_cost(n, amps):
    """CNOTs needed for a product of one- and two-qubit blocks, or None."""
    pure = [q for q in range(n) if abs(_purity(n, amps, [q]) - 1) < 1e-9]
    rest = [q for q in range(n) if q not in pure]
    if not rest:
        return 0
    if len(rest) == 2:
        return 1
    return None


@lru_cache(maxsize=None)
def oracle_costs(n):
    """Fewest search CNOTs plus endpoint CNOTs, for search depth at most ORACLE_DEPTH."""
    states = stabilizer_states(n)
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    nbr = {k: [_key(_apply(n, amps, [("CX", a, b)])) for a, b in pairs] for k, (amps, _) in states.items()}
    best = {}
    for k, (amps, _) in states.items():
        c0 = endpoint_cost(n, amps)
        if c0 is None:
            continue
        # breadth-first from this endpoint; CX words are their own reverses
        dist = {k: 0}
        layer = [k]
        for d in range(1, ORACLE_DEPTH + 1):
            layer = [k2 for k1 in layer for k2 in nbr[k1] if k2 not in dist]
            for k2 in layer:
                dist.setdefault(k2, d)
        for k2, d in dist.items():
            best[k2] = min(best.get(k2, 99), d + c0)
    return best


def test_stabilizer_state_census():
    # |Stab_n| = 2^n prod_{k=1..n} (2^k + 1)
    assert len(stabilizer_states(2)) == 60
    assert len(stabilizer_states(3)) == 1080


def _tableau(n, word):
    s = StabilizerState.zero(n)
    for g in word:
        s.apply(g[0], list(g[1:]))
    return s


def _check_prepares(res, n, amps):
    c = res.circuit
    assert c.two_qubit_gate_count == res.total_cnots
    sv = StateVector(n)
    for ins in c.instructions:
        sv.apply(ins.name, list(ins.qubits))
    assert fidelity(sv, StateVector(n, amps)) > 1 - 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_matches_exhaustive_oracle(n):
    costs = oracle_costs(n)
    states = stabilizer_states(n)
    assert len(costs) == len(states)  # every target is reachable within the depth bound
    for k, (amps, word) in states.items():
        res = min_cnot_prep(_tableau(n, word), accept="local_blocks")
        assert res.total_cnots == costs[k], word
        _check_prepares(res, n, amps)


def test_bell_and_ghz():
    bell = StabilizerState.from_stabilizers([P("XX"), P("ZZ")])
    assert min_cnot_prep(bell).total_cnots == 1
    ghz = StabilizerState.from_stabilizers([P("XXX"), P("ZZI"), P("IZZ")])
    r = min_cnot_prep(ghz, accept="local_blocks")
    assert (r.total_cnots, r.search_cnots) == (2, 1)


def test_product_state_is_free():
    r = min_cnot_prep(StabilizerState.zero(3), accept="local_blocks")
    assert r.total_cnots == 0 and r.moves == ()


def test_deterministic():
    t = StabilizerState.from_stabilizers([P("XXXX"), P("ZZII"), P("IZZI"), P("IIZZ")])
    a, b = (min_cnot_prep(t, accept="local_blocks") for _ in range(2))
    assert a.moves == b.moves and a.circuit == b.circuit


def test_coupling_restriction():
    # Bell pair on the ends of a 3-qubit line
    t = StabilizerState.from_stabilizers([P("XIX"), P("ZIZ"), P("IZI")])
    free = min_cnot_prep(t, accept="local_blocks")
    line = [(0, 1), (1, 2)]
    r = min_cnot_prep(t, accept="local_blocks", coupling=line)
    assert free.total_cnots == 1 and r.total_cnots > 1
    allowed = {frozenset(e) for e in line}
    for ins in r.circuit.instructions:
        if ins.name == "CX":
            assert frozenset(ins.qubits) in allowed
    assert simulate_clifford(r.circuit) == t


def test_unreachable_and_cap():
    t = StabilizerState.from_stabilizers([P("XX"), P("ZZ")])
    with pytest.raises(ExhaustedError):
        min_cnot_prep(t, accept="local_blocks", coupling=[])
    with pytest.raises(ResourceError):
        min_cnot_prep(code_832().codespace_state("X"), node_cap=50)


@pytest.mark.slow
def test_plus_state_of_832():
    target = code_832().codespace_state("X")
    r = min_cnot_prep(target)
    assert (r.total_cnots, r.search_cnots, r.endpoint_cnots) == (10, 6, 4)
    assert simulate_clifford(r.circuit) == target


def _prep_only():
    ft = build("ft_preparation")
    reg = ft.region("prep")
    return Circuit("prep", 8, ft.instructions[reg.start:reg.stop])


def test_detection_analysis_picks_the_check():
    c = code_832()
    cands = [PauliString.from_support(8, b, s) for b, s in itertools.product("XZ", [(1, 3, 4, 6), (0, 1, 2, 3)])]
    rep = detectable_error_analysis(_prep_only(), c.stabilizers, c.logical_x, cands)
    assert rep.n_faults == 150  # 10 CX x 15 Paulis
    assert rep.trivial + rep.detected + len(rep.undetected_logical) == 150
    assert len(rep.undetected_logical) == rep.per_subset[()] == 6
    assert rep.minimal_subsets == [(0,)]  # X on {1,3,4,6}
    assert rep.per_subset[(1,)] == 6


def test_prep_plus_checks_is_eighteen(get_circuit):
    prep = _prep_only()
    ft = get_circuit("ft_preparation")
    assert prep.two_qubit_gate_count == 10
    assert ft.two_qubit_gate_count - prep.two_qubit_gate_count == 8
