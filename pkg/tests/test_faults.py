import itertools

import pytest
from hypothesis import given, settings, strategies as st

from adder832.faults import (MEASUREMENT, TWO_QUBIT, FrameEngine, UnsupportedCircuit, all_single_faults,
                             arithmetic_error, audit_single_faults, classify_direct, count_malicious_pairs,
                             enumerate_locations, fault_set, noise_locations)


def test_arithmetic_error_truth_table():
    valid = {(a, a + b) for a, b in itertools.product((0, 1), repeat=2)}
    for a, s in itertools.product((0, 1), range(4)):
        assert arithmetic_error(a, s) == ((a, s) not in valid)


@pytest.mark.parametrize("name,locs,faults", [("ft_adder", 36, 372), ("nonft_adder", 8, 78),
                                              ("ft_preparation", 20, 272)])
def test_location_census(name, locs, faults, get_circuit):
    c = get_circuit(name)
    ls = enumerate_locations(c)
    assert len(ls) == locs
    assert {l.kind for l in ls} == {TWO_QUBIT, MEASUREMENT}
    assert len(all_single_faults(c)) == faults


def test_fault_set_sizes(get_circuit):
    c = get_circuit("ft_adder")
    sizes = {l.kind: len(fault_set(c, l)) for l in enumerate_locations(c)}
    assert sizes == {TWO_QUBIT: 15, MEASUREMENT: 1}
    labels = [f.label for f in fault_set(c, enumerate_locations(c)[0])]
    assert len(set(labels)) == 15


def test_extended_noise_locations(get_circuit):
    c = get_circuit("ft_adder")
    base = noise_locations(c)
    ext = noise_locations(c, include_single_qubit=True, include_init=True)
    assert len(ext) > len(base)
    assert all(l in ext for l in base)


def test_noiseless_region_has_no_locations(get_circuit):
    c = get_circuit("hadamard_double")
    quiet = c.noiseless_indices
    assert quiet
    assert not any(l.index in quiet for l in enumerate_locations(c))


@pytest.mark.parametrize("name", ["ft_adder", "ft_preparation", "hadamard_double", "hadamard_single"])
def test_ft_circuits_have_no_malicious_single_fault(name, get_circuit):
    rep = audit_single_faults(get_circuit(name))
    assert rep.route == "frame"
    assert rep.counts["malicious"] == 0 and rep.malicious == []
    assert sum(rep.counts.values()) == rep.n_faults


@pytest.mark.slow
def test_planar_adder_single_faults(get_circuit):
    rep = audit_single_faults(get_circuit("planar_ft_adder"))
    assert rep.route == "direct"
    assert rep.n_locations == 46 and rep.counts["malicious"] == 0


def test_nonft_adder_is_not_fault_tolerant(get_circuit):
    c = get_circuit("nonft_adder")
    rep = audit_single_faults(c)
    assert rep.counts["malicious"] >= 1
    o = rep.malicious[0]
    v = c.read(o.witness)
    assert c.accepted(o.witness) and arithmetic_error(v["a"], v["s0"] + 2 * v["s1"])


@pytest.mark.slow
@pytest.mark.parametrize("name", ["ft_adder", "ft_preparation", "hadamard_single"])
def test_frame_and_direct_agree(name, get_circuit):
    c = get_circuit(name)
    a = audit_single_faults(c, route="frame")
    b = audit_single_faults(c, route="direct")
    assert a.counts == b.counts


def test_frame_route_refuses_unsupported(get_circuit):
    with pytest.raises(UnsupportedCircuit):
        audit_single_faults(get_circuit("nonft_adder"), route="frame")


def test_always_detected_means_rejected(get_circuit):
    c = get_circuit("ft_adder")
    eng = FrameEngine(c)
    for f in all_single_faults(c):
        cls, acc, _, _ = eng.classify(eng.effect(f))
        if cls == "always_detected":
            assert acc < 1e-12


def test_to_dict_shape(get_circuit):
    d = audit_single_faults(get_circuit("nonft_adder")).to_dict()
    assert d["faults"] == 78 and len(d["malicious"]) == d["counts"]["malicious"]


@pytest.fixture(scope="module")
def ft_pairs(get_circuit):
    return count_malicious_pairs(get_circuit("ft_adder"), threads=1)


def test_pair_count(ft_pairs):
    assert 300 <= ft_pairs.count <= 4000
    assert ft_pairs.count == 3262
    assert ft_pairs.n_pairs == 66486  # C(372, 2) minus same-location pairs


def test_pair_count_thread_stable(ft_pairs, get_circuit):
    again = count_malicious_pairs(get_circuit("ft_adder"), threads=4)
    assert again.count == ft_pairs.count and sorted(again.pairs) == sorted(ft_pairs.pairs)


def test_pair_count_nonft_direct(get_circuit):
    rep = count_malicious_pairs(get_circuit("nonft_adder"))
    assert rep.n_pairs == 78 * 77 // 2 - 5 * 15 * 14 // 2
    assert rep.count == 2222


@settings(max_examples=40)
@given(st.data())
def test_pair_frame_matches_direct(ft_pairs, get_circuit, data):
    """The XOR-combined effect classifies a pair the same way as re-simulation."""
    c = get_circuit("ft_adder")
    faults = ft_pairs.faults
    malicious = set(ft_pairs.pairs)
    if data.draw(st.booleans()):
        i, j = data.draw(st.sampled_from(ft_pairs.pairs))
    else:
        i = data.draw(st.integers(0, len(faults) - 2))
        j = data.draw(st.integers(i + 1, len(faults) - 1))
    if faults[i].location == faults[j].location:
        return
    direct = classify_direct(c, [faults[i], faults[j]])[0]
    assert (direct == "malicious") == ((i, j) in malicious)


def test_pair_report_manifest(ft_pairs):
    d = ft_pairs.to_dict(max_pairs=3)
    assert d["malicious_pairs"] == 3262 and len(d["examples"]) == 3
    assert "pairs" in d["manifest"]


def test_location_fields(get_circuit):
    c = get_circuit("ft_adder")
    locs = enumerate_locations(c)
    gate = next(l for l in locs if l.kind == TWO_QUBIT)
    meas = next(l for l in locs if l.kind == MEASUREMENT)
    assert gate.instruction_index == gate.index and len(gate.support) == 2
    assert meas.support == c.instructions[meas.index].record_id
