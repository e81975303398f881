import json

import pytest

from adder832 import builders
from adder832.circuits import (Circuit, CircuitBuilder, CircuitError, Gate, Measure, ParseError, Permute,
                               Predicate, deserialize, export_qasm_like, from_json, permutation_as_swaps,
                               serialize, to_json)
from adder832.codes import code_832
from adder832.faults import clifford_branches
from adder832.pauli import PauliString
from adder832.statevec import enumerate_branches, outcome_distribution

COUNTS = {
    "nonft_adder": (5, 3),
    "ft_preparation": (18, 2),
    "ft_adder": (24, 12),
    "planar_ft_adder": (34, 12),
    "generic_preparation": (32, 8),
    "hadamard_double": (31, 11),
    "hadamard_single": (26, 10),
}


def test_registry_names_stable():
    assert set(builders.REGISTRY) == set(COUNTS)


@pytest.mark.parametrize("name", sorted(COUNTS))
def test_counts(name, get_circuit):
    c = get_circuit(name)
    assert (c.two_qubit_gate_count, c.measurement_count) == COUNTS[name]
    assert c.counts() == {"two_qubit_gates": COUNTS[name][0], "measurements": COUNTS[name][1]}


@pytest.mark.parametrize("name", sorted(COUNTS))
def test_round_trip(name, get_circuit):
    c = get_circuit(name)
    assert deserialize(serialize(c)) == c
    assert from_json(to_json(c)) == c


@pytest.mark.parametrize("name", ["nonft_adder", "ft_adder", "planar_ft_adder"])
def test_noiseless_adders_uniform(name, get_circuit):
    c = get_circuit(name)
    tally = {}
    for b in enumerate_branches(c):
        assert c.accepted(b.records)
        v = c.read(b.records)
        k = f"{v['a']}{v['s0']}{v['s1']}"
        tally[k] = tally.get(k, 0.0) + b.probability
    assert sorted(tally) == ["000", "010", "101", "110"]
    assert all(abs(p - 0.25) < 1e-9 for p in tally.values())


def test_prep_output_state(get_circuit):
    c = get_circuit("ft_preparation")
    code = code_832()
    want = [s.embed(10, range(8)) for s in code.stabilizers + code.logical_x]
    for recs, prob, st in clifford_branches(c):
        assert c.accepted(recs)
        assert all(st.expectation(p) == 1 for p in want)


def test_ft_adder_structure(get_circuit):
    c = get_circuit("ft_adder")
    names = [r.name for r in c.regions]
    assert names == ["prep", "verify", "ccz", "cnot_1_3", "measure_x2", "measure_z"]
    assert c.roles.count("flag") == 1
    assert {p.colour for p in c.postselect} == {"red", "blue"}


def test_planar_layout(get_circuit):
    c = get_circuit("planar_ft_adder")
    builders.audit_layout(c)
    assert len(c.metadata["coupling"]) == 17  # 3 x 4 lattice


def test_layout_violation():
    b = CircuitBuilder(12)
    b.cx(0, 5)
    c = b.build("diagonal", metadata={"coupling": [list(e) for e in builders.grid_edges()]})
    with pytest.raises(builders.LayoutViolation):
        builders.audit_layout(c)
    with pytest.raises(builders.LayoutViolation):
        builders.audit_layout(builders.build("ft_adder"))


def test_grid_edges():
    e = builders.grid_edges(2, 2)
    assert sorted(e) == [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_export_counts(get_circuit):
    text = export_qasm_like(get_circuit("ft_adder"))
    assert sum(1 for l in text.splitlines() if l.startswith("cx ")) == 24
    assert "// relabel" in text
    real = export_qasm_like(get_circuit("ft_adder"), realize_permutations=True)
    assert real.count("// swap") == 2


def test_permutation_as_swaps():
    perm = builders.CNOT_1_3
    content = list(range(8))
    for a, b in permutation_as_swaps(perm):
        content[a], content[b] = content[b], content[a]
    assert all(content[perm[i]] == i for i in range(8))


def test_unknown_gate_in_document(get_circuit):
    doc = serialize(get_circuit("nonft_adder"))
    doc["instructions"][1]["name"] = "FOO"
    with pytest.raises(ParseError, match="unknown gate") as e:
        deserialize(doc)
    assert e.value.path == "$.instructions[1].name"


def test_missing_field_and_bad_json():
    with pytest.raises(ParseError):
        deserialize({"schema": "adder832.circuit/1", "name": "x"})
    with pytest.raises(ParseError):
        from_json("{not json")
    with pytest.raises(ParseError):
        deserialize({"schema": "other"})


def test_predicate_with_undefined_record():
    with pytest.raises(CircuitError):
        Circuit("bad", 1, (Measure(0, "Z", 0),), (Predicate((3,)),))


def test_gate_validation():
    with pytest.raises(CircuitError):
        Circuit("bad", 2, (Gate("CX", (0, 0)),))
    with pytest.raises(CircuitError):
        Circuit("bad", 2, (Gate("CX", (0, 2)),))


def test_permute_changes_nothing_noiseless(get_circuit):
    """Realising the relabel as SWAPs leaves the distribution unchanged."""
    c = get_circuit("ft_adder")
    new = []
    for ins in c.instructions:
        if isinstance(ins, Permute):
            for a, b in permutation_as_swaps(ins.perm):
                new += [Gate("CX", (a, b)), Gate("CX", (b, a)), Gate("CX", (a, b))]
        else:
            new.append(ins)
    swapped = Circuit(c.name, c.n_qubits, tuple(new), c.postselect, c.readout)
    assert swapped.two_qubit_gate_count == 30
    assert (abs(outcome_distribution(c) - outcome_distribution(swapped)) < 1e-12).all()


def test_ideal_stabilizers_are_valid(get_circuit):
    for name in ("hadamard_double", "hadamard_single", "ft_preparation"):
        md = get_circuit(name).metadata
        ops = [PauliString.from_str(t) for t in md["ideal_stabilizers"]]
        assert all(a.commutes(b) for a in ops for b in ops)


def test_metadata_json_serialisable(get_circuit):
    for name in COUNTS:
        json.dumps(get_circuit(name).metadata)
