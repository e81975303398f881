"""Circuit intermediate representation shared by every simulation engine.

A circuit is an ordered tuple of instructions acting on qubits that all start
in ``|0>``.  Measurements write integer records ``0, 1, 2, ...`` in program
order.  A :class:`Gate` may carry a ``condition``: it is applied only when the
parity of the listed records is odd.  :class:`Permute` relabels qubits (the
content of qubit ``i`` moves to ``perm[i]``) and is noise-free.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence, Union

SCHEMA = "adder832.circuit/1"

SINGLE_QUBIT_GATES = ("I", "H", "S", "SDG", "T", "TDG", "X", "Y", "Z")
TWO_QUBIT_GATES = ("CX", "CZ", "SWAP")
THREE_QUBIT_GATES = ("CCZ",)
ALL_GATES = SINGLE_QUBIT_GATES + TWO_QUBIT_GATES + THREE_QUBIT_GATES
CLIFFORD_GATES = ("I", "H", "S", "SDG", "X", "Y", "Z", "CX", "CZ", "SWAP")
DIAGONAL_NON_CLIFFORD = ("T", "TDG")
PAULI_GATES = ("X", "Y", "Z")
_ARITY = {**{g: 1 for g in SINGLE_QUBIT_GATES}, **{g: 2 for g in TWO_QUBIT_GATES}, "CCZ": 3}


class CircuitError(ValueError):
    """Structurally invalid circuit."""


class ParseError(ValueError):
    """Malformed circuit document; ``path`` locates the offending element."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    condition: tuple[int, ...] = ()

    @property
    def is_two_qubit(self) -> bool:
        return self.name in TWO_QUBIT_GATES


@dataclass(frozen=True)
class Measure:
    qubit: int
    basis: str
    record: int

    @property
    def record_id(self) -> int:
        return self.record


@dataclass(frozen=True)
class Reset:
    qubit: int


@dataclass(frozen=True)
class Permute:
    perm: tuple[int, ...]


Instruction = Union[Gate, Measure, Reset, Permute]


@dataclass(frozen=True)
class Predicate:
    """Post-selection rule: the parity of ``records`` must be even.

    ``colour`` records the drawing convention: ``red`` rules demand a trivial
    single result, ``blue`` rules an even parity over several results.
    """

    records: tuple[int, ...]
    name: str = ""
    colour: str = "red"

    def holds(self, bits: Sequence[int]) -> bool:
        return sum(bits[r] for r in self.records) % 2 == 0


@dataclass(frozen=True)
class Region:
    name: str
    start: int
    stop: int


@dataclass(frozen=True)
class Circuit:
    name: str
    n_qubits: int
    instructions: tuple[Instruction, ...]
    postselect: tuple[Predicate, ...] = ()
    readout: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    roles: tuple[str, ...] = ()
    regions: tuple[Region, ...] = ()
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        object.__setattr__(self, "postselect", tuple(self.postselect))
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "readout", {k: tuple(v) for k, v in dict(self.readout).items()})
        if not self.roles:
            object.__setattr__(self, "roles", ("data",) * self.n_qubits)
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "metadata", dict(self.metadata))
        self.validate()

    # -- derived quantities -----------------------------------------------------
    @property
    def n_records(self) -> int:
        return sum(1 for ins in self.instructions if isinstance(ins, Measure))

    @property
    def noiseless_indices(self) -> frozenset[int]:
        """Instructions inside regions listed under ``metadata['noiseless_regions']``."""
        out: set[int] = set()
        for name in self.metadata.get("noiseless_regions", ()):
            r = self.region(name)
            out.update(range(r.start, r.stop))
        return frozenset(out)

    @property
    def two_qubit_gate_count(self) -> int:
        """Two-qubit gates outside noise-free regions."""
        quiet = self.noiseless_indices
        return sum(1 for i, ins in enumerate(self.instructions)
                   if isinstance(ins, Gate) and ins.is_two_qubit and i not in quiet)

    @property
    def measurement_count(self) -> int:
        return self.n_records

    def counts(self) -> dict[str, int]:
        return {"two_qubit_gates": self.two_qubit_gate_count, "measurements": self.measurement_count}

    def measurements(self) -> list[Measure]:
        return [ins for ins in self.instructions if isinstance(ins, Measure)]

    def region(self, name: str) -> Region:
        for r in self.regions:
            if r.name == name:
                return r
        raise KeyError(name)

    def is_clifford(self) -> bool:
        return all(not isinstance(i, Gate) or i.name in CLIFFORD_GATES for i in self.instructions)

    def with_metadata(self, **kw) -> "Circuit":
        md = dict(self.metadata)
        md.update(kw)
        return Circuit(self.name, self.n_qubits, self.instructions, self.postselect,
                       self.readout, self.roles, self.regions, md)

    def accepted(self, bits: Sequence[int]) -> bool:
        return all(p.holds(bits) for p in self.postselect)

    @property
    def logical_readout(self) -> Mapping[str, tuple[int, ...]]:
        return self.readout

    def read(self, bits: Sequence[int]) -> dict[str, int]:
        return {k: sum(bits[r] for r in rs) % 2 for k, rs in self.readout.items()}

    # -- validation ---------------------------------------------------------------
    def validate(self) -> None:
        n = self.n_qubits
        if n < 1:
            raise CircuitError("a circuit needs at least one qubit")
        if len(self.roles) != n:
            raise CircuitError("roles must list one entry per qubit")
        next_record = 0
        for idx, ins in enumerate(self.instructions):
            where = f"instruction {idx}"
            if isinstance(ins, Gate):
                if ins.name not in ALL_GATES:
                    raise CircuitError(f"{where}: unknown gate {ins.name!r}")
                if len(ins.qubits) != _ARITY[ins.name]:
                    raise CircuitError(f"{where}: {ins.name} takes {_ARITY[ins.name]} qubits")
                _check_qubits(ins.qubits, n, where)
                if ins.condition:
                    if ins.name not in PAULI_GATES:
                        raise CircuitError(f"{where}: only Pauli gates may be classically conditioned")
                    if any(not 0 <= r < next_record for r in ins.condition):
                        raise CircuitError(f"{where}: condition uses a record not yet measured")
            elif isinstance(ins, Measure):
                _check_qubits((ins.qubit,), n, where)
                if ins.basis not in ("X", "Z"):
                    raise CircuitError(f"{where}: basis must be X or Z")
                if ins.record != next_record:
                    raise CircuitError(f"{where}: records must be dense and in program order")
                next_record += 1
            elif isinstance(ins, Reset):
                _check_qubits((ins.qubit,), n, where)
            elif isinstance(ins, Permute):
                if sorted(ins.perm) != list(range(n)):
                    raise CircuitError(f"{where}: permute needs a permutation of all {n} qubits")
            else:
                raise CircuitError(f"{where}: unknown instruction {ins!r}")
        for p in self.postselect:
            if not p.records or any(not 0 <= r < next_record for r in p.records):
                raise CircuitError(f"predicate {p.name!r} references undefined records")
        for k, rs in self.readout.items():
            if any(not 0 <= r < next_record for r in rs):
                raise CircuitError(f"readout {k!r} references undefined records")
        for r in self.regions:
            if not 0 <= r.start <= r.stop <= len(self.instructions):
                raise CircuitError(f"region {r.name!r} is out of bounds")


def _check_qubits(qs: Sequence[int], n: int, where: str) -> None:
    for q in qs:
        if not isinstance(q, int) or not 0 <= q < n:
            raise CircuitError(f"{where}: qubit {q!r} out of range")
    if len(set(qs)) != len(qs):
        raise CircuitError(f"{where}: repeated qubit in {tuple(qs)}")


class CircuitBuilder:
    """Small helper that hands out record numbers and tracks regions."""

    def __init__(self, n_qubits: int, roles: Sequence[str] | None = None):
        self.n = n_qubits
        self.ins: list[Instruction] = []
        self.regions: list[Region] = []
        self.roles = tuple(roles) if roles else ("data",) * n_qubits
        self._open: tuple[str, int] | None = None
        self.next_record = 0

    def gate(self, name: str, *qubits: int, condition: Iterable[int] = ()) -> None:
        self.ins.append(Gate(name.upper(), tuple(qubits), tuple(condition)))

    def h(self, *qs: int) -> None:
        for q in qs:
            self.gate("H", q)

    def cx(self, c: int, t: int) -> None:
        self.gate("CX", c, t)

    def swap_as_cx(self, a: int, b: int) -> None:
        self.cx(a, b)
        self.cx(b, a)
        self.cx(a, b)

    def measure(self, qubit: int, basis: str = "Z") -> int:
        r = self.next_record
        self.ins.append(Measure(qubit, basis.upper(), r))
        self.next_record += 1
        return r

    def reset(self, qubit: int) -> None:
        self.ins.append(Reset(qubit))

    def permute(self, perm: Sequence[int]) -> None:
        self.ins.append(Permute(tuple(perm)))

    def begin(self, name: str) -> None:
        self.end()
        self._open = (name, len(self.ins))

    def end(self) -> None:
        if self._open is not None:
            name, start = self._open
            self.regions.append(Region(name, start, len(self.ins)))
            self._open = None

    def build(self, name: str, postselect=(), readout=None, metadata=None) -> Circuit:
        self.end()
        return Circuit(name, self.n, tuple(self.ins), tuple(postselect), readout or {},
                       self.roles, tuple(self.regions), metadata or {})


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------
def _ins_to_dict(ins: Instruction) -> dict:
    if isinstance(ins, Gate):
        d = {"op": "gate", "name": ins.name, "qubits": list(ins.qubits)}
        if ins.condition:
            d["condition"] = list(ins.condition)
        return d
    if isinstance(ins, Measure):
        return {"op": "measure", "qubit": ins.qubit, "basis": ins.basis, "record": ins.record}
    if isinstance(ins, Reset):
        return {"op": "reset", "qubit": ins.qubit}
    return {"op": "permute", "perm": list(ins.perm)}


def serialize(c: Circuit) -> dict:
    return {
        "schema": SCHEMA,
        "name": c.name,
        "n_qubits": c.n_qubits,
        "roles": list(c.roles),
        "instructions": [_ins_to_dict(i) for i in c.instructions],
        "postselect": [{"records": list(p.records), "name": p.name, "colour": p.colour}
                       for p in c.postselect],
        "readout": {k: list(v) for k, v in c.readout.items()},
        "regions": [{"name": r.name, "start": r.start, "stop": r.stop} for r in c.regions],
        "metadata": dict(c.metadata),
    }


def to_json(c: Circuit) -> str:
    return json.dumps(serialize(c), indent=1, sort_keys=False)


def _need(d: Any, key: str, typ, path: str):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"missing field {key!r}", path)
    v = d[key]
    if typ is int and (isinstance(v, bool) or not isinstance(v, int)):
        raise ParseError(f"field {key!r} must be an integer", f"{path}.{key}")
    if typ is not int and not isinstance(v, typ):
        raise ParseError(f"field {key!r} has the wrong type", f"{path}.{key}")
    return v


def _int_list(v: Any, path: str) -> tuple[int, ...]:
    if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
        raise ParseError("expected a list of integers", path)
    return tuple(v)


def deserialize(doc: dict) -> Circuit:
    if not isinstance(doc, dict):
        raise ParseError("document must be an object", "$")
    if doc.get("schema") != SCHEMA:
        raise ParseError(f"unsupported schema {doc.get('schema')!r}", "$.schema")
    ins: list[Instruction] = []
    raw = _need(doc, "instructions", list, "$")
    for i, d in enumerate(raw):
        path = f"$.instructions[{i}]"
        op = _need(d, "op", str, path)
        if op == "gate":
            name = _need(d, "name", str, path)
            if name not in ALL_GATES:
                raise ParseError(f"unknown gate {name!r}", path + ".name")
            ins.append(Gate(name, _int_list(_need(d, "qubits", list, path), path + ".qubits"),
                            _int_list(d.get("condition", []), path + ".condition")))
        elif op == "measure":
            basis = _need(d, "basis", str, path)
            if basis not in ("X", "Z"):
                raise ParseError(f"bad basis {basis!r}", path + ".basis")
            ins.append(Measure(_need(d, "qubit", int, path), basis, _need(d, "record", int, path)))
        elif op == "reset":
            ins.append(Reset(_need(d, "qubit", int, path)))
        elif op == "permute":
            ins.append(Permute(_int_list(_need(d, "perm", list, path), path + ".perm")))
        else:
            raise ParseError(f"unknown op {op!r}", path + ".op")
    preds = []
    for i, p in enumerate(doc.get("postselect", [])):
        path = f"$.postselect[{i}]"
        preds.append(Predicate(_int_list(_need(p, "records", list, path), path + ".records"),
                               p.get("name", ""), p.get("colour", "red")))
    regions = []
    for i, r in enumerate(doc.get("regions", [])):
        path = f"$.regions[{i}]"
        regions.append(Region(_need(r, "name", str, path), _need(r, "start", int, path),
                              _need(r, "stop", int, path)))
    readout = {k: _int_list(v, f"$.readout.{k}") for k, v in doc.get("readout", {}).items()}
    try:
        return Circuit(_need(doc, "name", str, "$"), _need(doc, "n_qubits", int, "$"), tuple(ins),
                       tuple(preds), readout, tuple(doc.get("roles", ())), tuple(regions),
                       doc.get("metadata", {}))
    except CircuitError as e:
        raise ParseError(str(e), "$") from None


def from_json(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"line {e.lineno} column {e.colno}") from None
    return deserialize(doc)


def export_qasm_like(c: Circuit, realize_permutations: bool = False) -> str:
    """Flat text listing, one instruction per line.

    With ``realize_permutations`` each ``permute`` is written out as SWAP gates
    (decomposed into three CX each); otherwise it becomes a relabelling comment.
    """
    lines = [f"// {c.name}", f"qreg q[{c.n_qubits}];", f"creg r[{c.n_records}];"]
    for ins in c.instructions:
        if isinstance(ins, Gate):
            args = ", ".join(f"q[{q}]" for q in ins.qubits)
            stmt = f"{ins.name.lower()} {args};"
            if ins.condition:
                cond = "^".join(f"r[{r}]" for r in ins.condition)
                stmt = f"if ({cond}) {stmt}"
            lines.append(stmt)
        elif isinstance(ins, Measure):
            pre = f"h q[{ins.qubit}]; " if ins.basis == "X" else ""
            lines.append(f"{pre}measure q[{ins.qubit}] -> r[{ins.record}];  // basis {ins.basis}")
        elif isinstance(ins, Reset):
            lines.append(f"reset q[{ins.qubit}];")
        else:
            lines.append("// relabel " + " ".join(f"{i}->{j}" for i, j in enumerate(ins.perm) if i != j))
            if realize_permutations:
                for a, b in permutation_as_swaps(ins.perm):
                    lines.append(f"cx q[{a}], q[{b}]; cx q[{b}], q[{a}]; cx q[{a}], q[{b}];  // swap")
    for p in c.postselect:
        lines.append(f"// postselect even parity of {list(p.records)} ({p.name}, {p.colour})")
    for k, rs in c.readout.items():
        lines.append(f"// readout {k} = parity of {list(rs)}")
    return "\n".join(lines) + "\n"


def permutation_as_swaps(perm: Sequence[int]) -> list[tuple[int, int]]:
    """Transpositions whose product moves the content of ``i`` to ``perm[i]``."""
    # content[p] is the logical content currently sitting at position p
    content = list(range(len(perm)))
    where = list(range(len(perm)))
    swaps = []
    for i in range(len(perm)):
        target = perm[i]
        cur = where[i]
        if cur != target:
            other = content[target]
            swaps.append((cur, target))
            content[cur], content[target] = other, i
            where[other], where[i] = cur, target
    return swaps
