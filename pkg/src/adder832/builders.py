"""Builders for every circuit of the toolkit, plus the name registry.

Qubit layout of the [[8,3,2]] circuits: data qubits 0-7 (cube vertex ``q`` has
coordinates given by the bits of ``q``), then ancillas.  Record numbers are
assigned in program order.
"""
from __future__ import annotations

from typing import Callable, Sequence

from .circuits import Circuit, CircuitBuilder, Predicate
from .codes import code_832
from .pauli import PauliString

# T on even-weight vertices, T-dagger on odd-weight ones (found by exhausting all
# 256 sign patterns against the eight encoded basis states)
T_PATTERN = tuple("TDG" if bin(q).count("1") % 2 else "T" for q in range(8))

# minimal CNOT preparation of |+++> found by breadth-first search: Bell pairs
# on (0,6), (1,7), (2,3), (4,5) followed by six CNOTs
PREP_BELL_PAIRS = ((0, 6), (1, 7), (2, 3), (4, 5))
PREP_CNOTS = ((0, 1), (4, 0), (2, 0), (1, 4), (1, 2), (0, 1))

# joint X_S / Z_S check after the preparation; ("X", q) is CX(ancX -> q) and
VERIFY_SUPPORT = (1, 3, 4, 6)
# ("Z", q) is CX(q -> ancZ).  An even number of qubits must see their X-check
# CNOT before their Z-check CNOT, otherwise the two ancillas fail to commute.
# This ordering leaves no malicious single fault in the full adder.
VERIFY_SCHEDULE = (("X", 3), ("X", 4), ("Z", 1), ("Z", 3), ("Z", 4), ("Z", 6), ("X", 1), ("X", 6))

# logical CNOT 1 -> 3 as a relabelling of the data qubits
CNOT_1_3 = (0, 5, 2, 7, 4, 1, 6, 3)
X2_FACE = (0, 1, 4, 5)
READOUT_FACE = (2, 3, 6, 7)


def _data_roles(extra: Sequence[str]) -> tuple[str, ...]:
    return ("data",) * 8 + tuple(extra)


def _prep_region(b: CircuitBuilder, pairs=PREP_BELL_PAIRS, cnots=PREP_CNOTS) -> None:
    b.begin("prep")
    for c, t in pairs:
        b.h(c)
        b.cx(c, t)
    for c, t in cnots:
        b.cx(c, t)


def _verify_region(b: CircuitBuilder, anc_x: int, anc_z: int, schedule=VERIFY_SCHEDULE) -> tuple[int, int]:
    b.begin("verify")
    b.h(anc_x)
    for kind, q in schedule:
        if kind == "X":
            b.cx(anc_x, q)
        else:
            b.cx(q, anc_z)
    rx = b.measure(anc_x, "X")
    rz = b.measure(anc_z, "Z")
    return rx, rz


def _flagged_x_measurement(b: CircuitBuilder, qubits: Sequence[int], anc: int, flag: int) -> tuple[int, int]:
    """Non-destructive weight-4 X measurement with one flag qubit."""
    q0, q1, q2, q3 = qubits
    b.h(anc)
    b.cx(anc, q0)
    b.cx(anc, flag)
    b.cx(anc, q1)
    b.cx(anc, q2)
    b.cx(anc, flag)
    b.cx(anc, q3)
    return b.measure(anc, "X"), b.measure(flag, "Z")


def _stab_strings(n: int, qubits: Sequence[int], ops: Sequence[PauliString]) -> list[str]:
    return [str(p.embed(n, list(qubits))) for p in ops]


def _plus_state_metadata() -> dict:
    """Output check for |+++>: logical X errors act trivially on it."""
    c = code_832()
    return {
        "output_check": {"qubits": list(range(8)),
                         "stabilizers": [str(s) for s in c.stabilizers],
                         "trivial": [str(x) for x in c.logical_x]},
        "ideal_stabilizers": [str(s) for s in c.stabilizers + c.logical_x],
    }


# ---------------------------------------------------------------------------
# adders
# ---------------------------------------------------------------------------
def build_nonft_adder() -> Circuit:
    """Adder on three bare qubits: 5 CNOTs and 3 measurements.

    Qubit 0 holds ``a``, qubit 1 holds ``b`` (then ``a xor b``), qubit 2 the
    carry, measured in the X basis.  The CCZ phase is built from T gates on the
    parities ``c, a^c, a^b^c, b^c``; the phases it leaves on ``(a, b)`` alone
    are diagonal and do not affect Z-basis results.
    """
    b = CircuitBuilder(3, ("data", "data", "data"))
    b.begin("inputs")
    b.h(0, 1, 2)
    b.begin("ccz")
    b.gate("T", 2)
    b.cx(0, 2)
    b.gate("TDG", 2)
    b.cx(1, 2)
    b.gate("T", 2)
    b.cx(0, 2)
    b.gate("TDG", 2)
    b.cx(1, 2)
    b.begin("sum")
    b.cx(0, 1)
    b.begin("readout")
    ra = b.measure(0, "Z")
    rs0 = b.measure(1, "Z")
    rs1 = b.measure(2, "X")
    return b.build("nonft_adder", readout={"a": (ra,), "s0": (rs0,), "s1": (rs1,)},
                   metadata={"description": "one-bit adder on bare qubits"})


def build_ft_preparation(schedule=VERIFY_SCHEDULE) -> Circuit:
    """|+++> of the [[8,3,2]] code: 10 preparation CNOTs and an 8-CNOT joint check."""
    b = CircuitBuilder(10, _data_roles(["ancilla", "ancilla"]))
    _prep_region(b)
    rx, rz = _verify_region(b, 8, 9, schedule)
    return b.build(
        "ft_preparation",
        postselect=[Predicate((rx,), "verify_x", "red"), Predicate((rz,), "verify_z", "red")],
        metadata={"verify_support": list(VERIFY_SUPPORT), **_plus_state_metadata()})


def build_ft_adder(schedule=VERIFY_SCHEDULE, t_pattern=T_PATTERN) -> Circuit:
    """Fault-tolerant adder: 24 CNOTs and 12 measurements on 12 qubits.

    Regions: preparation, joint X_S/Z_S check (ancillas 8, 9), transversal
    T layer, logical CNOT 1 -> 3 by relabelling, destructive X measurement of
    the face holding X2, flagged X^4 on the opposite face (ancilla 10, flag
    11), and Z readout of the opposite face.
    """
    b = CircuitBuilder(12, _data_roles(["ancilla", "ancilla", "ancilla", "flag"]))
    _prep_region(b)
    rx, rz = _verify_region(b, 8, 9, schedule)
    b.begin("ccz")
    for q, g in enumerate(t_pattern):
        b.gate(g, q)
    b.begin("cnot_1_3")
    b.permute(CNOT_1_3 + (8, 9, 10, 11))
    b.begin("measure_x2")
    face = [b.measure(q, "X") for q in X2_FACE]
    ranc, rflag = _flagged_x_measurement(b, READOUT_FACE, 10, 11)
    b.begin("measure_z")
    zr = {q: b.measure(q, "Z") for q in READOUT_FACE}
    post = [
        Predicate((rx,), "verify_x", "red"),
        Predicate((rz,), "verify_z", "red"),
        Predicate((rflag,), "flag", "red"),
        Predicate(tuple(face) + (ranc,), "s_x_parity", "blue"),
        Predicate(tuple(zr.values()), "z_face_parity", "blue"),
    ]
    readout = {
        "a": (zr[2], zr[6]),      # Z1 on an edge of the readout face
        "s0": (zr[2], zr[3]),     # Z3 after the relabelling CNOT
        "s1": tuple(face),        # X2, the carry
    }
    return b.build("ft_adder", post, readout,
                   metadata={"fidelity_cut": "measure_x2",
                             "verify_support": list(VERIFY_SUPPORT)})


# ---------------------------------------------------------------------------
# generic preparation used for comparison
# ---------------------------------------------------------------------------
def build_generic_preparation() -> Circuit:
    """Two rounds of the four weight-4 Z checks on |+>^8, with consistency checks
    and Pauli-frame fixes of the random signs (32 CNOTs, 8 measurements)."""
    checks = [(0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 4, 5), (0, 2, 4, 6)]
    b = CircuitBuilder(16, _data_roles(["ancilla"] * 8))
    b.begin("inputs")
    b.h(*range(8))
    rounds = []
    anc = 8
    for rnd in range(2):
        b.begin(f"round_{rnd}")
        recs = []
        for sup in checks:
            for q in sup:
                b.cx(q, anc)
            recs.append(b.measure(anc, "Z"))
            anc += 1
        rounds.append(recs)
    # X corrections: find a destabilizer for each check
    b.begin("frame")
    for j, sup in enumerate(checks):
        pattern = _destabilizer(checks, j)
        for q in range(8):
            if pattern >> q & 1:
                b.gate("X", q, condition=(rounds[1][j],))
    post = [Predicate((r1, r2), f"repeat_{j}", "blue") for j, (r1, r2) in enumerate(zip(*rounds))]
    return b.build("generic_preparation", post, metadata=_plus_state_metadata())


def _destabilizer(checks, j: int) -> int:
    """X pattern anticommuting with check ``j`` only."""
    for pattern in range(1, 256):
        if all((bin(pattern & sum(1 << q for q in s)).count("1") % 2) == (i == j)
               for i, s in enumerate(checks)):
            return pattern
    raise AssertionError("no destabilizer")  # pragma: no cover


REGISTRY: dict[str, Callable[[], Circuit]] = {
    "nonft_adder": build_nonft_adder,
    "ft_preparation": build_ft_preparation,
    "ft_adder": build_ft_adder,
    "generic_preparation": build_generic_preparation,
}


def build(name: str) -> Circuit:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown circuit {name!r}; choose from {sorted(REGISTRY)}") from None


# ---------------------------------------------------------------------------
# logical Hadamards by teleportation through a [[4,2,2]] block
# ---------------------------------------------------------------------------
# layout: data 0-7, [[4,2,2]] block 8-11, ancilla 12, flag 13, references 14-16
BLOCK = (8, 9, 10, 11)
ANC, FLAG = 12, 13
REFS = (14, 15, 16)
CNOT_FACE = (0, 2, 4, 6)
SECOND_PAIRING = (0, 2, 1, 3)

_LX = {1: (0, 1, 2, 3), 2: (0, 1, 4, 5), 3: (0, 2, 4, 6)}
_LZ = {1: (0, 4), 2: (0, 2), 3: (0, 1)}


def _reference_region(b: CircuitBuilder) -> None:
    """Noise-free preamble: each logical qubit maximally entangled with a reference."""
    b.begin("reference")
    for c, t in PREP_BELL_PAIRS:
        b.h(c)
        b.cx(c, t)
    for c, t in PREP_CNOTS:
        b.cx(c, t)
    for j, r in zip((1, 2, 3), REFS):
        b.h(r)
        for q in _LZ[j]:
            b.gate("CZ", r, q)


def _cnot_layer(b: CircuitBuilder, pairing: Sequence[int]) -> None:
    for c, t in zip(CNOT_FACE, pairing):
        b.cx(c, BLOCK[t])


def _x_check(b: CircuitBuilder, qubits: Sequence[int]) -> tuple[int, int]:
    rx, rf = _flagged_x_measurement(b, qubits, ANC, FLAG)
    b.reset(ANC)
    b.reset(FLAG)
    return rx, rf


def _bare_check(b: CircuitBuilder, kind: str, qubits: Sequence[int]) -> int:
    if kind == "X":
        b.h(ANC)
        for q in qubits:
            b.cx(ANC, q)
        r = b.measure(ANC, "X")
    else:
        for q in qubits:
            b.cx(q, ANC)
        r = b.measure(ANC, "Z")
    b.reset(ANC)
    return r


def _conditioned_logical(b: CircuitBuilder, kind: str, j: int, records: Sequence[int]) -> None:
    support = _LX[j] if kind == "X" else _LZ[j]
    for q in support:
        b.gate(kind, q, condition=tuple(records))


def _hadamard_metadata(targets: Sequence[int]) -> dict:
    c = code_832()
    out = list(range(8)) + list(REFS)
    m = len(out)

    def lift(p: PauliString) -> PauliString:
        return p.embed(m, range(8))

    ideal = []
    for j, r in zip((1, 2, 3), range(8, 8 + len(REFS))):
        lx = lift(PauliString.from_support(8, "X", _LX[j]))
        lz = lift(PauliString.from_support(8, "Z", _LZ[j]))
        # the input is stabilised by X_r Zbar_j and Z_r Xbar_j; a Hadamard swaps the bars
        with_x, with_z = (lx, lz) if j in targets else (lz, lx)
        ideal.append(with_x * PauliString.single(m, r, "X"))
        ideal.append(with_z * PauliString.single(m, r, "Z"))
    return {
        "noiseless_regions": ["reference"],
        "hadamard_targets": list(targets),
        "output_check": {"qubits": out,
                         "stabilizers": [str(lift(st)) for st in c.stabilizers],
                         "trivial": []},
        "ideal_stabilizers": [str(p) for p in ideal],
    }


def build_hadamard_double(corrections: bool = True) -> Circuit:
    """Logical H on qubits 1 and 2 of the [[8,3,2]] code via the [[4,2,2]] block.

    Steps: prepare |00> on the block (GHZ state, one Z-check), transversal
    CNOTs from face (0,2,4,6), flagged non-destructive X1, X2 and X1X2, H on
    the block, CNOTs again with qubits 9 and 10 exchanged, destructive Z
    readout of the block and Pauli-frame fixes.  Qubits 14-16 are noise-free
    references that make the logical action checkable.
    """
    b = CircuitBuilder(17, _data_roles(["block"] * 4 + ["ancilla", "flag"] + ["reference"] * 3))
    _reference_region(b)
    b.begin("block_prep")
    b.h(8)
    b.cx(8, 9)
    b.cx(8, 10)
    b.cx(9, 11)
    rz = _bare_check(b, "Z", (9, 10))
    b.begin("cnot_in")
    _cnot_layer(b, range(4))
    b.begin("project")
    x1, f1 = _x_check(b, _LX[1])
    x2, f2 = _x_check(b, _LX[2])
    # this representative of Xbar1 Xbar2 shares an odd number of qubits with every
    # single-qubit Z, so a lone Z never passes the repeat rule
    x12, f12 = _x_check(b, (0, 1, 6, 7))
    b.begin("block_hadamard")
    b.h(*BLOCK)
    b.begin("cnot_out")
    _cnot_layer(b, SECOND_PAIRING)
    b.begin("readout")
    m = [b.measure(q, "Z") for q in BLOCK]
    if corrections:
        b.begin("frame")
        # Zbar4 = Z(8,9) and Zbar5 = Z(8,10) carry the teleported X frame
        _conditioned_logical(b, "X", 1, (x1, m[0], m[1]))
        _conditioned_logical(b, "Z", 1, (x1,))
        _conditioned_logical(b, "X", 2, (x2, m[0], m[2]))
        _conditioned_logical(b, "Z", 2, (x2,))
    post = [Predicate((rz,), "block_z", "red")]
    post += [Predicate((f,), f"flag_{i}", "red") for i, f in enumerate((f1, f2, f12))]
    post += [Predicate((x1, x2, x12), "x_repeat", "blue"), Predicate(tuple(m), "block_parity", "blue")]
    return b.build("hadamard_double", post, metadata=_hadamard_metadata((1, 2)))


def build_hadamard_single(corrections: bool = True) -> Circuit:
    """Logical H on qubit 1 only.

    The block starts in |+0> (Bell pairs (8,10) and (9,11)); Xbar1 is measured
    twice with flags, and Xbar5 of the block twice with bare ancillas so that
    the second CNOT layer leaves logical qubit 2 untouched up to a Z fix.
    """
    b = CircuitBuilder(17, _data_roles(["block"] * 4 + ["ancilla", "flag"] + ["reference"] * 3))
    _reference_region(b)
    b.begin("block_prep")
    for c, t in ((8, 10), (9, 11)):
        b.h(c)
        b.cx(c, t)
    b.begin("cnot_in")
    _cnot_layer(b, range(4))
    b.begin("project")
    xa, fa = _x_check(b, (0, 1, 2, 3))
    xb, fb = _x_check(b, (4, 5, 6, 7))
    b.begin("block_hadamard")
    b.h(*BLOCK)
    b.begin("block_x")
    ya = _bare_check(b, "X", (8, 9))
    yb = _bare_check(b, "X", (10, 11))
    b.begin("cnot_out")
    _cnot_layer(b, SECOND_PAIRING)
    b.begin("readout")
    m = [b.measure(q, "Z") for q in BLOCK]
    if corrections:
        b.begin("frame")
        _conditioned_logical(b, "X", 1, (xa, m[0], m[1]))
        _conditioned_logical(b, "Z", 1, (xa,))
        _conditioned_logical(b, "Z", 2, (ya,))
    post = [Predicate((fa,), "flag_0", "red"), Predicate((fb,), "flag_1", "red"),
            Predicate((xa, xb), "x_repeat", "blue"), Predicate((ya, yb), "block_x_repeat", "blue"),
            Predicate(tuple(m), "block_parity", "blue")]
    return b.build("hadamard_single", post, metadata=_hadamard_metadata((1,)))


REGISTRY.update({"hadamard_double": build_hadamard_double, "hadamard_single": build_hadamard_single})


# ---------------------------------------------------------------------------
# adder on a 3 x 4 square lattice
# ---------------------------------------------------------------------------
class LayoutViolation(ValueError):
    """A two-qubit gate acts on sites that are not coupled."""


GRID = (3, 4)


def grid_edges(rows: int = GRID[0], cols: int = GRID[1]) -> tuple[tuple[int, int], ...]:
    """Nearest-neighbour pairs of a ``rows x cols`` lattice, site = ``cols * row + col``."""
    out = []
    for s in range(rows * cols):
        r, c = divmod(s, cols)
        if c + 1 < cols:
            out.append((s, s + 1))
        if r + 1 < rows:
            out.append((s, s + cols))
    return tuple(out)


def audit_layout(circuit: Circuit, edges: Sequence[tuple[int, int]] | None = None) -> None:
    """Raise :class:`LayoutViolation` unless every two-qubit gate sits on an edge."""
    from .circuits import Gate

    if edges is None:
        edges = circuit.metadata.get("coupling")
        if edges is None:
            raise LayoutViolation(f"{circuit.name} declares no coupling map")
    allowed = {frozenset(e) for e in edges}
    for i, ins in enumerate(circuit.instructions):
        if isinstance(ins, Gate) and len(ins.qubits) > 1:
            if any(frozenset((a, b)) not in allowed for a in ins.qubits for b in ins.qubits if a < b):
                raise LayoutViolation(f"instruction {i}: {ins.name} on {ins.qubits} is not on the lattice")


PLANAR_ANCILLAS = (5, 6)


def build_planar_ft_adder(start=None, prep=None, schedule=None) -> Circuit:
    """The fault-tolerant adder with nearest-neighbour gates only.

    Code qubit ``j`` starts on site ``start[j]`` of rows 0-1 and is prepared
    there.  The two data qubits on sites 5 and 6 then step down to row 2, and
    the freed sites serve first as the X/Z check pair (exchanged twice by
    SWAPs) and then as a two-qubit cat state for the flagged X^4 readout.
    ``schedule`` mixes ``("X", j)``, ``("Z", j)`` and ``("SWAP",)``.
    """
    start = PLANAR_START if start is None else tuple(start)
    prep = PLANAR_PREP if prep is None else tuple(prep)
    schedule = PLANAR_SCHEDULE if schedule is None else tuple(schedule)
    a_site, b_site = PLANAR_ANCILLAS
    n = GRID[0] * GRID[1]
    site = [s + GRID[1] if s in PLANAR_ANCILLAS else s for s in start]
    roles = ["ancilla"] * n
    for s in site:
        roles[s] = "data"
    b = CircuitBuilder(n, roles)
    b.begin("prep")
    for g in prep:
        b.gate(g[0], *(start[q] for q in g[1:]))
    b.begin("move")
    for s in PLANAR_ANCILLAS:
        b.cx(s, s + GRID[1])
        b.cx(s + GRID[1], s)
    b.begin("verify")
    anc_x, anc_z = a_site, b_site
    b.h(anc_x)
    for op in schedule:
        if op[0] == "SWAP":
            b.swap_as_cx(a_site, b_site)
            anc_x, anc_z = anc_z, anc_x
        elif op[0] == "X":
            b.cx(anc_x, site[op[1]])
        else:
            b.cx(site[op[1]], anc_z)
    rx = b.measure(anc_x, "X")
    rz = b.measure(anc_z, "Z")
    b.reset(a_site)
    b.reset(b_site)
    b.begin("ccz")
    for q, g in enumerate(T_PATTERN):
        b.gate(g, site[q])
    b.begin("cnot_1_3")
    perm = list(range(n))
    for q, img in enumerate(CNOT_1_3):
        perm[site[q]] = site[img]
    b.permute(perm)
    b.begin("measure_x2")
    face = [b.measure(site[q], "X") for q in X2_FACE]
    # cat state on the two ancillas; each half touches the two readout qubits next to it
    near = {s: [q for q in READOUT_FACE if frozenset((site[q], s)) in _GRID_EDGES] for s in PLANAR_ANCILLAS}
    b.h(a_site)
    b.cx(a_site, b_site)
    for s in PLANAR_ANCILLAS:
        for q in near[s]:
            b.cx(s, site[q])
    b.cx(a_site, b_site)
    ranc = b.measure(a_site, "X")
    rflag = b.measure(b_site, "Z")
    b.begin("measure_z")
    zr = {q: b.measure(site[q], "Z") for q in READOUT_FACE}
    post = [
        Predicate((rx,), "verify_x", "red"),
        Predicate((rz,), "verify_z", "red"),
        Predicate((rflag,), "flag", "red"),
        Predicate(tuple(face) + (ranc,), "s_x_parity", "blue"),
        Predicate(tuple(zr.values()), "z_face_parity", "blue"),
    ]
    readout = {"a": (zr[2], zr[6]), "s0": (zr[2], zr[3]), "s1": tuple(face)}
    supp = sorted({op[1] for op in schedule if op[0] != "SWAP"})
    return b.build("planar_ft_adder", post, readout,
                   metadata={"fidelity_cut": "measure_x2", "verify_support": supp,
                             "coupling": [list(e) for e in _GRID_EDGES_LIST],
                             "code_sites": site, "grid": list(GRID)})


_GRID_EDGES_LIST = grid_edges()
_GRID_EDGES = {frozenset(e) for e in _GRID_EDGES_LIST}
# frozen output of scripts/search_planar_layout.py: a 10-CNOT preparation that
# respects the 2 x 4 block, and a check schedule with no malicious single fault
PLANAR_START = (3, 0, 6, 5, 2, 1, 7, 4)
PLANAR_PREP = (("H", 1), ("CX", 1, 7), ("H", 2), ("CX", 2, 3), ("H", 6), ("CX", 6, 0),
               ("H", 5), ("CX", 5, 4), ("CX", 7, 3), ("CX", 5, 1), ("CX", 3, 5),
               ("CX", 4, 0), ("CX", 6, 2), ("CX", 2, 4))
PLANAR_SCHEDULE = (("Z", 2), ("X", 7), ("SWAP",), ("X", 2), ("Z", 7), ("X", 6), ("Z", 3),
                   ("SWAP",), ("X", 3), ("Z", 6))

REGISTRY["planar_ft_adder"] = build_planar_ft_adder
