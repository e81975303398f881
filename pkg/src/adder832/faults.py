"""Exhaustive circuit-level fault injection.

Faults are Pauli operators inserted right after a two-qubit gate, or flips of a
measurement's classical result.  Two evaluation routes are provided:

* a *frame* route that pushes each fault through the circuit to obtain a
  linear effect ``(key, mask, residual)`` and combines faults by XOR, and
* a *direct* route that re-simulates the circuit with the faults inserted and
  enumerates every measurement branch.

The frame route is exact for the circuits handled here: Clifford circuits
(where the effect fixes the outcome) and circuits whose only non-Clifford part
is one layer of diagonal single-qubit gates.  For the latter, the X-part of a
fault on the layer's qubits cannot be pushed through; it is kept as a *key*
and the layer is simulated once per key.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import gf2
from .circuits import CLIFFORD_GATES, DIAGONAL_NON_CLIFFORD, Circuit, Gate, Measure, Permute, Reset
from .pauli import PauliString, conjugate
from . import statevec as sv_mod
from .statevec import FLIP, ResourceError
from .tableau import ContradictionError, StabilizerState

PRUNE = sv_mod.PRUNE
TWO_QUBIT = "two_qubit_gate"
MEASUREMENT = "measurement"
SINGLE_QUBIT = "single_qubit_gate"
INIT = "init"
_PAIRS = [a + b for a, b in itertools.product("IXYZ", repeat=2) if a + b != "II"]


@dataclass(frozen=True)
class FaultLocation:
    index: int  # instruction index; -1 for the initial state
    kind: str
    qubits: tuple[int, ...] = ()
    record: int | None = None

    @property
    def instruction_index(self) -> int:
        return self.index

    @property
    def support(self) -> tuple[int, ...] | int:
        return self.record if self.kind == MEASUREMENT else self.qubits


@dataclass(frozen=True)
class Fault:
    location: FaultLocation
    pauli: PauliString | None  # None encodes a measurement flip
    label: str

    def as_injection(self) -> tuple[int, object]:
        return (self.location.index, FLIP if self.pauli is None else self.pauli)


@dataclass
class FaultOutcome:
    fault: tuple[Fault, ...]
    classification: str  # benign | always_detected | malicious
    accept_probability: float
    error_probability_given_accept: float
    witness: tuple[int, ...] | None = None

    @property
    def witness_branch(self) -> tuple[int, ...] | None:
        return self.witness


def enumerate_locations(circuit: Circuit) -> list[FaultLocation]:
    """Two-qubit gates and measurements in program order (the counting basis)."""
    return noise_locations(circuit)


def noise_locations(circuit: Circuit, include_single_qubit: bool = False,
                    include_init: bool = False) -> list[FaultLocation]:
    """Locations for a noise model: the counting basis, optionally extended by
    single-qubit gates and qubit initialisations.  ``permute`` and noise-free
    regions never contribute."""
    locs = []
    quiet = circuit.noiseless_indices
    if include_init:
        locs.extend(FaultLocation(-1, INIT, (q,)) for q in range(circuit.n_qubits))
    for i, ins in enumerate(circuit.instructions):
        if i in quiet:
            continue
        if isinstance(ins, Gate):
            if ins.condition:
                continue
            if ins.is_two_qubit:
                locs.append(FaultLocation(i, TWO_QUBIT, ins.qubits))
            elif len(ins.qubits) == 1 and include_single_qubit and ins.name != "I":
                locs.append(FaultLocation(i, SINGLE_QUBIT, ins.qubits))
        elif isinstance(ins, Measure):
            locs.append(FaultLocation(i, MEASUREMENT, (ins.qubit,), ins.record))
        elif isinstance(ins, Reset) and include_init:
            locs.append(FaultLocation(i, INIT, (ins.qubit,)))
    return locs


def fault_set(circuit: Circuit, loc: FaultLocation) -> list[Fault]:
    n = circuit.n_qubits
    if loc.kind == MEASUREMENT:
        return [Fault(loc, None, f"flip r{loc.record}")]
    if loc.kind == TWO_QUBIT:
        a, b = loc.qubits
        out = []
        for pp in _PAIRS:
            text = "".join(pp[0] if q == a else pp[1] if q == b else "I" for q in range(n))
            out.append(Fault(loc, PauliString.from_str(text), f"{pp}@{a},{b}"))
        return out
    if loc.kind == SINGLE_QUBIT:
        q = loc.qubits[0]
        return [Fault(loc, PauliString.single(n, q, l), f"{l}@{q}") for l in "XYZ"]
    if loc.kind == INIT:
        q = loc.qubits[0]
        return [Fault(loc, PauliString.single(n, q, "X"), f"X@{q}")]
    raise ValueError(f"unknown location kind {loc.kind!r}")


def all_single_faults(circuit: Circuit) -> list[Fault]:
    return [f for loc in enumerate_locations(circuit) for f in fault_set(circuit, loc)]


# ---------------------------------------------------------------------------
# error predicates
# ---------------------------------------------------------------------------
def arithmetic_error(a: int, s: int) -> bool:
    return s == 3 or (s == 2 and a == 0) or (s == 0 and a == 1)


def _record_tables(circuit: Circuit) -> tuple[np.ndarray, np.ndarray]:
    """Accept flag and arithmetic-error flag for every record string."""
    m = circuit.n_records
    r = np.arange(1 << m, dtype=np.int64)
    acc = np.ones(r.size, dtype=bool)
    for p in circuit.postselect:
        par = np.zeros(r.size, dtype=np.int64)
        for rec in p.records:
            par ^= (r >> rec) & 1
        acc &= par == 0
    err = np.zeros(r.size, dtype=bool)
    if {"a", "s0", "s1"} <= set(circuit.readout):
        vals = {}
        for k in ("a", "s0", "s1"):
            par = np.zeros(r.size, dtype=np.int64)
            for rec in circuit.readout[k]:
                par ^= (r >> rec) & 1
            vals[k] = par
        s = vals["s0"] + 2 * vals["s1"]
        a = vals["a"]
        err = (s == 3) | ((s == 2) & (a == 0)) | ((s == 0) & (a == 1))
    return acc, err


def _fwht(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.float64).copy()
    n = a.shape[-1]
    h = 1
    while h < n:
        a = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        x = a[..., 0, :].copy()
        y = a[..., 1, :]
        a[..., 0, :] = x + y
        a[..., 1, :] = x - y
        a = a.reshape(a.shape[:-3] + (n,))
        h *= 2
    return a


def xor_correlate(p: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``out[m] = sum_r f[r] * p[r ^ m]`` (rows of ``p`` independently)."""
    n = p.shape[-1]
    return _fwht(_fwht(p) * _fwht(f)) / n


# ---------------------------------------------------------------------------
# frame route
# ---------------------------------------------------------------------------
class UnsupportedCircuit(ValueError):
    """The frame route cannot represent this circuit exactly."""


@dataclass(frozen=True)
class Effect:
    key: int        # X-part stuck before the diagonal layer (qubit bitmask)
    mask: int       # flipped records
    residual: int   # symplectic vector x | z << n of the Pauli left at the end

    def __xor__(self, o: "Effect") -> "Effect":
        return Effect(self.key ^ o.key, self.mask ^ o.mask, self.residual ^ o.residual)


ZERO_EFFECT = Effect(0, 0, 0)


def find_diagonal_layer(circuit: Circuit) -> tuple[int, int] | None:
    """Instruction range of the single non-Clifford layer, or ``None`` if Clifford."""
    idx = [i for i, ins in enumerate(circuit.instructions)
           if isinstance(ins, Gate) and ins.name not in CLIFFORD_GATES]
    if not idx:
        return None
    lo, hi = idx[0], idx[-1] + 1
    seen = set()
    for ins in circuit.instructions[lo:hi]:
        if not (isinstance(ins, Gate) and len(ins.qubits) == 1 and not ins.condition
                and ins.name in DIAGONAL_NON_CLIFFORD + ("S", "SDG", "Z", "I")):
            raise UnsupportedCircuit("non-Clifford gates must form one diagonal single-qubit layer")
        if ins.qubits[0] in seen:
            raise UnsupportedCircuit("the diagonal layer acts twice on one qubit")
        seen.add(ins.qubits[0])
    return lo, hi


class FrameEngine:
    """Linear fault effects plus cached per-key outcome distributions."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.n = circuit.n_qubits
        self.layer = find_diagonal_layer(circuit)
        if self.layer is not None:
            lo, hi = self.layer
            self.layer_mask = sum(1 << ins.qubits[0] for ins in circuit.instructions[lo:hi])
            try:
                sv_mod.deferred_order(circuit)
            except ValueError as e:
                raise UnsupportedCircuit(str(e)) from None
            if self.n > sv_mod.MAX_QUBITS:
                raise ResourceError("too many qubits for the per-key state vectors")
        else:
            self.layer_mask = 0
        self._dist: dict[int, np.ndarray] = {}

    # -- propagation ------------------------------------------------------------
    def propagate(self, start: int, p: PauliString | None, mask: int = 0,
                  stop: int | None = None) -> Effect:
        """Effect of Pauli ``p`` inserted after instruction ``start`` (-1: at the beginning)."""
        n = self.n
        p = PauliString(n) if p is None else p.unsigned()
        key = 0
        prog = self.circuit.instructions
        end = len(prog) if stop is None else stop
        lo = self.layer[0] if self.layer else None
        hi = self.layer[1] if self.layer else None
        for j in range(start + 1, end):
            ins = prog[j]
            if lo is not None and j == lo:
                key = p.x & self.layer_mask
                p = PauliString(n, p.x & ~self.layer_mask, p.z)
            if isinstance(ins, Gate):
                if lo is not None and lo <= j < hi:
                    continue  # diagonal layer: commutes with the remaining Pauli
                if ins.condition:
                    if bin(mask & _bits(ins.condition)).count("1") & 1:
                        p = p * PauliString.single(n, ins.qubits[0], ins.name)
                        p = p.unsigned()
                    continue
                p = conjugate(p, ins.name, ins.qubits)
            elif isinstance(ins, Measure):
                q = ins.qubit
                flip = (p.x >> q & 1) if ins.basis == "Z" else (p.z >> q & 1)
                if flip:
                    mask ^= 1 << ins.record
                p = PauliString(n, p.x & ~(1 << q), p.z & ~(1 << q))
            elif isinstance(ins, Reset):
                q = ins.qubit
                p = PauliString(n, p.x & ~(1 << q), p.z & ~(1 << q))
            elif isinstance(ins, Permute):
                p = p.permuted(ins.perm)
        return Effect(key, mask, gf2.sym_vec(p.unsigned()))

    def effect(self, fault: Fault) -> Effect:
        loc = fault.location
        if fault.pauli is None:
            return self.propagate(loc.index, None, 1 << loc.record)
        if self.layer is not None and loc.kind == SINGLE_QUBIT and self.layer[0] <= loc.index < self.layer[1]:
            # a fault after a gate of the layer sits after the whole layer on that qubit
            return self.propagate(self.layer[1] - 1, fault.pauli)
        return self.propagate(loc.index, fault.pauli)

    # -- per-key distributions ----------------------------------------------------
    def distribution(self, key: int) -> np.ndarray:
        d = self._dist.get(key)
        if d is None:
            if self.layer is None:
                raise UnsupportedCircuit("Clifford circuits are evaluated without distributions")
            ins = None
            if key:
                ins = (self.layer[0], PauliString(self.n, key, 0))
            d = sv_mod.outcome_distribution(self.circuit, key_insert=ins)
            self._dist[key] = d
        return d

    def keys(self) -> list[int]:
        """All keys reachable as subsets of the layer's qubits."""
        qs = [q for q in range(self.n) if self.layer_mask >> q & 1]
        out = []
        for bits in range(1 << len(qs)):
            out.append(sum(1 << q for i, q in enumerate(qs) if bits >> i & 1))
        return out

    @cached_property
    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        return _record_tables(self.circuit)

    @cached_property
    def _corr(self) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        acc, err = self.tables
        out = {}
        keys = self.keys()
        P = np.stack([self.distribution(k) for k in keys])
        A = xor_correlate(P, acc.astype(float))
        E = xor_correlate(P, (acc & err).astype(float))
        for i, k in enumerate(keys):
            out[k] = (A[i], E[i])
        return out

    def accept_error(self, eff: Effect) -> tuple[float, float]:
        """(P(accept), P(accept and arithmetic error)) for a non-Clifford adder."""
        A, E = self._corr[eff.key]
        return float(A[eff.mask]), float(E[eff.mask])

    # -- classification ------------------------------------------------------------
    @cached_property
    def output_check(self) -> "OutputCheck | None":
        md = self.circuit.metadata.get("output_check")
        return OutputCheck.from_metadata(self.n, md) if md else None

    def clifford_accepts(self, mask: int) -> bool:
        return all(bin(mask & _bits(p.records)).count("1") % 2 == 0 for p in self.circuit.postselect)

    def classify(self, eff: Effect) -> tuple[str, float, float, tuple[int, ...] | None]:
        if self.layer is None:
            if not self.clifford_accepts(eff.mask):
                return "always_detected", 0.0, 0.0, None
            if self.output_check is not None:
                bad = self.output_check.is_logical_error(eff.residual)
            else:
                acc, err = self.tables
                # Clifford adder: every fault-free record string is valid, so the
                # outcome set is shifted by the mask
                P = self._clifford_dist
                shifted = P[np.arange(P.size) ^ eff.mask]
                bad = bool(np.any((shifted > PRUNE) & acc & err))
            return ("malicious" if bad else "benign"), 1.0, (1.0 if bad else 0.0), \
                ((eff.mask,) if bad else None)
        A, E = self.accept_error(eff)
        if A <= PRUNE:
            return "always_detected", A, 0.0, None
        if E > PRUNE:
            return "malicious", A, E / A, (self._witness(eff),)
        return "benign", A, E / A, None

    @cached_property
    def _clifford_dist(self) -> np.ndarray:
        return sv_mod.outcome_distribution(self.circuit)

    def _witness(self, eff: Effect) -> int:
        acc, err = self.tables
        p = self.distribution(eff.key)
        shifted = p[np.arange(p.size) ^ eff.mask]
        w = np.flatnonzero((shifted > PRUNE) & acc & err)
        return int(w[0])


def _bits(records: Sequence[int]) -> int:
    m = 0
    for r in records:
        m |= 1 << r
    return m


@dataclass
class OutputCheck:
    """Residual Pauli on ``qubits`` is a logical error if it commutes with the
    code stabilizers but lies outside the group spanned by them and ``trivial``."""

    n: int
    qubits: tuple[int, ...]
    stabilizers: tuple[PauliString, ...]
    trivial: tuple[PauliString, ...]

    @classmethod
    def from_metadata(cls, n: int, md: dict) -> "OutputCheck":
        P = PauliString.from_str
        return cls(n, tuple(md["qubits"]), tuple(P(s) for s in md["stabilizers"]),
                   tuple(P(s) for s in md.get("trivial", [])))

    @cached_property
    def _span(self) -> list[int]:
        return [gf2.sym_vec(s) for s in self.stabilizers + self.trivial]

    def is_logical_error(self, residual: int) -> bool:
        x, z = residual & ((1 << self.n) - 1), residual >> self.n
        e = PauliString(self.n, x, z).restrict(self.qubits)
        if not all(e.commutes(s) for s in self.stabilizers):
            return False
        return not gf2.in_span(gf2.sym_vec(e), self._span)


# ---------------------------------------------------------------------------
# direct route
# ---------------------------------------------------------------------------
def clifford_branches(circuit: Circuit, injected_faults=()) -> list[tuple[tuple[int, ...], float, StabilizerState]]:
    """Every measurement branch of a Clifford circuit, on stabilizer tableaux.

    Returns ``(records, probability, final_state)`` triples; deterministic
    measurements do not branch, random ones split with probability 1/2.
    """
    table = sv_mod._fault_table(injected_faults)
    prog = circuit.instructions
    init = StabilizerState.zero(circuit.n_qubits)
    for f in table.get(-1, ()):
        init.apply_pauli(f)
    out = []
    stack = [(0, [], 1.0, init)]
    while stack:
        pos, recs, prob, st = stack.pop()
        while pos < len(prog):
            ins = prog[pos]
            here = table.get(pos, ())
            if isinstance(ins, (Measure, Reset)):
                basis = ins.basis if isinstance(ins, Measure) else "Z"
                other = st.copy()
                try:
                    o, det = st.measure(ins.qubit, basis, forced=1)
                except ContradictionError:
                    o, det = -1, True
                bit = 0 if o == 1 else 1
                if not det:
                    other.measure(ins.qubit, basis, forced=-1)
                    rec2 = list(recs)
                    if isinstance(ins, Measure):
                        rec2.append(1 ^ (FLIP in here))
                    else:
                        other.apply("X", [ins.qubit])
                    for f in here:
                        if f != FLIP:
                            other.apply_pauli(f)
                    stack.append((pos + 1, rec2, prob / 2, other))
                    prob /= 2
                if isinstance(ins, Measure):
                    recs.append(bit ^ (FLIP in here))
                elif bit:
                    st.apply("X", [ins.qubit])
            elif isinstance(ins, Gate):
                if not ins.condition or sum(recs[r] for r in ins.condition) % 2:
                    st.apply(ins.name, ins.qubits)
            elif isinstance(ins, Permute):
                st.permute(ins.perm)
            for f in here:
                if f != FLIP:
                    st.apply_pauli(f)
            pos += 1
        out.append((tuple(recs), prob, st))
    out.sort(key=lambda t: t[0])
    return out


def _classify_direct_clifford(circuit: Circuit, faults: Sequence[Fault], check: "OutputCheck"):
    n = circuit.n_qubits
    ideal = [PauliString.from_str(t).embed(n, check.qubits) for t in circuit.metadata["ideal_stabilizers"]]
    code = [s.embed(n, check.qubits) for s in check.stabilizers]
    acc_p = err_p = 0.0
    witness = None
    for recs, prob, st in clifford_branches(circuit, [f.as_injection() for f in faults]):
        if not circuit.accepted(recs):
            continue
        acc_p += prob
        in_code = all(st.expectation(s) == 1 for s in code)
        if in_code and any(st.expectation(s) != 1 for s in ideal):
            err_p += prob
            witness = witness or recs
    if acc_p <= PRUNE:
        return "always_detected", acc_p, 0.0, None
    if err_p > PRUNE:
        return "malicious", acc_p, err_p / acc_p, witness
    return "benign", acc_p, err_p / acc_p, None


def classify_direct(circuit: Circuit, faults: Sequence[Fault]) -> tuple[str, float, float, tuple[int, ...] | None]:
    """Exact classification by state-vector branch enumeration.

    Adders are judged on their arithmetic.  Circuits carrying an
    ``output_check`` are judged on their output state instead, simulated on
    tableaux: an accepted branch is a logical error when it lies in the
    codespace but violates one of the ``ideal_stabilizers``.
    """
    md = circuit.metadata.get("output_check")
    if md:
        return _classify_direct_clifford(circuit, faults, OutputCheck.from_metadata(circuit.n_qubits, md))
    branches = sv_mod.enumerate_branches(circuit, [f.as_injection() for f in faults])
    acc_p = err_p = 0.0
    witness = None
    for b in branches:
        if not circuit.accepted(b.records):
            continue
        acc_p += b.probability
        vals = circuit.read(b.records)
        if arithmetic_error(vals["a"], vals["s0"] + 2 * vals["s1"]):
            err_p += b.probability
            witness = witness or b.records
    if acc_p <= PRUNE:
        return "always_detected", acc_p, 0.0, None
    if err_p > PRUNE:
        return "malicious", acc_p, err_p / acc_p, witness
    return "benign", acc_p, err_p / acc_p, None


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------
@dataclass
class SingleFaultReport:
    circuit: str
    n_locations: int
    n_faults: int
    counts: dict[str, int]
    malicious: list[FaultOutcome]
    route: str

    def to_dict(self) -> dict:
        return {
            "schema": "adder832.single_fault_report/1",
            "circuit": self.circuit,
            "route": self.route,
            "locations": self.n_locations,
            "faults": self.n_faults,
            "counts": self.counts,
            "malicious": [{"faults": [f.label for f in o.fault],
                           "instruction": [f.location.index for f in o.fault],
                           "accept_probability": o.accept_probability,
                           "error_probability_given_accept": o.error_probability_given_accept,
                           "witness": list(o.witness) if o.witness else None}
                          for o in self.malicious],
        }


def _engine_or_none(circuit: Circuit) -> FrameEngine | None:
    try:
        return FrameEngine(circuit)
    except UnsupportedCircuit:
        return None


def audit_single_faults(circuit: Circuit, route: str = "auto") -> SingleFaultReport:
    """Classify every single fault of ``circuit``."""
    locs = enumerate_locations(circuit)
    faults = [f for loc in locs for f in fault_set(circuit, loc)]
    eng = _engine_or_none(circuit) if route in ("auto", "frame") else None
    if route == "frame" and eng is None:
        raise UnsupportedCircuit("frame route unavailable for this circuit")
    counts = {"benign": 0, "always_detected": 0, "malicious": 0}
    bad = []
    for f in faults:
        if eng is not None:
            cls, a, e, w = eng.classify(eng.effect(f))
        else:
            cls, a, e, w = classify_direct(circuit, [f])
        counts[cls] += 1
        if cls == "malicious":
            bad.append(FaultOutcome((f,), cls, a, e, w))
    return SingleFaultReport(circuit.name, len(locs), len(faults), counts, bad,
                             "frame" if eng is not None else "direct")


@dataclass
class PairReport:
    circuit: str
    count: int
    n_faults: int
    n_pairs: int
    pairs: list[tuple[int, int]]  # indices into the single-fault list
    faults: list[Fault]
    manifest: dict
    variants: dict[str, int] = field(default_factory=dict)

    def to_dict(self, max_pairs: int | None = 50) -> dict:
        shown = self.pairs if max_pairs is None else self.pairs[:max_pairs]
        return {
            "schema": "adder832.pair_report/1",
            "circuit": self.circuit,
            "malicious_pairs": self.count,
            "single_faults": self.n_faults,
            "pairs_examined": self.n_pairs,
            "manifest": self.manifest,
            "variants": self.variants,
            "examples": [[self.faults[i].label, self.faults[i].location.index,
                          self.faults[j].label, self.faults[j].location.index] for i, j in shown],
        }


CONVENTIONS = {
    "fault_locations": "two-qubit gates and measurements only; single-qubit gates, idles, "
                       "preparations and relabelling steps carry no faults",
    "gate_faults": "each of the 15 non-identity two-qubit Paulis, inserted after the gate",
    "measurement_faults": "classical flip of the recorded result",
    "pairs": "unordered pairs of single faults at distinct locations",
    "malicious": "probability of (accepted and arithmetic error) > 1e-12, exact",
    "diagonal_layer": "noise-free; faults before it are simulated through it exactly",
}


def _default_threads() -> int:
    env = os.environ.get("ADDER832_THREADS")
    return max(1, int(env)) if env else 1


def count_malicious_pairs(circuit: Circuit, threads: int | None = None,
                          chunk: int = 64) -> PairReport:
    """Exact number of malicious unordered fault pairs from distinct locations."""
    threads = _default_threads() if threads is None else max(1, threads)
    faults = all_single_faults(circuit)
    eng = _engine_or_none(circuit)
    nf = len(faults)
    loc_id = np.array([id_ for id_, f in _location_ids(faults)], dtype=np.int64)
    if eng is None:
        return _count_pairs_direct(circuit, faults, loc_id, threads)
    effs = [eng.effect(f) for f in faults]
    keys = np.array([e.key for e in effs], dtype=np.int64)
    masks = np.array([e.mask for e in effs], dtype=np.int64)
    resid = np.array([e.residual for e in effs], dtype=object)
    if eng.layer is not None:
        eng._corr  # build tables once before threads start
        key_index = {k: i for i, k in enumerate(eng.keys())}
        A = np.stack([eng._corr[k][0] for k in eng.keys()])
        E = np.stack([eng._corr[k][1] for k in eng.keys()])
        kidx = np.zeros(max(key_index) + 1, dtype=np.int64)
        for k, i in key_index.items():
            kidx[k] = i

    def work(lo: int) -> list[tuple[int, int]]:
        found = []
        for i in range(lo, min(lo + chunk, nf)):
            j = np.arange(i + 1, nf)
            j = j[loc_id[j] != loc_id[i]]
            if j.size == 0:
                continue
            k = keys[i] ^ keys[j]
            m = masks[i] ^ masks[j]
            if eng.layer is not None:
                a = A[kidx[k], m]
                e = E[kidx[k], m]
                hit = (a > PRUNE) & (e > PRUNE)
            else:
                hit = np.array([eng.classify(Effect(int(kk), int(mm), resid[i] ^ resid[jj]))[0] == "malicious"
                                for kk, mm, jj in zip(k, m, j)], dtype=bool)
            found.extend((i, int(x)) for x in j[hit])
        return found

    starts = list(range(0, nf, chunk))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    pairs = [p for part in parts for p in part]
    n_pairs = sum(int(np.sum(loc_id[i + 1:] != loc_id[i])) for i in range(nf))
    rep = PairReport(circuit.name, len(pairs), nf, n_pairs, pairs, faults, dict(CONVENTIONS))
    locs = {(loc_id[i], loc_id[j]) for i, j in pairs}
    rep.variants["malicious_location_pairs"] = len(locs)
    return rep


def _location_ids(faults: Sequence[Fault]):
    ids: dict[FaultLocation, int] = {}
    for f in faults:
        yield ids.setdefault(f.location, len(ids)), f


def _count_pairs_direct(circuit: Circuit, faults: list[Fault], loc_id: np.ndarray,
                        threads: int) -> PairReport:
    nf = len(faults)
    todo = [(i, j) for i in range(nf) for j in range(i + 1, nf) if loc_id[i] != loc_id[j]]

    def one(pair):
        i, j = pair
        return classify_direct(circuit, [faults[i], faults[j]])[0] == "malicious"

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            flags = list(ex.map(one, todo, chunksize=64))
    else:
        flags = [one(p) for p in todo]
    pairs = [p for p, f in zip(todo, flags) if f]
    rep = PairReport(circuit.name, len(pairs), nf, len(todo), pairs, faults, dict(CONVENTIONS))
    rep.variants["malicious_location_pairs"] = len({(loc_id[i], loc_id[j]) for i, j in pairs})
    return rep
