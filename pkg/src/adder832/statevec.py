"""Dense state-vector simulation for circuits with the transversal T layer.

Basis index bit ``q`` is the value of qubit ``q``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .pauli import PauliString

MAX_QUBITS = 20
SQ2 = 1 / np.sqrt(2)

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[SQ2, SQ2], [SQ2, -SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_DIAG = {
    "S": 1j,
    "SDG": -1j,
    "T": np.exp(1j * np.pi / 4),
    "TDG": np.exp(-1j * np.pi / 4),
    "Z": -1.0,
}
GATES = ("I", "H", "S", "SDG", "T", "TDG", "X", "Y", "Z", "CX", "CZ", "CCZ", "SWAP")


class ResourceError(RuntimeError):
    """A configured size limit was exceeded."""


@lru_cache(maxsize=None)
def _bits(n: int, q: int) -> np.ndarray:
    return ((np.arange(1 << n) >> q) & 1).astype(bool)


@lru_cache(maxsize=None)
def _cx_perm(n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return idx ^ (((idx >> c) & 1) << t)


@lru_cache(maxsize=None)
def _swap_perm(n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(1 << n)
    ba = (idx >> a) & 1
    bb = (idx >> b) & 1
    return idx ^ ((ba ^ bb) << a) ^ ((ba ^ bb) << b)


def _relabel_index(n: int, perm: Sequence[int]) -> np.ndarray:
    idx = np.arange(1 << n)
    out = np.zeros_like(idx)
    for i, j in enumerate(perm):
        out |= ((idx >> i) & 1) << j
    return out


class StateVector:
    __slots__ = ("n", "amps")

    def __init__(self, n: int, amps: np.ndarray | None = None):
        if not 1 <= n <= MAX_QUBITS:
            raise ResourceError(f"state vectors are limited to {MAX_QUBITS} qubits (got {n})")
        self.n = n
        if amps is None:
            amps = np.zeros(1 << n, dtype=complex)
            amps[0] = 1.0
        elif amps.shape != (1 << n,):
            raise ValueError("amplitude vector has the wrong length")
        self.amps = amps

    @classmethod
    def basis(cls, n: int, index: int) -> "StateVector":
        a = np.zeros(1 << n, dtype=complex)
        a[index] = 1.0
        return cls(n, a)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def _check(self, qubits: Sequence[int]) -> None:
        for q in qubits:
            if not 0 <= q < self.n:
                raise IndexError(f"qubit {q} out of range")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubits {tuple(qubits)}")

    def apply(self, gate: str, qubits: Sequence[int]) -> "StateVector":
        qubits = tuple(int(q) for q in qubits)
        self._check(qubits)
        g = gate.upper()
        n, a = self.n, self.amps
        if g in _DIAG and len(qubits) == 1:
            a[_bits(n, qubits[0])] *= _DIAG[g]
        elif g in _SINGLE:
            q = qubits[0]
            v = a.reshape(1 << (n - q - 1), 2, 1 << q)
            self.amps = np.einsum("ij,ajb->aib", _SINGLE[g], v).reshape(-1)
        elif g in ("CX", "CNOT"):
            self.amps = a[_cx_perm(n, *qubits)]
        elif g == "CZ":
            a[_bits(n, qubits[0]) & _bits(n, qubits[1])] *= -1
        elif g == "CCZ":
            a[_bits(n, qubits[0]) & _bits(n, qubits[1]) & _bits(n, qubits[2])] *= -1
        elif g == "SWAP":
            self.amps = a[_swap_perm(n, *qubits)]
        else:
            raise ValueError(f"unsupported gate {gate!r}")
        return self

    def apply_pauli(self, p: PauliString) -> "StateVector":
        if p.n != self.n:
            raise ValueError("length mismatch")
        idx = np.arange(1 << self.n)
        # P = sign * prod_q X^x Z^z i^{x z}  (Y = i X Z)
        zpar = np.bitwise_count(idx & p.z) & 1
        phase = (1j) ** (p.x & p.z).bit_count()
        v = self.amps * np.where(zpar, -1.0, 1.0)
        self.amps = v[idx ^ p.x] * (phase * p.sign)
        return self

    def permute(self, perm: Sequence[int]) -> "StateVector":
        """Relabel qubits: the content of qubit ``i`` moves to ``perm[i]``."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError("not a permutation")
        dest = _relabel_index(self.n, perm)
        out = np.empty_like(self.amps)
        out[dest] = self.amps
        self.amps = out
        return self

    # -- measurement -------------------------------------------------------------
    def prob_one(self, qubit: int, basis: str = "Z") -> float:
        a = self.amps
        if basis.upper() == "X":
            a = self.copy().apply("H", [qubit]).amps
        return float(np.sum(np.abs(a[_bits(self.n, qubit)]) ** 2))

    def project(self, qubit: int, basis: str, bit: int) -> float:
        """Project onto outcome ``bit`` and renormalise; return its probability."""
        self._check([qubit])
        x = basis.upper() == "X"
        if x:
            self.apply("H", [qubit])
        mask = _bits(self.n, qubit)
        keep = mask if bit else ~mask
        p = float(np.sum(np.abs(self.amps[keep]) ** 2))
        self.amps[~keep] = 0
        if p > 0:
            self.amps /= np.sqrt(p)
        if x:
            self.apply("H", [qubit])
        return p

    def measure(self, qubit: int, basis: str = "Z", rng: np.random.Generator | None = None) -> int:
        rng = rng if rng is not None else np.random.default_rng()
        p1 = self.prob_one(qubit, basis)
        bit = int(rng.random() < p1)
        self.project(qubit, basis, bit)
        return bit

    def reset(self, qubit: int, rng: np.random.Generator | None = None) -> "StateVector":
        if self.measure(qubit, "Z", rng):
            self.apply("X", [qubit])
        return self

    def expectation(self, p: PauliString) -> float:
        return float(np.vdot(self.amps, self.copy().apply_pauli(p).amps).real)


def apply_gate(state: StateVector, gate: str, qubits: Sequence[int]) -> StateVector:
    return state.copy().apply(gate, qubits)


def measure(state: StateVector, qubit: int, basis: str = "Z",
            rng: np.random.Generator | None = None) -> tuple[int, StateVector]:
    s = state.copy()
    return s.measure(qubit, basis, rng), s


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n != b.n:
        raise ValueError("qubit count mismatch")
    na, nb = a.norm(), b.norm()
    return float(abs(np.vdot(a.amps, b.amps)) ** 2 / (na * nb))


@dataclass
class Branch:
    records: tuple[int, ...]
    probability: float
    state: StateVector

    @property
    def outcome_record(self) -> tuple[int, ...]:
        return self.records

    @property
    def post_state(self) -> StateVector:
        return self.state


# ---------------------------------------------------------------------------
# whole-circuit simulation
# ---------------------------------------------------------------------------
FLIP = "flip"
PRUNE = 1e-12
DEFAULT_BRANCH_CAP = 1 << 14


def _fault_table(faults) -> dict[int, list]:
    table: dict[int, list] = {}
    for idx, f in faults or ():
        table.setdefault(int(idx), []).append(f)
    return table


def _apply_instruction(sv: StateVector, ins, records: list[int]) -> None:
    from .circuits import Gate, Permute

    if isinstance(ins, Gate):
        if ins.condition and sum(records[r] for r in ins.condition) % 2 == 0:
            return
        sv.apply(ins.name, ins.qubits)
    elif isinstance(ins, Permute):
        sv.permute(ins.perm)
    else:  # pragma: no cover - guarded by callers
        raise TypeError(ins)


def _inject(sv: StateVector, faults: list) -> None:
    for f in faults:
        if f != FLIP:
            sv.apply_pauli(f)


def enumerate_branches(circuit, injected_faults=(), cap: int = DEFAULT_BRANCH_CAP,
                       prune: float = PRUNE, stop: int | None = None) -> list[Branch]:
    """Expand every random measurement of ``circuit`` into both outcomes.

    ``injected_faults`` holds ``(instruction_index, fault)`` pairs; a fault is
    an n-qubit :class:`PauliString` applied right after the instruction, or
    :data:`FLIP` to invert the classical result of a measurement.  Execution
    halts before instruction ``stop`` when given.
    """
    from .circuits import Measure, Reset

    n = circuit.n_qubits
    if n > MAX_QUBITS:
        raise ResourceError(f"circuit has {n} qubits; the limit is {MAX_QUBITS}")
    table = _fault_table(injected_faults)
    prog = circuit.instructions if stop is None else circuit.instructions[:stop]
    out: list[Branch] = []
    init = StateVector(n)
    _inject(init, table.get(-1, ()))
    stack = [(0, [], 1.0, init)]
    while stack:
        pos, recs, prob, sv = stack.pop()
        while pos < len(prog):
            ins = prog[pos]
            here = table.get(pos, ())
            if isinstance(ins, (Measure, Reset)):
                basis = ins.basis if isinstance(ins, Measure) else "Z"
                p1 = sv.prob_one(ins.qubit, basis)
                options = [(b, p) for b, p in ((0, 1.0 - p1), (1, p1)) if prob * p > prune]
                if len(options) == 2:
                    if len(out) + len(stack) + 1 >= cap:
                        raise ResourceError(f"more than {cap} branches")
                    other = sv.copy()
                    b, p = options[1]
                    other.project(ins.qubit, basis, b)
                    rec2 = list(recs)
                    if isinstance(ins, Measure):
                        rec2.append(b ^ (FLIP in here))
                    elif b:
                        other.apply("X", [ins.qubit])
                    _inject(other, here)
                    stack.append((pos + 1, rec2, prob * p, other))
                b, p = options[0]
                sv.project(ins.qubit, basis, b)
                prob *= p
                if isinstance(ins, Measure):
                    recs.append(b ^ (FLIP in here))
                elif b:
                    sv.apply("X", [ins.qubit])
            else:
                _apply_instruction(sv, ins, recs)
            _inject(sv, here)
            pos += 1
        out.append(Branch(tuple(recs), prob, sv))
    out.sort(key=lambda b: b.records)
    return out


def deferred_order(circuit) -> list[int]:
    """Qubit (final position) holding each record under deferred measurement.

    Raises ``ValueError`` when the circuit cannot be deferred: it resets qubits,
    conditions gates on results, or touches a qubit after measuring it.
    """
    from .circuits import Gate, Measure, Permute, Reset

    pos_of = list(range(circuit.n_qubits))  # pos_of[content] = current position
    content_at = list(range(circuit.n_qubits))
    measured: dict[int, int] = {}  # content -> record
    for ins in circuit.instructions:
        if isinstance(ins, Reset) or (isinstance(ins, Gate) and ins.condition):
            raise ValueError("circuit uses resets or classical control")
        if isinstance(ins, Permute):
            new_at = [0] * circuit.n_qubits
            for i, j in enumerate(ins.perm):
                new_at[j] = content_at[i]
            content_at = new_at
            for p, c in enumerate(content_at):
                pos_of[c] = p
            continue
        qs = (ins.qubit,) if isinstance(ins, Measure) else ins.qubits
        for q in qs:
            if content_at[q] in measured:
                raise ValueError(f"qubit {q} is used after being measured")
        if isinstance(ins, Measure):
            measured[content_at[ins.qubit]] = ins.record
    order = [0] * len(measured)
    for c, r in measured.items():
        order[r] = pos_of[c]
    return order


def final_state(circuit, faults=(), stop: int | None = None, key_insert=None) -> StateVector:
    """Run the unitary part of a deferrable circuit (X measurements become H).

    ``key_insert`` is an optional ``(index, PauliString)`` applied *before*
    instruction ``index``.
    """
    from .circuits import Measure

    table = _fault_table(faults)
    sv = StateVector(circuit.n_qubits)
    _inject(sv, table.get(-1, ()))
    prog = circuit.instructions if stop is None else circuit.instructions[:stop]
    for pos, ins in enumerate(prog):
        if key_insert is not None and key_insert[0] == pos:
            sv.apply_pauli(key_insert[1])
        if isinstance(ins, Measure):
            if ins.basis == "X":
                sv.apply("H", [ins.qubit])
        else:
            _apply_instruction(sv, ins, [])
        for f in table.get(pos, ()):
            if f != FLIP:
                sv.apply_pauli(f)
    return sv


def outcome_distribution(circuit, faults=(), key_insert=None) -> np.ndarray:
    """Exact joint distribution of all records, indexed by ``sum(bit_r << r)``."""
    order = deferred_order(circuit)
    sv = final_state(circuit, faults, key_insert=key_insert)
    probs = np.abs(sv.amps) ** 2
    n = circuit.n_qubits
    idx = np.arange(1 << n)
    rec = np.zeros(1 << n, dtype=np.int64)
    for r, q in enumerate(order):
        rec |= ((idx >> q) & 1) << r
    dist = np.bincount(rec, weights=probs, minlength=1 << len(order))
    flip = 0
    for pos, f in faults or ():
        if f == FLIP:
            ins = circuit.instructions[pos]
            flip ^= 1 << ins.record
    if flip:
        dist = dist[np.arange(dist.size) ^ flip]
    return dist
