"""Checks of the logical action of gadgets on the [[8,3,2]] code.

Encoded states are built by projecting onto the stabilizers, so nothing here
relies on the preparation circuits.  Hadamard gadgets are judged on their
reference qubits: the fault-free output must carry every entry of
``ideal_stabilizers`` with eigenvalue +1 in every accepted branch.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import statevec as sv_mod
from .circuits import Circuit, Gate, Measure, Permute, Reset
from .codes import code_832
from .faults import clifford_branches
from .pauli import PauliString
from .statevec import StateVector


def projected_state(gens: Sequence[PauliString], n: int) -> StateVector:
    """The (unique) +1 eigenstate of independent commuting ``gens``."""
    for idx in range(1 << n):
        sv = StateVector.basis(n, idx)
        for g in gens:
            moved = sv.copy().apply_pauli(g)
            sv.amps = (sv.amps + moved.amps) / 2
        nrm = sv.norm()
        if nrm > 1e-9:
            sv.amps = sv.amps / np.sqrt(nrm)
            return sv
    raise ValueError("generators have no common +1 eigenstate")


def encoded_basis_state(bits: Sequence[int]) -> StateVector:
    """|b1 b2 b3> of the code."""
    code = code_832()
    gens = list(code.stabilizers)
    gens += [z if b == 0 else -z for z, b in zip(code.logical_z, bits)]
    return projected_state(gens, code.n)


def _overlap(a: StateVector, b: StateVector) -> complex:
    return complex(np.vdot(a.amps, b.amps))


def diagonal_phases(gates: Sequence[str]) -> dict[tuple[int, int, int], complex]:
    """Phase picked up by each encoded basis state under a transversal layer."""
    out = {}
    for bits in itertools.product((0, 1), repeat=3):
        s = encoded_basis_state(bits)
        t = s.copy()
        for q, g in enumerate(gates):
            t.apply(g, [q])
        out[bits] = _overlap(s, t)
    return out


def is_ccz(gates: Sequence[str], atol: float = 1e-9) -> bool:
    """True when the layer acts as CCZ on all eight encoded basis states."""
    ph = diagonal_phases(gates)
    return all(abs(ph[b] - (-1) ** (b[0] & b[1] & b[2])) < atol for b in ph)


def permutation_basis_map(perm: Sequence[int]) -> dict[tuple[int, int, int], tuple[int, int, int]]:
    """Image of each encoded basis state under a qubit relabelling.

    Raises ``ValueError`` when an image is not an encoded basis state with
    phase +1.
    """
    basis = {b: encoded_basis_state(b) for b in itertools.product((0, 1), repeat=3)}
    out = {}
    for b, s in basis.items():
        t = s.copy().permute(perm)
        hits = [c for c, u in basis.items() if abs(_overlap(u, t) - 1) < 1e-9]
        if len(hits) != 1:
            raise ValueError(f"image of {b} is not a basis state")
        out[b] = hits[0]
    return out


@dataclass
class BranchCheck:
    route: str
    branches: int   # accepted branches examined
    failures: int   # branches with an ideal stabilizer not at +1
    acceptance: float

    @property
    def ok(self) -> bool:
        return self.branches > 0 and self.failures == 0


def _ideal(circuit: Circuit) -> list[PauliString]:
    chk = circuit.metadata["output_check"]
    n = circuit.n_qubits
    return [PauliString.from_str(t).embed(n, chk["qubits"]) for t in circuit.metadata["ideal_stabilizers"]]


def check_branches_tableau(circuit: Circuit) -> BranchCheck:
    """Every accepted branch, exactly, on stabilizer tableaux."""
    ideal = _ideal(circuit)
    n_acc = fails = 0
    acc = 0.0
    for recs, prob, st in clifford_branches(circuit):
        if not circuit.accepted(recs):
            continue
        n_acc += 1
        acc += prob
        fails += any(st.expectation(p) != 1 for p in ideal)
    return BranchCheck("tableau", n_acc, fails, acc)


def _sample_final(circuit: Circuit, rng: np.random.Generator) -> tuple[tuple[int, ...], StateVector]:
    sv = StateVector(circuit.n_qubits)
    recs: list[int] = []
    for ins in circuit.instructions:
        if isinstance(ins, Measure):
            recs.append(sv.measure(ins.qubit, ins.basis, rng))
        elif isinstance(ins, Reset):
            sv.reset(ins.qubit, rng)
        elif isinstance(ins, Gate):
            if not ins.condition or sum(recs[r] for r in ins.condition) % 2:
                sv.apply(ins.name, ins.qubits)
        elif isinstance(ins, Permute):
            sv.permute(ins.perm)
    return tuple(recs), sv


def check_branches_statevector(circuit: Circuit, samples: int = 24, seed: int = 0) -> BranchCheck:
    """Sampled trajectories on dense state vectors; independent of the tableau code."""
    if circuit.n_qubits > sv_mod.MAX_QUBITS:
        raise sv_mod.ResourceError(f"{circuit.n_qubits} qubits exceed the state-vector limit")
    ideal = _ideal(circuit)
    rng = np.random.default_rng(seed)
    n_acc = fails = 0
    for _ in range(samples):
        recs, sv = _sample_final(circuit, rng)
        if not circuit.accepted(recs):
            continue
        n_acc += 1
        fails += any(abs(sv.expectation(p) - 1) > 1e-9 for p in ideal)
    return BranchCheck("statevector", n_acc, fails, n_acc / samples)
