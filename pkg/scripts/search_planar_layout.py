"""Search a square-lattice realisation of the fault-tolerant adder.

Grid of 3 x 4 sites, site = 4 * row + col.  The data start as a 2 x 4 block in
rows 0-1, where a coupling-restricted breadth-first search finds a 10-CNOT
preparation.  Relabelling that circuit by any code automorphism still prepares
|+++>, so every automorphism gives another placement for free.  For each one
the script checks that the readout face can reach the two ancilla sites, then
samples check schedules until the single-fault audit is clean.

Usage: python scripts/search_planar_layout.py [seconds]
"""
from __future__ import annotations

import itertools
import random
import sys
import time

from adder832 import builders as B
from adder832.codes import code_832, find_symmetries
from adder832.faults import audit_single_faults
from adder832.synth import min_cnot_prep

SEED_START = (0, 6, 7, 1, 4, 2, 3, 5)
A_SITE, B_SITE = B.PLANAR_ANCILLAS
EDGES = {frozenset(e) for e in B.grid_edges()}


def nbrs(s: int) -> set[int]:
    return {t for t in range(12) if frozenset((s, t)) in EDGES}


def x4_planes() -> list[tuple[int, ...]]:
    code = code_832()
    zs = [s for s in code.stabilizers if s.x == 0]
    out = set()
    for sub in itertools.product((0, 1), repeat=len(zs)):
        z = 0
        for bit, s in zip(sub, zs):
            if bit:
                z ^= s.z
        if bin(z).count("1") == 4:
            out.add(tuple(q for q in range(8) if z >> q & 1))
    return sorted(out)


def random_schedule(rng: random.Random, S, site):
    na, nb = nbrs(A_SITE), nbrs(B_SITE)
    ops = []
    for kind in "XZ":
        for q in S:
            # X ancilla on A in phases 0 and 2, on B in phase 1; Z ancilla opposite
            ok = [p for p in range(3) if site[q] in ((na if (kind == "X") == (p != 1) else nb))]
            if not ok:
                return None
            ops.append((kind, q, rng.choice(ok)))
    rng.shuffle(ops)
    sched = []
    for p in range(3):
        sched += [(k, q) for k, q, pp in ops if pp == p]
        if p < 2:
            sched.append(("SWAP",))
    seen, parity = set(), 0
    for op in sched:
        if op[0] == "X":
            seen.add(op[1])
        elif op[0] == "Z":
            parity ^= op[1] in seen
    return tuple(sched) if parity == 0 else None


def main(budget: float, seed: int = 0) -> None:
    rng = random.Random(seed)
    code = code_832()
    target = code.codespace_state("X")
    edges = [(u, v) for u, v in itertools.combinations(range(8), 2)
             if frozenset((SEED_START[u], SEED_START[v])) in EDGES]
    base = min_cnot_prep(target, coupling=edges, max_cnots=10)
    gates = [(g.name,) + g.qubits for g in base.circuit.instructions]
    autos = list(find_symmetries(code))
    rng.shuffle(autos)
    na, nb = nbrs(A_SITE), nbrs(B_SITE)
    t0, tried = time.time(), 0
    candidates = []
    for g in autos:
        inv = [0] * 8
        for u, v in enumerate(g):
            inv[v] = u
        start = tuple(SEED_START[inv[q]] for q in range(8))
        prep = tuple((x[0],) + tuple(g[q] for q in x[1:]) for x in gates)
        site = [s + 4 if s in (A_SITE, B_SITE) else s for s in start]
        if sum(site[q] in na for q in B.READOUT_FACE) != 2 or sum(site[q] in nb for q in B.READOUT_FACE) != 2:
            continue
        for S in x4_planes():
            if all(site[q] in na | nb for q in S):
                candidates.append((start, prep, S, site))
    print(len(candidates), "placement/support pairs", flush=True)
    while time.time() - t0 < budget and candidates:
        start, prep, S, site = rng.choice(candidates)
        sched = random_schedule(rng, S, site)
        if sched is None:
            continue
        tried += 1
        c = B.build_planar_ft_adder(start=start, prep=prep, schedule=sched)
        B.audit_layout(c)
        rep = audit_single_faults(c)
        if tried % 20 == 0:
            print(tried, rep.counts, flush=True)
        if rep.counts["malicious"] == 0:
            print("FOUND")
            print("START =", start)
            print("PREP =", prep)
            print("SCHEDULE =", sched)
            print(c.counts())
            return
    print("tried", tried)


if __name__ == "__main__":
    main(float(sys.argv[1]) if len(sys.argv) > 1 else 1800.0)
