"""Minimal-CNOT state preparation by breadth-first search over stabilizer states.

The search starts at the target and applies CNOTs until it reaches a state that
can be written down directly (Bell pairs and single-qubit states).  The
preparation circuit is that endpoint's construction followed by the search
moves in reverse order; a CNOT is its own inverse.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels as K
from . import gf2
from .circuits import Circuit, CircuitBuilder, Gate
from .pauli import PauliString, PropagationError, conjugate
from .statevec import ResourceError
from .tableau import StabilizerState, _unpack, canonical_key_from_arrays

DEFAULT_NODE_CAP = 10_000_000


class ExhaustedError(RuntimeError):
    """The accept set is unreachable with the allowed moves."""


Arrays = tuple[np.ndarray, np.ndarray, np.ndarray]
# endpoint cost: number of CNOTs needed to build the endpoint, or None to reject
EndpointCost = Callable[[Arrays, int], "int | None"]


def _rows(arrs: Arrays, n: int) -> list[PauliString]:
    xs, zs, r = arrs
    return [_unpack(n, xs[i], zs[i], int(r[i])) for i in range(n)]


def bell_pairs(arrs: Arrays, n: int) -> int | None:
    """Cost ``n / 2`` if the state is a product of ``|00> + |11>`` pairs (any pairing)."""
    rows = _rows(arrs, n)
    xs = {p.x for p in rows if p.z == 0 and p.weight == 2 and p.sign > 0}
    zs = {p.z for p in rows if p.x == 0 and p.weight == 2 and p.sign > 0}
    if len(xs) != n // 2 or xs != zs or 2 * len(xs) != n:
        return None
    cover = 0
    for m in xs:
        if cover & m:
            return None
        cover |= m
    return n // 2 if cover == (1 << n) - 1 else None


def _restricted_dim(rows: Sequence[PauliString], qubits: Sequence[int], n: int) -> int:
    """Dimension of the subgroup supported inside ``qubits``."""
    outside = [q for q in range(n) if q not in qubits]
    vecs = [gf2.sym_vec(p.restrict(outside)) for p in rows] if outside else []
    return len(rows) - gf2.rank(vecs)


def local_blocks(arrs: Arrays, n: int) -> int | None:
    """Factorisation into blocks of at most two qubits; cost = entangled pairs."""
    rows = _rows(arrs, n)
    free = [q for q in range(n) if _restricted_dim(rows, [q], n) == 0]
    if len(free) % 2:
        return None
    pairs = 0
    while free:
        i = free.pop(0)
        mate = next((j for j in free if _restricted_dim(rows, [i, j], n) == 2), None)
        if mate is None:
            return None
        free.remove(mate)
        pairs += 1
    return pairs


def entangled_pairs(arrs: Arrays, n: int) -> list[tuple[int, int]]:
    """Pairs ``(i, j)`` forming two-qubit entangled blocks of the state."""
    rows = _rows(arrs, n)
    out = []
    for i in range(n):
        if _restricted_dim(rows, [i], n):
            continue
        for j in range(i + 1, n):
            if _restricted_dim(rows, [j], n) == 0 and _restricted_dim(rows, [i, j], n) == 2:
                out.append((i, j))
    return out


def restrict_to_coupling(cost_fn: EndpointCost, edges) -> EndpointCost:
    """Acceptor that also demands every entangled endpoint pair be an edge."""
    allowed = {frozenset(e) for e in edges}

    def cost(arrs: Arrays, n: int) -> int | None:
        c = cost_fn(arrs, n)
        if c is None:
            return None
        return c if all(frozenset(p) in allowed for p in entangled_pairs(arrs, n)) else None

    cost.lower_bound = getattr(cost_fn, "lower_bound", lambda n: 0)
    return cost


bell_pairs.lower_bound = lambda n: n // 2
local_blocks.lower_bound = lambda n: 0
ACCEPTORS: dict[str, EndpointCost] = {"bell_pairs": bell_pairs, "local_blocks": local_blocks}


@dataclass
class SearchResult:
    circuit: Circuit
    moves: tuple[tuple, ...]  # applied to the target, in search order
    endpoint: list[PauliString]
    search_cnots: int
    endpoint_cnots: int
    nodes_visited: int
    free_hadamards: bool = False

    @property
    def total_cnots(self) -> int:
        return self.search_cnots + self.endpoint_cnots


@dataclass
class _Node:
    xs: np.ndarray
    zs: np.ndarray
    r: np.ndarray
    parent: bytes | None
    move: tuple | None
    depth: int


def _canon(state: StabilizerState) -> Arrays:
    return state.canonical_arrays()


def min_cnot_prep(target: StabilizerState, accept: str | EndpointCost = "bell_pairs",
                  node_cap: int = DEFAULT_NODE_CAP, free_hadamards: bool = False,
                  coupling: Sequence[tuple[int, int]] | None = None,
                  max_cnots: int | None = None) -> SearchResult:
    """Cheapest CNOT route from an accepted endpoint to ``target``.

    The objective is search depth plus endpoint cost.  Moves are tried in
    lexicographic ``(control, target)`` order and the first optimum found in
    that order is returned, so the output is deterministic.  With
    ``free_hadamards`` single-qubit Hadamards are extra zero-cost moves.
    ``coupling`` limits CNOTs (both directions) and endpoint pairs to the
    listed qubit pairs.  ``max_cnots`` abandons the search once no circuit
    within that total can still be found.
    """
    cost_fn = ACCEPTORS[accept] if isinstance(accept, str) else accept
    n = target.n
    if coupling is not None:
        cost_fn = restrict_to_coupling(cost_fn, coupling)
        edges = {frozenset(e) for e in coupling}
    floor = getattr(cost_fn, "lower_bound", lambda n: 0)(n)
    pairs = np.array([(c, t) for c in range(n) for t in range(n)
                      if c != t and (coupling is None or frozenset((c, t)) in edges)], dtype=np.int64).reshape(-1, 2)
    xs, zs, r = _canon(target)
    start = canonical_key_from_arrays(xs, zs, r)
    nodes: dict[bytes, _Node] = {start: _Node(xs, zs, r, None, None, 0)}
    best: tuple[int, bytes] | None = None
    frontier = deque([start])
    words = xs.shape[1]
    out_x = np.zeros((len(pairs), n, words), dtype=np.uint64)
    out_z = np.zeros_like(out_x)
    out_r = np.zeros((len(pairs), n), dtype=np.uint8)

    def consider(key: bytes) -> None:
        nonlocal best
        nd = nodes[key]
        c = cost_fn((nd.xs, nd.zs, nd.r), n)
        if c is not None and (best is None or nd.depth + c < best[0]):
            best = (nd.depth + c, key)

    consider(start)
    while frontier:
        key = frontier.popleft()
        nd = nodes[key]
        if best is not None and nd.depth + floor >= best[0]:
            break
        if max_cnots is not None and best is None and nd.depth + floor >= max_cnots:
            break
        if free_hadamards:
            for q in range(n):
                hx, hz, hr = nd.xs.copy(), nd.zs.copy(), nd.r.copy()
                K.k_h(hx, hz, hr, q)
                K.k_canonicalize(hx, hz, hr, n)
                k2 = canonical_key_from_arrays(hx, hz, hr)
                if k2 not in nodes or nodes[k2].depth > nd.depth:
                    nodes[k2] = _Node(hx, hz, hr, key, ("H", q), nd.depth)
                    if len(nodes) > node_cap:
                        raise ResourceError(f"search exceeded the node cap of {node_cap}")
                    frontier.appendleft(k2)
                    consider(k2)
        if best is not None and nd.depth + 1 + floor >= best[0]:
            continue
        K.k_cx_children(nd.xs, nd.zs, nd.r, n, pairs, out_x, out_z, out_r)
        for m in range(len(pairs)):
            k2 = canonical_key_from_arrays(out_x[m], out_z[m], out_r[m])
            if k2 in nodes:
                continue
            nodes[k2] = _Node(out_x[m].copy(), out_z[m].copy(), out_r[m].copy(), key,
                              ("CX", int(pairs[m, 0]), int(pairs[m, 1])), nd.depth + 1)
            if len(nodes) > node_cap:
                raise ResourceError(f"search exceeded the node cap of {node_cap}")
            frontier.append(k2)
            consider(k2)
    if best is None:
        raise ExhaustedError("no accepted endpoint is reachable")
    total, end_key = best
    moves = []
    k = end_key
    while nodes[k].parent is not None:
        moves.append(nodes[k].move)
        k = nodes[k].parent
    moves.reverse()
    end = nodes[end_key]
    endpoint = _rows((end.xs, end.zs, end.r), n)
    circ = _assemble(n, endpoint, moves, target)
    search = sum(1 for m in moves if m[0] == "CX")
    return SearchResult(circ, tuple(moves), endpoint, search, total - search, len(nodes), free_hadamards)


# ---------------------------------------------------------------------------
# endpoint construction
# ---------------------------------------------------------------------------
_LOCAL_WORDS = [w for k in range(5) for w in itertools.product(("H", "S", "X", "Z"), repeat=k)]


def _state_of(n: int, gates: Sequence[tuple]) -> StabilizerState:
    s = StabilizerState.zero(n)
    for g in gates:
        s.apply(g[0], g[1:])
    return s


def _local_prep(rows: list[PauliString], qubits: tuple[int, ...]) -> list[tuple]:
    """Gate list (acting on ``qubits``) preparing the block state from ``|0...0>``."""
    n_loc = len(qubits)
    gens = [p.restrict(qubits) for p in rows
            if all((p.x | p.z) >> q & 1 == 0 for q in range(p.n) if q not in qubits)]
    want = StabilizerState.from_stabilizers(_independent(gens, n_loc))
    if n_loc == 1:
        for w in _LOCAL_WORDS:
            if _state_of(1, [(g, 0) for g in w]) == want:
                return [(g, qubits[0]) for g in w]
    else:
        base = [("H", 0), ("CX", 0, 1)]
        for wa in _LOCAL_WORDS:
            for wb in _LOCAL_WORDS:
                gates = base + [(g, 0) for g in wa] + [(g, 1) for g in wb]
                if _state_of(2, gates) == want:
                    return [(g[0],) + tuple(qubits[q] for q in g[1:]) for g in gates]
    raise ExhaustedError(f"cannot build the endpoint block on {qubits}")  # pragma: no cover


def _independent(gens: list[PauliString], n: int) -> list[PauliString]:
    out, vecs = [], []
    for g in gens:
        v = gf2.sym_vec(g)
        if not gf2.in_span(v, vecs):
            out.append(g)
            vecs.append(v)
    if len(out) != n:
        raise ExhaustedError("endpoint block is entangled with the rest")
    return out


def endpoint_blocks(rows: list[PauliString], n: int) -> list[tuple[int, ...]]:
    free = list(range(n))
    blocks = []
    while free:
        i = free.pop(0)
        if _restricted_dim(rows, [i], n) == 1:
            blocks.append((i,))
            continue
        mate = next(j for j in free if _restricted_dim(rows, [i, j], n) == 2)
        free.remove(mate)
        blocks.append((i, mate))
    return blocks


def _assemble(n: int, endpoint: list[PauliString], moves: Sequence[tuple],
              target: StabilizerState) -> Circuit:
    b = CircuitBuilder(n)
    b.begin("endpoint")
    for block in endpoint_blocks(endpoint, n):
        for g in _local_prep(endpoint, block):
            b.gate(g[0], *g[1:])
    b.begin("moves")
    for m in reversed(moves):
        b.gate(m[0], *m[1:])
    circ = b.build("synthesized_prep")
    if simulate_clifford(circ) != target:
        raise AssertionError("synthesized circuit does not reach the target")  # pragma: no cover
    return circ


def simulate_clifford(circ: Circuit) -> StabilizerState:
    s = StabilizerState.zero(circ.n_qubits)
    for ins in circ.instructions:
        if not isinstance(ins, Gate):
            raise ValueError("only unitary Clifford circuits are supported here")
        s.apply(ins.name, ins.qubits)
    return s


def moves_to_gates(moves: Sequence[tuple]) -> list[tuple]:
    return [tuple(m) for m in moves]


# ---------------------------------------------------------------------------
# detectable-error analysis of a unitary preparation
# ---------------------------------------------------------------------------
@dataclass
class DetectionReport:
    n_faults: int
    trivial: int
    detected: int
    undetected_logical: list[tuple[int, str]]  # (instruction index, fault string) with empty checks
    per_subset: dict[tuple[int, ...], int] = field(default_factory=dict)
    minimal_subsets: list[tuple[int, ...]] = field(default_factory=list)


def _propagate_unitary(circ: Circuit, start: int, p: PauliString) -> PauliString:
    for ins in circ.instructions[start + 1:]:
        if isinstance(ins, Gate):
            p = conjugate(p, ins.name, ins.qubits)
        else:
            raise PropagationError("preparation circuits must be unitary")
    return p


def detectable_error_analysis(prep: Circuit, stabilizers: Sequence[PauliString],
                              logicals_trivial: Sequence[PauliString],
                              candidate_checks: Sequence[PauliString],
                              max_subset: int | None = None) -> DetectionReport:
    """Classify the propagated image of every two-qubit-gate fault of ``prep``.

    A residual error is *trivial* when it is in the group generated by
    ``stabilizers`` and ``logicals_trivial`` (the stabilizer group of the
    ideal output), *detected* when it anticommutes with a code stabilizer or
    a chosen check, and *undetected-logical* otherwise.
    """
    n = prep.n_qubits
    trivial_vecs = [gf2.sym_vec(s) for s in list(stabilizers) + list(logicals_trivial)]
    residuals = []
    for idx, ins in enumerate(prep.instructions):
        if not (isinstance(ins, Gate) and ins.is_two_qubit):
            continue
        for a, b in itertools.product("IXYZ", repeat=2):
            if a == b == "I":
                continue
            f = PauliString.from_str("".join(
                a if q == ins.qubits[0] else b if q == ins.qubits[1] else "I" for q in range(n)))
            residuals.append((idx, str(f), _propagate_unitary(prep, idx, f)))
    trivial = detected = 0
    hard = []  # residuals undetected by code stabilizers and not trivial
    for idx, fs, e in residuals:
        if gf2.in_span(gf2.sym_vec(e), trivial_vecs):
            trivial += 1
        elif not all(e.commutes(s) for s in stabilizers):
            detected += 1
        else:
            hard.append((idx, fs, e))
    rep = DetectionReport(len(residuals), trivial, detected, [(i, f) for i, f, _ in hard])
    m = len(candidate_checks)
    limit = m if max_subset is None else max_subset
    for k in range(limit + 1):
        for sub in itertools.combinations(range(m), k):
            bad = sum(1 for _, _, e in hard if all(e.commutes(candidate_checks[j]) for j in sub))
            rep.per_subset[sub] = bad
            if bad == 0 and not any(set(s) <= set(sub) for s in rep.minimal_subsets):
                rep.minimal_subsets.append(sub)
    return rep
