"""CHP-style stabilizer tableau with eagerly maintained destabilizers."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .pauli import PauliString, symplectic_product

CLIFFORD_GATES = ("I", "H", "S", "SDG", "X", "Y", "Z", "CX", "CZ", "SWAP")


class ContradictionError(ValueError):
    """A forced measurement outcome is impossible for the current state."""


def _pack(p: PauliString, words: int) -> tuple[np.ndarray, np.ndarray, int]:
    px = np.zeros(words, dtype=np.uint64)
    pz = np.zeros(words, dtype=np.uint64)
    mask = (1 << 64) - 1
    for w in range(words):
        px[w] = (p.x >> (64 * w)) & mask
        pz[w] = (p.z >> (64 * w)) & mask
    return px, pz, 0 if p.sign > 0 else 1


def _unpack(n: int, xrow: np.ndarray, zrow: np.ndarray, rbit: int) -> PauliString:
    x = z = 0
    for w in range(xrow.shape[0]):
        x |= int(xrow[w]) << (64 * w)
        z |= int(zrow[w]) << (64 * w)
    return PauliString(n, x, z, -1 if rbit else 1)


def _solve_gf2(rows: list[int], rhs: list[int], nbits: int) -> int | None:
    """Find v with parity(rows[i] & v) == rhs[i]; rows are int bitmasks."""
    aug = [(r, b) for r, b in zip(rows, rhs)]
    pivots = []
    k = 0
    for col in range(nbits):
        piv = next((i for i in range(k, len(aug)) if aug[i][0] >> col & 1), None)
        if piv is None:
            continue
        aug[k], aug[piv] = aug[piv], aug[k]
        for i in range(len(aug)):
            if i != k and aug[i][0] >> col & 1:
                aug[i] = (aug[i][0] ^ aug[k][0], aug[i][1] ^ aug[k][1])
        pivots.append(col)
        k += 1
    if any(r == 0 and b for r, b in aug[k:]):
        return None
    v = 0
    for i, col in enumerate(pivots):
        if aug[i][1]:
            v |= 1 << col
    return v


class StabilizerState:
    """Pure n-qubit stabilizer state.

    Rows ``0..n-1`` of the packed arrays are destabilizers, rows ``n..2n-1``
    stabilizers and row ``2n`` is scratch space for deterministic
    measurements.
    """

    __slots__ = ("n", "xs", "zs", "r")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        w = K.n_words(n)
        self.xs = np.zeros((2 * n + 1, w), dtype=np.uint64)
        self.zs = np.zeros((2 * n + 1, w), dtype=np.uint64)
        self.r = np.zeros(2 * n + 1, dtype=np.uint8)
        for q in range(n):
            self.xs[q, q >> 6] |= np.uint64(1) << np.uint64(q & 63)
            self.zs[n + q, q >> 6] |= np.uint64(1) << np.uint64(q & 63)

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        return cls(n)

    @classmethod
    def from_stabilizers(cls, gens: Sequence[PauliString]) -> "StabilizerState":
        """Build the unique state stabilized by ``n`` independent commuting generators."""
        gens = list(gens)
        if not gens:
            raise ValueError("empty generator list")
        n = gens[0].n
        if len(gens) != n:
            raise ValueError(f"need {n} generators, got {len(gens)}")
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if not a.commutes(b):
                    raise ValueError(f"generators {a} and {b} anticommute")
        destab: list[PauliString] = []
        for i in range(n):
            # d anticommutes with gens[i] only:  <d, g> = d.x.g.z + d.z.g.x
            rows = [(g.x) | (g.z << n) for g in gens]
            v = _solve_gf2(rows, [int(j == i) for j in range(n)], 2 * n)
            if v is None:
                raise ValueError("generators are not independent")
            # v holds d.z in the low n bits and d.x above
            d = PauliString(n, v >> n, v & ((1 << n) - 1))
            for j, dj in enumerate(destab):
                if not d.commutes(dj):
                    d = PauliString(n, d.x ^ gens[j].x, d.z ^ gens[j].z)
            destab.append(d)
        st = cls(n)
        w = st.xs.shape[1]
        for i in range(n):
            st._set_row(i, destab[i].unsigned(), w)
            st._set_row(n + i, gens[i], w)
        return st

    def _set_row(self, i: int, p: PauliString, words: int) -> None:
        px, pz, pr = _pack(p, words)
        self.xs[i] = px
        self.zs[i] = pz
        self.r[i] = pr

    def copy(self) -> "StabilizerState":
        st = StabilizerState.__new__(StabilizerState)
        st.n = self.n
        st.xs = self.xs.copy()
        st.zs = self.zs.copy()
        st.r = self.r.copy()
        return st

    # -- views --------------------------------------------------------------
    def stabilizers(self) -> list[PauliString]:
        n = self.n
        return [_unpack(n, self.xs[n + i], self.zs[n + i], int(self.r[n + i])) for i in range(n)]

    def destabilizers(self) -> list[PauliString]:
        n = self.n
        return [_unpack(n, self.xs[i], self.zs[i], 0) for i in range(n)]

    def check_invariants(self) -> None:
        S = self.stabilizers()
        D = self.destabilizers()
        for i in range(self.n):
            for j in range(self.n):
                if symplectic_product(S[i], S[j]):
                    raise AssertionError("stabilizers anticommute")
                if symplectic_product(S[i], D[j]) != (i == j):
                    raise AssertionError("destabilizer pairing broken")
                if i != j and symplectic_product(D[i], D[j]):
                    raise AssertionError("destabilizers anticommute")

    # -- gates --------------------------------------------------------------
    def _check(self, qubits: Sequence[int]) -> None:
        for q in qubits:
            if not 0 <= q < self.n:
                raise IndexError(f"qubit {q} out of range for {self.n} qubits")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubits {tuple(qubits)}")

    def apply(self, gate: str, qubits: Sequence[int]) -> "StabilizerState":
        """Apply a Clifford gate in place and return ``self``."""
        qubits = tuple(int(q) for q in qubits)
        self._check(qubits)
        g = gate.upper()
        xs, zs, r = self.xs, self.zs, self.r
        if g == "I":
            pass
        elif g == "H":
            K.k_h(xs, zs, r, qubits[0])
        elif g == "S":
            K.k_s(xs, zs, r, qubits[0])
        elif g == "SDG":
            for _ in range(3):
                K.k_s(xs, zs, r, qubits[0])
        elif g == "X":
            K.k_pauli(xs, zs, r, qubits[0], True, False)
        elif g == "Z":
            K.k_pauli(xs, zs, r, qubits[0], False, True)
        elif g == "Y":
            K.k_pauli(xs, zs, r, qubits[0], True, True)
        elif g in ("CX", "CNOT"):
            K.k_cx(xs, zs, r, qubits[0], qubits[1])
        elif g == "CZ":
            K.k_h(xs, zs, r, qubits[1])
            K.k_cx(xs, zs, r, qubits[0], qubits[1])
            K.k_h(xs, zs, r, qubits[1])
        elif g == "SWAP":
            a, b = qubits
            K.k_cx(xs, zs, r, a, b)
            K.k_cx(xs, zs, r, b, a)
            K.k_cx(xs, zs, r, a, b)
        else:
            raise ValueError(f"{gate!r} is not a supported Clifford gate")
        return self

    def apply_pauli(self, p: PauliString) -> "StabilizerState":
        """Multiply the state by a Pauli operator (sign changes only)."""
        if p.n != self.n:
            raise ValueError("length mismatch")
        px, pz, _ = _pack(p, self.xs.shape[1])
        anti = (np.bitwise_count((self.xs & pz) ^ (self.zs & px)).sum(axis=1) & 1).astype(np.uint8)
        self.r ^= anti
        return self

    def permute(self, perm: Sequence[int]) -> "StabilizerState":
        """Relabel qubits: the content of qubit ``i`` moves to ``perm[i]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError("not a permutation")
        rows = [(_unpack(self.n, self.xs[i], self.zs[i], int(self.r[i]))) for i in range(2 * self.n)]
        w = self.xs.shape[1]
        for i, p in enumerate(rows):
            self._set_row(i, p.permuted(perm), w)
        return self

    # -- measurement ----------------------------------------------------------
    def measure_pauli(self, p: PauliString, forced: int | None = None,
                      rng: np.random.Generator | None = None) -> tuple[int, bool]:
        """Measure ``p`` in place.

        Returns ``(outcome, deterministic)`` with ``outcome`` in ``{+1, -1}``.
        ``forced`` fixes the result of a random measurement; forcing the wrong
        value of a deterministic one raises :class:`ContradictionError`.
        """
        if p.n != self.n:
            raise ValueError("length mismatch")
        if forced is not None and forced not in (1, -1):
            raise ValueError("forced outcome must be +1 or -1")
        if forced is not None:
            bit = 0 if forced == 1 else 1
        else:
            rng = rng if rng is not None else np.random.default_rng()
            bit = int(rng.integers(2))
        px, pz, pr = _pack(p, self.xs.shape[1])
        # deterministic check runs before mutating, so a contradiction leaves state intact
        backup = None
        if forced is not None:
            backup = (self.xs.copy(), self.zs.copy(), self.r.copy())
        o, det = K.k_measure(self.xs, self.zs, self.r, self.n, px, pz, pr, bit)
        o = int(o)
        if det and forced is not None and o != bit:
            self.xs, self.zs, self.r = backup
            raise ContradictionError(f"measurement of {p} is deterministically {1 - 2 * o:+d}")
        return (1 if o == 0 else -1), bool(det)

    def measure(self, qubit: int, basis: str = "Z", forced: int | None = None,
                rng: np.random.Generator | None = None) -> tuple[int, bool]:
        self._check([qubit])
        p = PauliString.single(self.n, qubit, basis)
        return self.measure_pauli(p, forced=forced, rng=rng)

    def expectation(self, p: PauliString) -> int:
        """+1/-1 if ``p`` or ``-p`` is in the stabilizer group, 0 otherwise."""
        if any(not p.commutes(s) for s in self.stabilizers()):
            return 0
        o, det = self.copy().measure_pauli(p, forced=None, rng=np.random.default_rng(0))
        assert det
        return o

    def reset(self, qubit: int, rng: np.random.Generator | None = None) -> "StabilizerState":
        o, _ = self.measure(qubit, "Z", rng=rng)
        if o == -1:
            self.apply("X", [qubit])
        return self

    # -- canonical form --------------------------------------------------------------
    def canonical_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.n
        xs = self.xs[n: 2 * n].copy()
        zs = self.zs[n: 2 * n].copy()
        r = self.r[n: 2 * n].copy()
        K.k_canonicalize(xs, zs, r, n)
        return xs, zs, r

    def canonical_key(self) -> bytes:
        xs, zs, r = self.canonical_arrays()
        return canonical_key_from_arrays(xs, zs, r)

    def canonical_stabilizers(self) -> list[PauliString]:
        xs, zs, r = self.canonical_arrays()
        return [_unpack(self.n, xs[i], zs[i], int(r[i])) for i in range(self.n)]

    def __eq__(self, other) -> bool:
        return isinstance(other, StabilizerState) and self.n == other.n and \
            self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())


def canonical_key_from_arrays(xs: np.ndarray, zs: np.ndarray, r: np.ndarray) -> bytes:
    return xs.tobytes() + zs.tobytes() + r.tobytes()


def canonical_key(state: StabilizerState) -> bytes:
    return state.canonical_key()


def apply_clifford(state: StabilizerState, gate: str, qubits: Iterable[int]) -> StabilizerState:
    """Functional form of :meth:`StabilizerState.apply` (returns a new state)."""
    return state.copy().apply(gate, list(qubits))


def measure_pauli(state: StabilizerState, p: PauliString, forced: int | None = None,
                  rng: np.random.Generator | None = None) -> tuple[int, bool, StabilizerState]:
    new = state.copy()
    o, det = new.measure_pauli(p, forced=forced, rng=rng)
    return o, det, new
