"""The [[8,3,2]] colour code and the [[4,2,2]] code.

Qubits are 0-based.  Qubit ``q`` of the [[8,3,2]] code sits on the cube vertex
whose coordinates are the three bits of ``q``; the column order of the usual
stabilizer table is kept (table column ``j`` is qubit ``j - 1``).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import gf2
from .pauli import PauliString, conjugate
from .tableau import StabilizerState


class NotASymmetryError(ValueError):
    """The permutation does not preserve the stabilizer group."""


@dataclass(frozen=True)
class CodeSpec:
    name: str
    n: int
    k: int
    d: int
    stabilizers: tuple[PauliString, ...]
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]
    faces: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    symmetries: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    logical_labels: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.logical_labels:
            object.__setattr__(self, "logical_labels", tuple(range(1, self.k + 1)))
        self.validate()

    # -- structure checks ---------------------------------------------------------
    def validate(self) -> None:
        S, LX, LZ = self.stabilizers, self.logical_x, self.logical_z
        if len(LX) != self.k or len(LZ) != self.k:
            raise ValueError("need k logical X and k logical Z operators")
        for a, b in itertools.combinations(S, 2):
            if not a.commutes(b):
                raise ValueError(f"stabilizers {a} and {b} anticommute")
        if gf2.rank([gf2.sym_vec(s) for s in S]) != self.n - self.k:
            raise ValueError("stabilizer rank is not n - k")
        for L in LX + LZ:
            if not all(L.commutes(s) for s in S):
                raise ValueError(f"logical {L} does not commute with the stabilizers")
        for i in range(self.k):
            for j in range(self.k):
                if LX[i].commutes(LZ[j]) == (i == j):
                    raise ValueError(f"logical pair ({i}, {j}) has wrong commutation")
                if i < j and not (LX[i].commutes(LX[j]) and LZ[i].commutes(LZ[j])):
                    raise ValueError("logical operators of the same type must commute")

    def stabilizer_vectors(self) -> list[int]:
        return [gf2.sym_vec(s) for s in self.stabilizers]

    def in_stabilizer_group(self, p: PauliString) -> bool:
        return gf2.in_span(gf2.sym_vec(p), self.stabilizer_vectors())

    def is_logical(self, p: PauliString) -> bool:
        """True for operators that commute with S but are not in S (up to sign)."""
        return all(p.commutes(s) for s in self.stabilizers) and not self.in_stabilizer_group(p)

    def logical_coordinates(self, p: PauliString) -> tuple[int, ...] | None:
        """Bits ``(a_1..a_k, b_1..b_k)`` with ``p ~ prod X_i^a_i Z_i^b_i`` modulo S."""
        vecs = self.stabilizer_vectors() + [gf2.sym_vec(l) for l in self.logical_x + self.logical_z]
        idx = gf2.decompose(gf2.sym_vec(p), vecs)
        if idx is None:
            return None
        m = len(self.stabilizers)
        bits = [0] * (2 * self.k)
        for i in idx:
            if i >= m:
                bits[i - m] = 1
        return tuple(bits)

    def computed_distance(self, max_weight: int | None = None) -> int:
        """Brute-force minimum weight of a logical operator (used for n <= 12)."""
        if self.n > 12:
            raise ValueError("brute-force distance is limited to n <= 12")
        max_weight = self.n if max_weight is None else max_weight
        for w in range(1, max_weight + 1):
            for qs in itertools.combinations(range(self.n), w):
                for letters in itertools.product("XYZ", repeat=w):
                    p = PauliString.from_str("".join(
                        letters[qs.index(q)] if q in qs else "I" for q in range(self.n)))
                    if self.is_logical(p):
                        return w
        raise ValueError("no logical operator found")

    def codespace_state(self, basis: str = "Z", values: Sequence[int] | None = None) -> StabilizerState:
        """Encoded product state: logical Z (or X) eigenstates with the given bits."""
        values = [0] * self.k if values is None else list(values)
        L = self.logical_z if basis.upper() == "Z" else self.logical_x
        gens = list(self.stabilizers) + [l if v == 0 else -l for l, v in zip(L, values)]
        return StabilizerState.from_stabilizers(gens)

    # -- serialisation ------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "schema": "adder832.codespec/1",
            "name": self.name,
            "n": self.n, "k": self.k, "d": self.d,
            "stabilizers": [str(s) for s in self.stabilizers],
            "logical_x": [str(s) for s in self.logical_x],
            "logical_z": [str(s) for s in self.logical_z],
            "logical_labels": list(self.logical_labels),
            "faces": {k: list(v) for k, v in self.faces.items()},
            "symmetries": {k: list(v) for k, v in self.symmetries.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "CodeSpec":
        P = PauliString.from_str
        return cls(
            name=doc["name"], n=doc["n"], k=doc["k"], d=doc["d"],
            stabilizers=tuple(P(s) for s in doc["stabilizers"]),
            logical_x=tuple(P(s) for s in doc["logical_x"]),
            logical_z=tuple(P(s) for s in doc["logical_z"]),
            faces={k: tuple(v) for k, v in doc.get("faces", {}).items()},
            symmetries={k: tuple(v) for k, v in doc.get("symmetries", {}).items()},
            logical_labels=tuple(doc.get("logical_labels", ())),
        )


def _ps(n: int, kind: str, table_cols: Sequence[int]) -> PauliString:
    return PauliString.from_support(n, kind, [c - 1 for c in table_cols])


# Face reflections found by :func:`find_symmetries`; frozen here and re-verified in tests.
#   top_face_reflection: logical CNOT control 2 -> target 3
#   cnot_1_3:            logical CNOT control 1 -> target 3 (used by the adder)
_SYMMETRIES_832 = {
    "top_face_reflection": (0, 3, 2, 1, 4, 7, 6, 5),
    "cnot_1_3": (0, 5, 2, 7, 4, 1, 6, 3),
}


def _faces_from_stabilizers(n: int, stabs: Sequence[PauliString]) -> dict[str, tuple[int, ...]]:
    faces: dict[str, tuple[int, ...]] = {}
    i = 0
    for s in stabs:
        if s.x == 0 and s.weight == 4:
            i += 1
            sup = tuple(s.support)
            faces[f"F{i}"] = sup
            faces[f"F{i}'"] = tuple(q for q in range(n) if q not in sup)
    return faces


def code_832() -> CodeSpec:
    n = 8
    stabs = (
        _ps(n, "X", range(1, 9)),
        _ps(n, "Z", range(1, 9)),
        _ps(n, "Z", [1, 2, 3, 4]),
        _ps(n, "Z", [1, 2, 5, 6]),
        _ps(n, "Z", [1, 3, 5, 7]),
    )
    lx = (_ps(n, "X", [1, 2, 3, 4]), _ps(n, "X", [1, 2, 5, 6]), _ps(n, "X", [1, 3, 5, 7]))
    lz = (_ps(n, "Z", [1, 5]), _ps(n, "Z", [1, 3]), _ps(n, "Z", [1, 2]))
    return CodeSpec("[[8,3,2]]", n, 3, 2, stabs, lx, lz,
                    faces=_faces_from_stabilizers(n, stabs),
                    symmetries=dict(_SYMMETRIES_832))


def code_422() -> CodeSpec:
    n = 4
    stabs = (_ps(n, "X", range(1, 5)), _ps(n, "Z", range(1, 5)))
    lx = (_ps(n, "X", [1, 3]), _ps(n, "X", [1, 2]))
    lz = (_ps(n, "Z", [1, 2]), _ps(n, "Z", [1, 3]))
    return CodeSpec("[[4,2,2]]", n, 2, 2, stabs, lx, lz, logical_labels=(4, 5))


# ---------------------------------------------------------------------------
# logical maps
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class LogicalMap:
    """Images of the logical generators, as bit rows over ``(X_1..X_k, Z_1..Z_k)``."""

    labels: tuple[int, ...]
    matrix: np.ndarray  # (2k, 2k) uint8: row i is the image of generator i

    @property
    def k(self) -> int:
        return len(self.labels)

    def image(self, kind: str, label: int) -> tuple[int, ...]:
        i = self.labels.index(label) + (self.k if kind.upper() == "Z" else 0)
        return tuple(int(b) for b in self.matrix[i])

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(2 * self.k, dtype=np.uint8)))

    def is_symplectic(self) -> bool:
        k = self.k
        omega = np.block([[np.zeros((k, k), int), np.eye(k, dtype=int)],
                          [np.eye(k, dtype=int), np.zeros((k, k), int)]])
        m = self.matrix.astype(int)
        return bool(np.array_equal((m @ omega @ m.T) % 2, omega))

    def compose(self, first: "LogicalMap") -> "LogicalMap":
        """Map of applying ``first`` and then ``self``."""
        # images are row vectors: applying first then self sends e_i -> first_i * self
        return LogicalMap(self.labels, (first.matrix.astype(int) @ self.matrix.astype(int) % 2).astype(np.uint8))

    def describe(self) -> dict[str, str]:
        out = {}
        for kind in ("X", "Z"):
            for lab in self.labels:
                bits = self.image(kind, lab)
                terms = [f"X{l}" for l, b in zip(self.labels, bits[: self.k]) if b] + \
                        [f"Z{l}" for l, b in zip(self.labels, bits[self.k:]) if b]
                out[f"{kind}{lab}"] = "".join(terms) or "I"
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, LogicalMap) and self.labels == other.labels and \
            bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash((self.labels, self.matrix.tobytes()))


def logical_map_from_images(code: CodeSpec, images_x: Sequence[PauliString],
                            images_z: Sequence[PauliString]) -> LogicalMap:
    rows = []
    for img in list(images_x) + list(images_z):
        coords = code.logical_coordinates(img)
        if coords is None:
            raise ValueError(f"{img} is not in the normalizer")
        rows.append(coords)
    return LogicalMap(tuple(code.logical_labels), np.array(rows, dtype=np.uint8))


def is_automorphism(code: CodeSpec, perm: Sequence[int]) -> bool:
    vecs = code.stabilizer_vectors()
    return all(gf2.in_span(gf2.sym_vec(s.permuted(perm)), vecs) for s in code.stabilizers)


def permutation_action(code: CodeSpec, perm: Sequence[int]) -> LogicalMap:
    """Logical map induced by relabelling qubit ``i`` as ``perm[i]``."""
    perm = tuple(perm)
    if sorted(perm) != list(range(code.n)):
        raise ValueError("not a permutation of the code qubits")
    if not is_automorphism(code, perm):
        raise NotASymmetryError(f"{perm} does not preserve the stabilizer group")
    return logical_map_from_images(code, [l.permuted(perm) for l in code.logical_x],
                                   [l.permuted(perm) for l in code.logical_z])


def cnot_map(labels: Sequence[int], control: int, target: int) -> LogicalMap:
    """Heisenberg map of a logical CNOT: X_c -> X_c X_t, Z_t -> Z_c Z_t."""
    k = len(labels)
    m = np.eye(2 * k, dtype=np.uint8)
    c, t = labels.index(control), labels.index(target)
    m[c, t] = 1
    m[k + t, k + c] = 1
    return LogicalMap(tuple(labels), m)


def hadamard_map(labels: Sequence[int], targets: Sequence[int]) -> LogicalMap:
    k = len(labels)
    m = np.eye(2 * k, dtype=np.uint8)
    for t in targets:
        i = labels.index(t)
        m[i, i] = m[k + i, k + i] = 0
        m[i, k + i] = m[k + i, i] = 1
    return LogicalMap(tuple(labels), m)


def find_symmetries(code: CodeSpec) -> dict[tuple[int, ...], LogicalMap]:
    """Every qubit permutation preserving the stabilizer group, with its logical map."""
    out = {}
    for perm in itertools.permutations(range(code.n)):
        if is_automorphism(code, perm):
            out[perm] = permutation_action(code, perm)
    return out


def find_cnot_permutation(code: CodeSpec, control: int, target: int) -> tuple[int, ...]:
    """Smallest-support involution implementing a logical CNOT (lexicographic tie-break)."""
    want = cnot_map(code.logical_labels, control, target)
    best = None
    for perm, lm in find_symmetries(code).items():
        if lm != want:
            continue
        if any(perm[perm[i]] != i for i in range(code.n)):
            continue
        moved = sum(1 for i, j in enumerate(perm) if i != j)
        cand = (moved, perm)
        if best is None or cand < best:
            best = cand
    if best is None:
        raise NotASymmetryError("no involutive permutation implements this CNOT")
    return best[1]


# ---------------------------------------------------------------------------
# destructive face measurement and inter-code CNOT
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FaceMeasurement:
    face: tuple[int, ...]
    measured_logical: int
    residual: CodeSpec
    residual_qubits: tuple[int, ...]
    residual_logicals: Mapping[int, tuple[int, int]]  # original label -> (x index, z index) in residual
    stabilizer_recipe: str


def destructive_face_measurement(code: CodeSpec, face: Sequence[int]) -> FaceMeasurement:
    """Measure every qubit of ``face`` in the X basis (book-keeping only)."""
    face = tuple(sorted(face))
    fmask = sum(1 << q for q in face)
    measured = [i for i, l in enumerate(code.logical_x) if l.x == fmask]
    if not measured:
        raise ValueError(f"face {face} does not support a logical X operator")
    mi = measured[0]
    rest = tuple(q for q in range(code.n) if q not in face)
    rmask = sum(1 << q for q in rest)
    n = code.n

    def restricted(p: PauliString) -> PauliString:
        return p.restrict(rest)

    # logical X: multiply by X on the measured face (a known classical value)
    res_lx, res_lz, labels = [], [], []
    for i in range(code.k):
        if i == mi:
            continue
        lx = code.logical_x[i]
        lx = PauliString(n, lx.x & rmask, 0)
        lz = _representative_off(code, code.logical_z[i], fmask)
        if lz is None:
            raise ValueError("logical Z has no representative off the measured face")
        res_lx.append(restricted(lx))
        res_lz.append(restricted(lz))
        labels.append(code.logical_labels[i])
    m = len(rest)
    stabs = (PauliString.from_support(m, "X", range(m)), PauliString.from_support(m, "Z", range(m)))
    residual = CodeSpec(f"residual{face}", m, len(labels), 2, stabs, tuple(res_lx), tuple(res_lz),
                        logical_labels=tuple(labels))
    recipe = (f"X^8 = parity of X results on {list(face)} and the X^{m} measurement on {list(rest)}")
    return FaceMeasurement(face, code.logical_labels[mi], residual, rest,
                           {lab: (j, j) for j, lab in enumerate(labels)}, recipe)


def _representative_off(code: CodeSpec, p: PauliString, fmask: int) -> PauliString | None:
    """Equivalent of ``p`` (times a Z stabilizer) with no support on ``fmask``, minimum weight."""
    zst = [s for s in code.stabilizers if s.x == 0]
    best = None
    for r in range(len(zst) + 1):
        for combo in itertools.combinations(zst, r):
            z = p.z
            for s in combo:
                z ^= s.z
            if z & fmask == 0 and p.x & fmask == 0:
                cand = PauliString(code.n, p.x, z)
                if best is None or cand.weight < best.weight:
                    best = cand
    return best


def joint_code(a: CodeSpec, b: CodeSpec) -> CodeSpec:
    n = a.n + b.n
    qa, qb = list(range(a.n)), list(range(a.n, n))
    emb = lambda ps, qs: tuple(p.embed(n, qs) for p in ps)  # noqa: E731
    return CodeSpec(f"{a.name}+{b.name}", n, a.k + b.k, min(a.d, b.d),
                    emb(a.stabilizers, qa) + emb(b.stabilizers, qb),
                    emb(a.logical_x, qa) + emb(b.logical_x, qb),
                    emb(a.logical_z, qa) + emb(b.logical_z, qb),
                    logical_labels=a.logical_labels + b.logical_labels)


def transversal_cnot_832_422(face: Sequence[int], pairing: Sequence[int] | None = None) -> LogicalMap:
    """Logical action of CNOTs from ``face`` qubits of [[8,3,2]] onto the [[4,2,2]] block.

    ``pairing[i]`` is the [[4,2,2]] qubit targeted from ``face[i]`` (default identity).
    """
    face = tuple(face)
    pairing = tuple(range(4)) if pairing is None else tuple(pairing)
    if len(face) != 4 or sorted(pairing) != [0, 1, 2, 3]:
        raise ValueError("need a 4-qubit face and a bijective pairing")
    joint = joint_code(code_832(), code_422())
    gates = [(c, 8 + t) for c, t in zip(face, pairing)]

    def push(p: PauliString) -> PauliString:
        for c, t in gates:
            p = conjugate(p, "CX", [c, t])
        return p

    vecs = joint.stabilizer_vectors()
    for s in joint.stabilizers:
        if not gf2.in_span(gf2.sym_vec(push(s)), vecs):
            raise NotASymmetryError(f"CNOT layer maps stabilizer {s} out of the group")
    return logical_map_from_images(joint, [push(l) for l in joint.logical_x],
                                   [push(l) for l in joint.logical_z])
