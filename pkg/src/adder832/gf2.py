"""Tiny GF(2) linear algebra on Python-int bit vectors."""
from __future__ import annotations

from typing import Sequence

from .pauli import PauliString


def sym_vec(p: PauliString) -> int:
    return p.x | (p.z << p.n)


def rank(vectors: Sequence[int]) -> int:
    basis: dict[int, int] = {}
    for v in vectors:
        v = _reduce(v, basis)
        if v:
            basis[v.bit_length() - 1] = v
    return len(basis)


def _reduce(v: int, basis: dict[int, int]) -> int:
    while v:
        top = v.bit_length() - 1
        b = basis.get(top)
        if b is None:
            return v
        v ^= b
    return 0


def decompose(target: int, vectors: Sequence[int]) -> list[int] | None:
    """Indices ``I`` with ``XOR(vectors[I]) == target``, or ``None``."""
    basis: dict[int, tuple[int, int]] = {}
    for i, v in enumerate(vectors):
        combo = 1 << i
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = (v, combo)
                break
            bv, bc = basis[top]
            v ^= bv
            combo ^= bc
    combo = 0
    t = target
    while t:
        top = t.bit_length() - 1
        if top not in basis:
            return None
        bv, bc = basis[top]
        t ^= bv
        combo ^= bc
    return [i for i in range(len(vectors)) if combo >> i & 1]


def in_span(target: int, vectors: Sequence[int]) -> bool:
    return decompose(target, vectors) is not None
