"""Signed Pauli strings stored as a pair of integer bitmasks.

Bit ``i`` of :attr:`PauliString.x` / :attr:`PauliString.z` refers to qubit ``i``
(0-based).  The text form is ``"+XIZY"`` with qubit 0 leftmost.  The pair
``(x, z) = (1, 1)`` on a qubit denotes ``Y``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTERS.items()}


def _popcount(v: int) -> int:
    return v.bit_count()


def phase_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent ``k`` (mod 4) with ``P1 P2 = i^k P3`` for unsigned strings."""
    y1 = x1 & z1
    xo = x1 & ~z1
    zo = ~x1 & z1
    plus = (y1 & z2 & ~x2) | (xo & z2 & x2) | (zo & x2 & ~z2)
    minus = (y1 & x2 & ~z2) | (xo & z2 & ~x2) | (zo & x2 & z2)
    return (_popcount(plus) - _popcount(minus)) % 4


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("bits set outside the register")

    # -- constructors -----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_str(cls, text: str) -> "PauliString":
        text = text.strip()
        sign = 1
        if text and text[0] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        x = z = 0
        for i, ch in enumerate(text):
            try:
                bx, bz = _BITS[ch.upper()]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r} at position {i}") from None
            x |= bx << i
            z |= bz << i
        return cls(len(text), x, z, sign)

    @classmethod
    def from_support(cls, n: int, kind: str, qubits: Iterable[int], sign: int = 1) -> "PauliString":
        """Uniform ``X``/``Y``/``Z`` string on ``qubits``."""
        m = 0
        for q in qubits:
            if not 0 <= q < n:
                raise IndexError(f"qubit {q} out of range")
            m |= 1 << q
        kind = kind.upper()
        x = m if kind in ("X", "Y") else 0
        z = m if kind in ("Z", "Y") else 0
        return cls(n, x, z, sign)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        return cls.from_support(n, letter, [qubit])

    # -- queries ----------------------------------------------------------
    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def x_bits(self) -> tuple[int, ...]:
        return tuple(self.x >> i & 1 for i in range(self.n))

    @property
    def z_bits(self) -> tuple[int, ...]:
        return tuple(self.z >> i & 1 for i in range(self.n))

    @property
    def support(self) -> list[int]:
        m = self.x | self.z
        return [i for i in range(self.n) if m >> i & 1]

    def letter(self, q: int) -> str:
        return _LETTERS[(self.x >> q & 1, self.z >> q & 1)]

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def commutes(self, other: "PauliString") -> bool:
        _check_len(self, other)
        return _popcount((self.x & other.z) ^ (self.z & other.x)) % 2 == 0

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, -self.sign)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + "".join(self.letter(q) for q in range(self.n))

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def embed(self, n: int, qubits: Sequence[int]) -> "PauliString":
        """Place this string on ``qubits`` of an ``n``-qubit register."""
        if len(qubits) != self.n:
            raise ValueError("qubit list length does not match string length")
        x = z = 0
        for i, q in enumerate(qubits):
            x |= (self.x >> i & 1) << q
            z |= (self.z >> i & 1) << q
        return PauliString(n, x, z, self.sign)

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        x = z = 0
        for i, q in enumerate(qubits):
            x |= (self.x >> q & 1) << i
            z |= (self.z >> q & 1) << i
        return PauliString(len(qubits), x, z, self.sign)

    def permuted(self, perm: Sequence[int]) -> "PauliString":
        """Relabel qubits: the factor on qubit ``i`` moves to ``perm[i]``."""
        if len(perm) != self.n:
            raise ValueError("permutation length mismatch")
        x = z = 0
        for i, j in enumerate(perm):
            x |= (self.x >> i & 1) << j
            z |= (self.z >> i & 1) << j
        return PauliString(self.n, x, z, self.sign)


def _check_len(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise ValueError(f"length mismatch: {p.n} vs {q.n}")


def mul_with_phase(p: PauliString, q: PauliString) -> tuple[int, PauliString]:
    """Return ``(k, r)`` with ``p * q == i**k * r`` exactly (``r`` has sign +1)."""
    _check_len(p, q)
    k = phase_exponent(p.x, p.z, q.x, q.z)
    if p.sign * q.sign < 0:
        k += 2
    return k % 4, PauliString(p.n, p.x ^ q.x, p.z ^ q.z)


def pauli_mul(p: PauliString, q: PauliString) -> PauliString:
    """Product ``p * q`` with a dropped factor of ``i`` when the factors anticommute.

    The returned sign is ``(-1)**(k // 2)`` where ``p*q = i**k * R``; hence
    ``(p*q).sign == (q*p).sign`` exactly when ``p`` and ``q`` commute.
    """
    k, r = mul_with_phase(p, q)
    return PauliString(r.n, r.x, r.z, -1 if k // 2 else 1)


def symplectic_product(p: PauliString, q: PauliString) -> int:
    _check_len(p, q)
    return _popcount((p.x & q.z) ^ (p.z & q.x)) & 1


# ---------------------------------------------------------------------------
# Clifford conjugation  P -> U P U^dagger
# ---------------------------------------------------------------------------
class PropagationError(ValueError):
    """A non-Clifford gate was met while propagating a Pauli operator."""


def _b(v: int, q: int) -> int:
    return v >> q & 1


def conjugate(p: PauliString, gate: str, qubits: Sequence[int]) -> PauliString:
    """Return ``U p U^dagger`` for the named Clifford gate ``U``."""
    g = gate.upper()
    x, z, neg = p.x, p.z, p.sign < 0
    if g == "I":
        pass
    elif g == "H":
        q = qubits[0]
        xb, zb = _b(x, q), _b(z, q)
        neg ^= bool(xb & zb)
        x = (x & ~(1 << q)) | (zb << q)
        z = (z & ~(1 << q)) | (xb << q)
    elif g == "S":
        q = qubits[0]
        xb, zb = _b(x, q), _b(z, q)
        neg ^= bool(xb & zb)
        z ^= xb << q
    elif g == "SDG":
        q = qubits[0]
        xb, zb = _b(x, q), _b(z, q)
        neg ^= bool(xb & (1 - zb))
        z ^= xb << q
    elif g in ("X", "Y", "Z"):
        q = qubits[0]
        xb, zb = _b(x, q), _b(z, q)
        neg ^= bool({"X": zb, "Z": xb, "Y": xb ^ zb}[g])
    elif g in ("CX", "CNOT"):
        c, t = qubits
        xc, zc, xt, zt = _b(x, c), _b(z, c), _b(x, t), _b(z, t)
        neg ^= bool(xc & zt & (xt ^ zc ^ 1))
        x ^= xc << t
        z ^= zt << c
    elif g == "CZ":
        a, b = qubits
        r = conjugate(PauliString(p.n, x, z, -1 if neg else 1), "H", [b])
        r = conjugate(r, "CX", [a, b])
        return conjugate(r, "H", [b])
    elif g == "SWAP":
        a, b = qubits
        for v in ("x", "z"):
            val = x if v == "x" else z
            ba, bb = _b(val, a), _b(val, b)
            if ba != bb:
                val ^= (1 << a) | (1 << b)
            if v == "x":
                x = val
            else:
                z = val
    else:
        raise PropagationError(f"cannot propagate a Pauli through non-Clifford gate {gate!r}")
    return PauliString(p.n, x, z, -1 if neg else 1)
