"""Bit-packed tableau kernels.

A tableau is three arrays: ``xs`` and ``zs`` of shape ``(rows, words)`` and
dtype ``uint64`` holding one Pauli row per line, and ``r`` (``uint8``) holding
the sign bit of each row (1 means ``-``).  Qubit ``q`` lives in word ``q >> 6``,
bit ``q & 63``.

Every kernel exists as a numba loop (``*_nb``) and a vectorised numpy
implementation (``*_np``).  The public names at the bottom are bound to one
of them according to :mod:`adder832._accel`.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

ONE = np.uint64(1)
ZERO = np.uint64(0)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)


def n_words(n: int) -> int:
    return max(1, (n + 63) >> 6)


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------
@njit
def _popcount_nb(v):
    v = v - ((v >> _S1) & _M1)
    v = (v & _M2) + ((v >> _S2) & _M2)
    v = (v + (v >> _S4)) & _M4
    return np.int64((v * _H01) >> _S56)


@njit
def _h_nb(xs, zs, r, q):
    w = q >> 6
    mask = ONE << np.uint64(q & 63)
    for i in range(xs.shape[0]):
        xb = xs[i, w] & mask
        zb = zs[i, w] & mask
        if xb != ZERO and zb != ZERO:
            r[i] ^= 1
        xs[i, w] = (xs[i, w] & ~mask) | zb
        zs[i, w] = (zs[i, w] & ~mask) | xb


@njit
def _s_nb(xs, zs, r, q):
    w = q >> 6
    mask = ONE << np.uint64(q & 63)
    for i in range(xs.shape[0]):
        xb = xs[i, w] & mask
        if xb != ZERO:
            if zs[i, w] & mask != ZERO:
                r[i] ^= 1
            zs[i, w] ^= mask


@njit
def _cx_nb(xs, zs, r, c, t):
    wc = c >> 6
    wt = t >> 6
    bc = np.uint64(c & 63)
    bt = np.uint64(t & 63)
    for i in range(xs.shape[0]):
        xc = (xs[i, wc] >> bc) & ONE
        zc = (zs[i, wc] >> bc) & ONE
        xt = (xs[i, wt] >> bt) & ONE
        zt = (zs[i, wt] >> bt) & ONE
        if xc & zt & (xt ^ zc ^ ONE):
            r[i] ^= 1
        xs[i, wt] ^= xc << bt
        zs[i, wc] ^= zt << bc


@njit
def _pauli_frame_nb(xs, zs, r, q, px, pz):
    # conjugation by a single-qubit Pauli flips signs of anticommuting rows
    w = q >> 6
    mask = ONE << np.uint64(q & 63)
    for i in range(xs.shape[0]):
        a = 0
        if px and (zs[i, w] & mask) != ZERO:
            a ^= 1
        if pz and (xs[i, w] & mask) != ZERO:
            a ^= 1
        r[i] ^= a


@njit
def _rowmul_nb(xs, zs, r, h, i):
    """Row h <- row i * row h (phase tracked mod 4, sign bit kept)."""
    plus = 0
    minus = 0
    for w in range(xs.shape[1]):
        x1 = xs[i, w]
        z1 = zs[i, w]
        x2 = xs[h, w]
        z2 = zs[h, w]
        y1 = x1 & z1
        xo = x1 & ~z1
        zo = ~x1 & z1
        plus += _popcount_nb((y1 & z2 & ~x2) | (xo & z2 & x2) | (zo & x2 & ~z2))
        minus += _popcount_nb((y1 & x2 & ~z2) | (xo & z2 & ~x2) | (zo & x2 & z2))
        xs[h, w] = x2 ^ x1
        zs[h, w] = z2 ^ z1
    s = (2 * np.int64(r[h]) + 2 * np.int64(r[i]) + plus - minus) % 4
    r[h] = 1 if s >= 2 else 0


@njit
def _anticommutes_nb(xs, zs, i, px, pz):
    acc = 0
    for w in range(xs.shape[1]):
        acc += _popcount_nb((xs[i, w] & pz[w]) ^ (zs[i, w] & px[w]))
    return acc & 1


@njit
def _measure_nb(xs, zs, r, n, px, pz, pr, rand_bit):
    """Measure the Pauli (px, pz, pr) on a CHP tableau with 2n+1 rows."""
    rho = -1
    for i in range(n, 2 * n):
        if _anticommutes_nb(xs, zs, i, px, pz):
            rho = i
            break
    if rho >= 0:
        for i in range(2 * n):
            if i != rho and _anticommutes_nb(xs, zs, i, px, pz):
                _rowmul_nb(xs, zs, r, i, rho)
        for w in range(xs.shape[1]):
            xs[rho - n, w] = xs[rho, w]
            zs[rho - n, w] = zs[rho, w]
            xs[rho, w] = px[w]
            zs[rho, w] = pz[w]
        r[rho - n] = r[rho]
        r[rho] = pr ^ rand_bit
        return rand_bit, False
    sc = 2 * n
    for w in range(xs.shape[1]):
        xs[sc, w] = ZERO
        zs[sc, w] = ZERO
    r[sc] = 0
    for i in range(n):
        if _anticommutes_nb(xs, zs, i, px, pz):
            _rowmul_nb(xs, zs, r, sc, i + n)
    return r[sc] ^ pr, True


@njit
def _canonicalize_nb(xs, zs, r, n):
    """Reduced row echelon form of rows 0..n-1, columns x_0..x_n-1, z_0..z_n-1."""
    row = 0
    for col in range(2 * n):
        q = col if col < n else col - n
        w = q >> 6
        mask = ONE << np.uint64(q & 63)
        piv = -1
        for k in range(row, n):
            v = xs[k, w] if col < n else zs[k, w]
            if v & mask != ZERO:
                piv = k
                break
        if piv < 0:
            continue
        if piv != row:
            for ww in range(xs.shape[1]):
                t = xs[piv, ww]
                xs[piv, ww] = xs[row, ww]
                xs[row, ww] = t
                t = zs[piv, ww]
                zs[piv, ww] = zs[row, ww]
                zs[row, ww] = t
            tr = r[piv]
            r[piv] = r[row]
            r[row] = tr
        for k in range(n):
            if k == row:
                continue
            v = xs[k, w] if col < n else zs[k, w]
            if v & mask != ZERO:
                _rowmul_nb(xs, zs, r, k, row)
        row += 1
        if row == n:
            break


@njit
def _cx_children_nb(xs, zs, r, n, pairs, out_x, out_z, out_r):
    """Canonical forms of the state after each CNOT in ``pairs`` (stab rows only)."""
    for m in range(pairs.shape[0]):
        cx = xs.copy()
        cz = zs.copy()
        cr = r.copy()
        _cx_nb(cx, cz, cr, pairs[m, 0], pairs[m, 1])
        _canonicalize_nb(cx, cz, cr, n)
        out_x[m] = cx
        out_z[m] = cz
        out_r[m] = cr


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------
def _bits_np(a, q):
    return (a[:, q >> 6] >> np.uint64(q & 63)) & ONE


def _h_np(xs, zs, r, q):
    w = q >> 6
    mask = ONE << np.uint64(q & 63)
    xb = xs[:, w] & mask
    zb = zs[:, w] & mask
    r ^= ((xb != 0) & (zb != 0)).astype(np.uint8)
    xs[:, w] = (xs[:, w] & ~mask) | zb
    zs[:, w] = (zs[:, w] & ~mask) | xb


def _s_np(xs, zs, r, q):
    w = q >> 6
    mask = ONE << np.uint64(q & 63)
    xb = xs[:, w] & mask
    r ^= ((xb != 0) & ((zs[:, w] & mask) != 0)).astype(np.uint8)
    zs[:, w] ^= xb


def _cx_np(xs, zs, r, c, t):
    bc = np.uint64(c & 63)
    bt = np.uint64(t & 63)
    xc = _bits_np(xs, c)
    zc = _bits_np(zs, c)
    xt = _bits_np(xs, t)
    zt = _bits_np(zs, t)
    r ^= (xc & zt & (xt ^ zc ^ ONE)).astype(np.uint8)
    xs[:, t >> 6] ^= xc << bt
    zs[:, c >> 6] ^= zt << bc


def _pauli_frame_np(xs, zs, r, q, px, pz):
    a = np.zeros(xs.shape[0], dtype=np.uint64)
    if px:
        a ^= _bits_np(zs, q)
    if pz:
        a ^= _bits_np(xs, q)
    r ^= a.astype(np.uint8)


def _rowmul_many_np(xs, zs, r, targets, i):
    """Rows ``targets`` <- row i * row (each)."""
    if len(targets) == 0:
        return
    x1 = xs[i]
    z1 = zs[i]
    x2 = xs[targets]
    z2 = zs[targets]
    y1 = x1 & z1
    xo = x1 & ~z1
    zo = ~x1 & z1
    plus = np.bitwise_count((y1 & z2 & ~x2) | (xo & z2 & x2) | (zo & x2 & ~z2)).sum(axis=1, dtype=np.int64)
    minus = np.bitwise_count((y1 & x2 & ~z2) | (xo & z2 & ~x2) | (zo & x2 & z2)).sum(axis=1, dtype=np.int64)
    s = (2 * r[targets].astype(np.int64) + 2 * int(r[i]) + plus - minus) % 4
    xs[targets] = x2 ^ x1
    zs[targets] = z2 ^ z1
    r[targets] = (s >= 2).astype(np.uint8)


def _rowmul_np(xs, zs, r, h, i):
    _rowmul_many_np(xs, zs, r, np.array([h]), i)


def _anticomm_rows_np(xs, zs, px, pz):
    return (np.bitwise_count((xs & pz) ^ (zs & px)).sum(axis=1) & 1).astype(bool)


def _measure_np(xs, zs, r, n, px, pz, pr, rand_bit):
    anti = _anticomm_rows_np(xs[: 2 * n], zs[: 2 * n], px, pz)
    stab_hits = np.flatnonzero(anti[n:])
    if stab_hits.size:
        rho = n + int(stab_hits[0])
        others = np.flatnonzero(anti)
        others = others[others != rho]
        _rowmul_many_np(xs, zs, r, others, rho)
        xs[rho - n] = xs[rho]
        zs[rho - n] = zs[rho]
        r[rho - n] = r[rho]
        xs[rho] = px
        zs[rho] = pz
        r[rho] = pr ^ rand_bit
        return rand_bit, False
    sc = 2 * n
    xs[sc] = 0
    zs[sc] = 0
    r[sc] = 0
    for i in np.flatnonzero(anti[:n]):
        _rowmul_np(xs, zs, r, sc, int(i) + n)
    return int(r[sc]) ^ pr, True


def _canonicalize_np(xs, zs, r, n):
    row = 0
    for col in range(2 * n):
        q = col if col < n else col - n
        src = xs if col < n else zs
        bits = _bits_np(src[:n], q).astype(bool)
        cand = np.flatnonzero(bits[row:])
        if cand.size == 0:
            continue
        piv = row + int(cand[0])
        if piv != row:
            xs[[piv, row]] = xs[[row, piv]]
            zs[[piv, row]] = zs[[row, piv]]
            r[[piv, row]] = r[[row, piv]]
            bits[[piv, row]] = bits[[row, piv]]
        hits = np.flatnonzero(bits)
        hits = hits[hits != row]
        _rowmul_many_np(xs, zs, r, hits, row)
        row += 1
        if row == n:
            break


def _batch_bits(a, q):
    """Bit ``q`` of every row of a stack ``(M, rows, words)``; ``q`` may vary per tableau."""
    m = np.arange(a.shape[0])[:, None]
    k = np.arange(a.shape[1])[None, :]
    return (a[m, k, (q >> 6)[:, None]] >> (q & 63).astype(np.uint64)[:, None]) & ONE


def _canonicalize_batch_np(xs, zs, r, n):
    """Row-reduce a stack of tableaux at once; same echelon form as the scalar kernel."""
    M = xs.shape[0]
    bm = np.arange(M)
    row = np.zeros(M, dtype=np.int64)
    ks = np.arange(n)[None, :]
    for col in range(2 * n):
        q = col if col < n else col - n
        src = xs if col < n else zs
        bits = ((src[:, :, q >> 6] >> np.uint64(q & 63)) & ONE).astype(bool)
        cand = bits & (ks >= row[:, None]) & (row[:, None] < n)
        has = cand.any(axis=1)
        if not has.any():
            continue
        b = bm[has]
        piv = np.argmax(cand[b], axis=1)
        rw = row[b]
        for arr in (xs, zs):
            tmp = arr[b, piv].copy()
            arr[b, piv] = arr[b, rw]
            arr[b, rw] = tmp
        tmp = r[b, piv].copy()
        r[b, piv] = r[b, rw]
        r[b, rw] = tmp
        tb = bits[b]
        tmpb = tb[np.arange(b.size), piv].copy()
        tb[np.arange(b.size), piv] = tb[np.arange(b.size), rw]
        tb[np.arange(b.size), rw] = tmpb
        tb[np.arange(b.size), rw] = False
        # rows k of tableau b with the bit set absorb the pivot row
        x1 = xs[b, rw][:, None, :]
        z1 = zs[b, rw][:, None, :]
        x2 = xs[b]
        z2 = zs[b]
        y1 = x1 & z1
        xo = x1 & ~z1
        zo = ~x1 & z1
        plus = np.bitwise_count((y1 & z2 & ~x2) | (xo & z2 & x2) | (zo & x2 & ~z2)).sum(axis=2, dtype=np.int64)
        minus = np.bitwise_count((y1 & x2 & ~z2) | (xo & z2 & ~x2) | (zo & x2 & z2)).sum(axis=2, dtype=np.int64)
        sgn = (2 * r[b].astype(np.int64) + 2 * r[b, rw].astype(np.int64)[:, None] + plus - minus) % 4
        sel = tb[:, :, None]
        xs[b] = np.where(sel, x2 ^ x1, x2)
        zs[b] = np.where(sel, z2 ^ z1, z2)
        r[b] = np.where(tb, (sgn >= 2).astype(np.uint8), r[b])
        row[b] += 1


def _cx_children_np(xs, zs, r, n, pairs, out_x, out_z, out_r):
    M = pairs.shape[0]
    cx = np.broadcast_to(xs, (M,) + xs.shape).copy()
    cz = np.broadcast_to(zs, (M,) + zs.shape).copy()
    cr = np.broadcast_to(r, (M,) + r.shape).copy()
    c = pairs[:, 0].astype(np.int64)
    t = pairs[:, 1].astype(np.int64)
    xc, zc = _batch_bits(cx, c), _batch_bits(cz, c)
    xt, zt = _batch_bits(cx, t), _batch_bits(cz, t)
    cr ^= (xc & zt & (xt ^ zc ^ ONE)).astype(np.uint8)
    m = np.arange(M)[:, None]
    k = np.arange(xs.shape[0])[None, :]
    cx[m, k, (t >> 6)[:, None]] ^= xc << (t & 63).astype(np.uint64)[:, None]
    cz[m, k, (c >> 6)[:, None]] ^= zt << (c & 63).astype(np.uint64)[:, None]
    _canonicalize_batch_np(cx, cz, cr, n)
    out_x[:] = cx
    out_z[:] = cz
    out_r[:] = cr


KERNELS = {
    "numba": dict(h=_h_nb, s=_s_nb, cx=_cx_nb, pauli=_pauli_frame_nb, rowmul=_rowmul_nb,
                  measure=_measure_nb, canonicalize=_canonicalize_nb, cx_children=_cx_children_nb),
    "numpy": dict(h=_h_np, s=_s_np, cx=_cx_np, pauli=_pauli_frame_np, rowmul=_rowmul_np,
                  measure=_measure_np, canonicalize=_canonicalize_np, cx_children=_cx_children_np),
}

_active = KERNELS["numba" if USE_NUMBA else "numpy"]
k_h = _active["h"]
k_s = _active["s"]
k_cx = _active["cx"]
k_pauli = _active["pauli"]
k_rowmul = _active["rowmul"]
k_measure = _active["measure"]
k_canonicalize = _active["canonicalize"]
k_cx_children = _active["cx_children"]
