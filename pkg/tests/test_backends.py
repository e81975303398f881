"""The numba and numpy kernel sets must agree bit for bit."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adder832 import _accel, _kernels as K
from adder832.tableau import StabilizerState

NB, NP = K.KERNELS["numba"], K.KERNELS["numpy"]

pytestmark = pytest.mark.skipif(not _accel.USE_NUMBA, reason="numba backend not active")


@st.composite
def tableaux(draw, n_max=9):
    n = draw(st.integers(1, n_max))
    s = StabilizerState.zero(n)
    for _ in range(draw(st.integers(0, 40))):
        g = draw(st.sampled_from(["H", "S", "X", "Z", "CX"]))
        if g == "CX":
            if n < 2:
                continue
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            s.apply("CX", [a, b])
        else:
            s.apply(g, [draw(st.integers(0, n - 1))])
    return n, s


def arrays(s):
    return s.xs.copy(), s.zs.copy(), s.r.copy()


def same(a, b):
    return all(np.array_equal(u, v) for u, v in zip(a, b))


@given(tableaux(), st.data())
def test_gate_kernels_agree(nt, data):
    n, s = nt
    a, b = arrays(s), arrays(s)
    for _ in range(10):
        g = data.draw(st.sampled_from(["h", "s", "cx", "pauli"]))
        q = data.draw(st.integers(0, n - 1))
        if g == "cx":
            if n < 2:
                continue
            t = data.draw(st.integers(0, n - 1).filter(lambda v: v != q))
            args = (q, t)
        elif g == "pauli":
            args = (q, data.draw(st.booleans()), data.draw(st.booleans()))
        else:
            args = (q,)
        NB[g](*a, *args)
        NP[g](*b, *args)
    assert same(a, b)


@given(tableaux(), st.data())
def test_measure_agrees(nt, data):
    n, s = nt
    x = data.draw(st.integers(0, (1 << n) - 1))
    z = data.draw(st.integers(0, (1 << n) - 1))
    px = np.array([x], dtype=np.uint64)  # one word suffices for n <= 64
    pz = np.array([z], dtype=np.uint64)
    pr, bit = data.draw(st.integers(0, 1)), data.draw(st.integers(0, 1))
    a, b = arrays(s), arrays(s)
    ra = NB["measure"](*a, n, px, pz, pr, bit)
    rb = NP["measure"](*b, n, px, pz, pr, bit)
    assert (int(ra[0]), bool(ra[1])) == (int(rb[0]), bool(rb[1]))
    assert same(a, b)


@given(tableaux())
def test_canonicalize_agrees(nt):
    n, s = nt
    a = tuple(v[n:2 * n].copy() for v in arrays(s))
    b = tuple(v.copy() for v in a)
    NB["canonicalize"](*a, n)
    NP["canonicalize"](*b, n)
    assert same(a, b)


@settings(max_examples=30)
@given(tableaux(n_max=7))
def test_cx_children_agree(nt):
    n, s = nt
    if n < 2:
        return
    xs, zs, r = s.canonical_arrays()
    pairs = np.array([(c, t) for c in range(n) for t in range(n) if c != t], dtype=np.int64)
    outs = []
    for ks in (NB, NP):
        ox = np.zeros((len(pairs),) + xs.shape, dtype=np.uint64)
        oz = np.zeros_like(ox)
        orr = np.zeros((len(pairs), n), dtype=np.uint8)
        ks["cx_children"](xs, zs, r, n, pairs, ox, oz, orr)
        outs.append((ox, oz, orr))
    assert same(*outs)


def test_numpy_backend_end_to_end():
    env = dict(os.environ, ADDER832_BACKEND="numpy")
    code = ("from adder832 import _accel, builders, faults;"
            "assert _accel.BACKEND == 'numpy';"
            "r = faults.audit_single_faults(builders.build('ft_adder'));"
            "print(r.counts['malicious'], r.counts['benign'])")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=600)
    assert out.returncode == 0, out.stderr
    assert out.stdout.split() == ["0", "44"]
