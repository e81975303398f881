"""numba vs numpy tableau kernels.

Times the two hot paths of the toolkit (child expansion in the BFS and
canonicalisation of a tableau) for both implementations in one process, then the
full [[8,3,2]] preparation search in a subprocess per backend (the backend is
fixed at import time by ADDER832_BACKEND).

    python benchmarks/bench_kernels.py [--reps 200] [--no-bfs]
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from adder832 import _kernels as K
from adder832.tableau import StabilizerState


def random_state(n: int, depth: int, rng: np.random.Generator) -> StabilizerState:
    st = StabilizerState.zero(n)
    for _ in range(depth):
        g = rng.integers(3)
        if g == 2:
            a, b = rng.choice(n, 2, replace=False)
            st.apply("CX", [int(a), int(b)])
        else:
            st.apply("HS"[g], [int(rng.integers(n))])
    return st


def bench(fn, reps: int) -> float:
    fn()  # warm-up, includes jit compilation
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def kernel_table(reps: int) -> None:
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>4}{'numba us':>12}{'numpy us':>12}{'ratio':>8}")
    for n in (8, 16, 32):
        xs, zs, r = random_state(n, 6 * n, rng).canonical_arrays()
        pairs = np.array([(c, t) for c in range(n) for t in range(n) if c != t], dtype=np.int64)
        ox = np.zeros((len(pairs),) + xs.shape, np.uint64)
        oz = np.zeros_like(ox)
        orr = np.zeros((len(pairs),) + r.shape, np.uint8)
        for label, name in (("cx_children", "cx_children"), ("canonicalize", "canonicalize")):
            times = []
            for backend in ("numba", "numpy"):
                k = K.KERNELS[backend][name]
                if name == "cx_children":
                    t = bench(lambda: k(xs, zs, r, n, pairs, ox, oz, orr), max(1, reps // 10))
                else:
                    t = bench(lambda: k(xs.copy(), zs.copy(), r.copy(), n), reps)
                times.append(t * 1e6)
            print(f"{label:<22}{n:>4}{times[0]:>12.1f}{times[1]:>12.1f}{times[1] / times[0]:>8.1f}")


BFS_SNIPPET = """
import time
from adder832.codes import code_832
from adder832.synth import min_cnot_prep
t = time.perf_counter()
r = min_cnot_prep(code_832().codespace_state("X"))
print(r.total_cnots, r.nodes_visited, time.perf_counter() - t)
"""


def bfs_table() -> None:
    print(f"\n{'backend':<10}{'cnots':>6}{'nodes':>10}{'seconds':>10}")
    for backend in ("numba", "numpy"):
        env = {**os.environ, "ADDER832_BACKEND": backend}
        out = subprocess.run([sys.executable, "-c", BFS_SNIPPET], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        print(f"{backend:<10}{out[0]:>6}{out[1]:>10}{float(out[2]):>10.1f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--no-bfs", action="store_true")
    a = ap.parse_args()
    if K.USE_NUMBA is False:
        sys.exit("numba is not importable; nothing to compare")
    kernel_table(a.reps)
    if not a.no_bfs:
        bfs_table()
