"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import os
import sys
import time
from contextlib import contextmanager
from functools import lru_cache
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE, circuit  # noqa: E402
from adder832.builders import T_PATTERN  # noqa: E402
from adder832.codes import code_832, permutation_action  # noqa: E402
from adder832.faults import (audit_single_faults, clifford_branches, count_malicious_pairs,  # noqa: E402
                             enumerate_locations)
from adder832.logical import (check_branches_statevector, check_branches_tableau, is_ccz,  # noqa: E402
                              permutation_basis_map)
from adder832.runner import NoiseModel, fidelity_probe, run_shots, surface_resource_estimate  # noqa: E402
from adder832.statevec import enumerate_branches  # noqa: E402
from adder832.synth import min_cnot_prep  # noqa: E402

SHOTS = 1_000_000
P = 2e-3
THREADS = int(os.environ.get("ADDER832_THREADS", "4"))
PAIR_STRETCH = 1116
REFLECTION = (0, 3, 2, 1, 4, 7, 6, 5)


@contextmanager
def criterion(k: int, title: str):
    info: list[str] = []
    try:
        yield info
    except BaseException as exc:
        why = f"{type(exc).__name__}: {exc}".strip().splitlines()[0]
        ACCEPTANCE[k] = f"FAIL {k:>2}  {title}: {'; '.join(info)} [{why}]"
        print(ACCEPTANCE[k])
        raise
    ACCEPTANCE[k] = f"PASS {k:>2}  {title}: {'; '.join(info)}"
    print(ACCEPTANCE[k])


@lru_cache(maxsize=None)
def mc(name: str, p: float):
    return run_shots(circuit(name), NoiseModel(p2=p, p_meas=p), SHOTS, seed=2024, threads=THREADS)


def test_c01_counts():
    with criterion(1, "gate and location counts") as info:
        got = {n: (circuit(n).two_qubit_gate_count, circuit(n).measurement_count)
               for n in ("ft_preparation", "ft_adder", "nonft_adder", "planar_ft_adder")}
        locs = len(enumerate_locations(circuit("ft_adder")))
        info.append(", ".join(f"{n} {c}+{m}" for n, (c, m) in got.items()))
        info.append(f"ft_adder locations {locs}")
        assert got["ft_preparation"] == (18, 2)
        assert got["ft_adder"] == (24, 12) and locs == 36
        assert got["nonft_adder"] == (5, 3)
        assert got["planar_ft_adder"][0] == 34


def test_c02_noiseless():
    with criterion(2, "noiseless behaviour") as info:
        c = circuit("ft_adder")
        acc = err = 0.0
        dist: dict[str, float] = {}
        for b in enumerate_branches(c):
            if not c.accepted(b.records):
                continue
            acc += b.probability
            v = c.read(b.records)
            k = f"{v['a']}{v['s0']}{v['s1']}"
            dist[k] = dist.get(k, 0.0) + b.probability
        err = sum(p for k, p in dist.items() if k not in ("000", "010", "101", "110"))
        dev = max(abs(dist.get(k, 0.0) - 0.25) for k in ("000", "010", "101", "110"))
        info.append(f"accept {acc:.12f}, error {err:.1e}, max deviation from 1/4 {dev:.1e}")
        assert abs(acc - 1) < 1e-12 and err == 0 and dev < 1e-12
        prep = circuit("ft_preparation")
        code = code_832()
        ops = [s.embed(prep.n_qubits, range(8)) for s in list(code.stabilizers) + list(code.logical_x)]
        branches = [(r, st) for r, _, st in clifford_branches(prep) if prep.accepted(r)]
        bad = sum(any(st.expectation(o) != 1 for o in ops) for _, st in branches)
        info.append(f"prep: {len(branches)} accepted branches, {bad} with a generator not at +1")
        assert branches and bad == 0


def test_c03_logical_actions():
    with criterion(3, "logical actions") as info:
        assert is_ccz(T_PATTERN)
        info.append("T layer = CCZ on 8/8")
        d = permutation_action(code_832(), REFLECTION).describe()
        m = permutation_basis_map(REFLECTION)
        assert d["X2"] == "X2X3" and d["Z3"] == "Z2Z3"
        assert all(m[b] == (b[0], b[1], b[1] ^ b[2]) for b in m)
        info.append(f"reflection X2->{d['X2']}, Z3->{d['Z3']}")
        for name, label in (("hadamard_double", "HxH"), ("hadamard_single", "HxI")):
            t = check_branches_tableau(circuit(name))
            s = check_branches_statevector(circuit(name), samples=12)
            info.append(f"{label}: {t.branches} tableau + {s.branches} dense branches, "
                        f"{t.failures + s.failures} failures")
            assert t.ok and s.ok


def test_c04_single_faults():
    with criterion(4, "malicious single faults") as info:
        ft = audit_single_faults(circuit("ft_adder"))
        non = audit_single_faults(circuit("nonft_adder"))
        hd = audit_single_faults(circuit("hadamard_double"))
        hs = audit_single_faults(circuit("hadamard_single"))
        info.append(f"ft_adder {ft.counts['malicious']}/{ft.n_faults}, nonft {non.counts['malicious']}, "
                    f"HxH {hd.counts['malicious']}, HxI {hs.counts['malicious']}")
        assert ft.n_faults == 372 and ft.counts["malicious"] == 0
        assert non.counts["malicious"] >= 1
        assert hd.counts["malicious"] == hs.counts["malicious"] == 0


def test_c05_pairs():
    with criterion(5, "malicious fault pairs") as info:
        a = count_malicious_pairs(circuit("ft_adder"), threads=1)
        b = count_malicious_pairs(circuit("ft_adder"), threads=THREADS)
        info.append(f"{a.count} of {a.n_pairs} pairs (threads 1 and {THREADS} agree: {a.count == b.count}); "
                    f"stretch value {PAIR_STRETCH} {'met' if a.count == PAIR_STRETCH else 'not met'}")
        assert a.count == b.count and sorted(a.pairs) == sorted(b.pairs)
        assert 300 <= a.count <= 4000


def test_c06_monte_carlo():
    with criterion(6, f"Monte Carlo at p = {P:g}") as info:
        non, ft = mc("nonft_adder", P), mc("ft_adder", P)
        info.append(f"nonft error {non.arithmetic_error_rate:.4%}, ft retention {ft.retention:.4f}, "
                    f"ft error {ft.arithmetic_error_rate:.4%} (ratio "
                    f"{non.arithmetic_error_rate / max(ft.arithmetic_error_rate, 1e-12):.1f}x)")
        assert 0.007 <= non.arithmetic_error_rate <= 0.02
        assert 0.80 <= ft.retention <= 0.95
        assert ft.arithmetic_error_rate <= 0.002
        assert 5 * ft.arithmetic_error_rate <= non.arithmetic_error_rate


def _ratio(hi, lo):
    """Error-rate ratio and its delta-method standard error."""
    r = hi.arithmetic_error_rate / lo.arithmetic_error_rate
    rel = math.hypot(hi.stderr / hi.arithmetic_error_rate, lo.stderr / lo.arithmetic_error_rate)
    return r, r * rel


def test_c07_scaling():
    with criterion(7, "noise halving") as info:
        t0 = time.perf_counter()
        runs = {(n, p): mc(n, p) for n in ("ft_adder", "nonft_adder") for p in (P, P / 2)}
        wall = sum(r.wall_time for r in runs.values()) or (time.perf_counter() - t0)
        rf, sf = _ratio(runs["ft_adder", P], runs["ft_adder", P / 2])
        rn, sn = _ratio(runs["nonft_adder", P], runs["nonft_adder", P / 2])
        info.append(f"ft {rf:.2f}+-{sf:.2f} (want 4), nonft {rn:.3f}+-{sn:.3f} (want 2), "
                    f"{SHOTS:.0e} shots each, {wall:.0f} s")
        assert abs(rf - 4) <= 3 * sf
        assert abs(rn - 2) <= 3 * sn
        assert wall < 30 * 60


def test_c08_synthesis():
    from test_synth import _tableau, oracle_costs, stabilizer_states
    with criterion(8, "minimal-CNOT synthesis") as info:
        checked = 0
        for n in (2, 3):
            costs = oracle_costs(n)
            for k, (_, word) in stabilizer_states(n).items():
                got = min_cnot_prep(_tableau(n, word), accept="local_blocks").total_cnots
                assert got == costs[k], (n, word, got, costs[k])
                checked += 1
        res = min_cnot_prep(code_832().codespace_state("X"))
        prep = circuit("ft_preparation")
        checks = prep.two_qubit_gate_count - res.total_cnots
        info.append(f"{checked} targets match the oracle; N* = {res.total_cnots} + {checks} check CNOTs "
                    f"= {res.total_cnots + checks}")
        assert res.total_cnots == 10 and res.total_cnots + checks == 18
        assert checks == 8


def test_c09_surface():
    with criterion(9, "surface-code comparison") as info:
        n = surface_resource_estimate(2, 18)
        info.append(f"d=2, 18 patches -> {n} qubits")
        assert n == 144


def test_c10_fidelity():
    with criterion(10, "fidelity probe") as info:
        f = fidelity_probe(circuit("ft_adder"), NoiseModel(p2=P, p_meas=P), 4000, seed=7)
        info.append(f"F = {f:.5f}")
        assert f >= 0.99


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except Exception:  # already reported on its line
                failed += 1
    sys.exit(1 if failed else 0)
