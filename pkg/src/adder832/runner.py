"""Monte-Carlo execution under Pauli noise, fidelity probes and resource estimates.

Every shot draws a fault configuration from the noise model.  Shots with the
same configuration share one exact simulation, so the record distribution of
each configuration is computed once and sampled as often as it occurs.  Two
engines provide the per-configuration distributions:

``frame``
    adds up the linear fault effects and reuses the cached per-key
    distributions of :class:`~adder832.faults.FrameEngine`;
``trajectory``
    re-simulates the state vector with the faults inserted.

Both are exact, so for a fixed seed they produce identical reports.  Shots are
drawn in fixed-size blocks with one random stream per block, which keeps the
result independent of the number of worker threads.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import statevec as sv_mod
from .circuits import Circuit
from .faults import (INIT, MEASUREMENT, SINGLE_QUBIT, TWO_QUBIT, FrameEngine, UnsupportedCircuit,
                     _record_tables, arithmetic_error, fault_set, noise_locations)
from .pauli import PauliString, conjugate

REPORT_SCHEMA = "adder832.run_report/1"
BLOCK = 8192
OUTCOMES = tuple(format(i, "03b") for i in range(8))  # (a, s0, s1)
VALID_OUTCOMES = ("000", "010", "101", "110")


@dataclass(frozen=True)
class NoiseModel:
    """Independent Pauli noise: depolarizing after gates, flips on measurement and
    preparation."""

    p1: float = 0.0
    p2: float = 2e-3
    p_meas: float = 2e-3
    p_init: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_meas", "p_init"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def preset(cls, name: str) -> "NoiseModel":
        try:
            return cls(**PRESETS[name])
        except KeyError:
            raise KeyError(f"unknown noise preset {name!r}; choose from {sorted(PRESETS)}") from None

    def scaled(self, factor: float) -> "NoiseModel":
        return NoiseModel(self.p1 * factor, self.p2 * factor, self.p_meas * factor, self.p_init * factor)

    def probability(self, kind: str) -> float:
        return {TWO_QUBIT: self.p2, MEASUREMENT: self.p_meas, SINGLE_QUBIT: self.p1, INIT: self.p_init}[kind]

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == self.p2 == self.p_meas == self.p_init == 0.0


PRESETS = {
    "emulator-like": {"p1": 0.0, "p2": 2e-3, "p_meas": 2e-3, "p_init": 0.0},
    "emulator-like+p1": {"p1": 2e-5, "p2": 2e-3, "p_meas": 2e-3, "p_init": 0.0},
    "noiseless": {"p1": 0.0, "p2": 0.0, "p_meas": 0.0, "p_init": 0.0},
}


@dataclass(frozen=True)
class ShotResult:
    records: tuple[int, ...]
    accepted: bool
    a: int | None = None
    s: int | None = None

    @property
    def outcome_string(self) -> str | None:
        if self.a is None:
            return None
        return f"{self.a}{self.s & 1}{self.s >> 1}"


def decode_shot(circuit: Circuit, records: Sequence[int]) -> ShotResult:
    """Post-selection and (a, s) readout of one record string."""
    records = tuple(int(b) for b in records)
    ok = circuit.accepted(records)
    if not ok or not {"a", "s0", "s1"} <= set(circuit.readout):
        return ShotResult(records, ok)
    v = circuit.read(records)
    return ShotResult(records, True, v["a"], v["s0"] + 2 * v["s1"])


@dataclass
class RunReport:
    circuit: str
    engine: str
    shots_total: int
    shots_accepted: int
    counts: dict[str, int]
    seed: int
    noise: dict
    wall_time: float = field(default=0.0, compare=False)

    @property
    def retention(self) -> float:
        return self.shots_accepted / self.shots_total if self.shots_total else 0.0

    @property
    def errors(self) -> int:
        return sum(c for k, c in self.counts.items() if k not in VALID_OUTCOMES)

    @property
    def arithmetic_error_rate(self) -> float:
        return self.errors / self.shots_accepted if self.shots_accepted else 0.0

    @property
    def stderr(self) -> float:
        """Binomial (Wald) standard error over accepted shots."""
        n, r = self.shots_accepted, self.arithmetic_error_rate
        return float(np.sqrt(r * (1 - r) / n)) if n else 0.0

    @property
    def frequencies(self) -> dict[str, float]:
        n = self.shots_accepted
        return {k: (self.counts.get(k, 0) / n if n else 0.0) for k in OUTCOMES}

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "schema": REPORT_SCHEMA,
            "circuit": self.circuit,
            "engine": self.engine,
            "seed": self.seed,
            "noise": self.noise,
            "shots_total": self.shots_total,
            "shots_accepted": self.shots_accepted,
            "retention": self.retention,
            "counts": {k: self.counts.get(k, 0) for k in OUTCOMES},
            "frequencies": self.frequencies,
            "arithmetic_error_rate": self.arithmetic_error_rate,
            "stderr": self.stderr,
        }
        if timing:
            d["wall_time_s"] = self.wall_time
        return d

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """Rows of the results table: eight outcomes, shot total, error rate."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["outcome", "valid", "count", "frequency"])
        freqs = self.frequencies
        for k in OUTCOMES:
            w.writerow([k, int(k in VALID_OUTCOMES), self.counts.get(k, 0), f"{freqs[k]:.6f}"])
        w.writerow(["shot_total", "", self.shots_accepted, ""])
        w.writerow(["arithmetic_error_rate", "", self.errors,
                    f"{self.arithmetic_error_rate:.6f}+-{self.stderr:.6f}"])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# fault sampling
# ---------------------------------------------------------------------------
class _Sampler:
    """Per-location fault options and their probabilities."""

    def __init__(self, circuit: Circuit, noise: NoiseModel):
        locs = noise_locations(circuit, include_single_qubit=noise.p1 > 0, include_init=noise.p_init > 0)
        self.locations = [l for l in locs if noise.probability(l.kind) > 0]
        self.options = [fault_set(circuit, l) for l in self.locations]
        self.p = np.array([noise.probability(l.kind) for l in self.locations])
        self.n_opt = np.array([len(o) for o in self.options], dtype=np.int64)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """(n, L) array: 0 for no fault, otherwise 1 + option index."""
        L = len(self.locations)
        if L == 0:
            return np.zeros((n, 0), dtype=np.int64)
        hit = rng.random((n, L)) < self.p
        which = (rng.random((n, L)) * self.n_opt).astype(np.int64)
        return np.where(hit, which + 1, 0)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _configurations(choice: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique fault configurations of a block and the inverse index."""
    if choice.shape[1] == 0:
        return np.zeros((1, 0), dtype=np.int64), np.zeros(choice.shape[0], dtype=np.int64)
    return np.unique(choice, axis=0, return_inverse=True)


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------
class _TrajectoryEngine:
    name = "trajectory"

    def __init__(self, circuit: Circuit, sampler: _Sampler):
        self.circuit = circuit
        self.sampler = sampler
        self._cache: dict[tuple, np.ndarray] = {}
        try:
            sv_mod.deferred_order(circuit)
            self._deferred = True
        except ValueError:
            self._deferred = False

    def distribution(self, config: np.ndarray) -> np.ndarray:
        key = tuple(int(v) for v in config)
        d = self._cache.get(key)
        if d is None:
            faults = [self.sampler.options[i][v - 1].as_injection() for i, v in enumerate(key) if v]
            if self._deferred:
                d = sv_mod.outcome_distribution(self.circuit, faults)
            else:
                d = np.zeros(1 << self.circuit.n_records)
                for b in sv_mod.enumerate_branches(self.circuit, faults):
                    d[sum(bit << r for r, bit in enumerate(b.records))] += b.probability
            self._cache[key] = d
        return d

    def sample(self, rng: np.random.Generator, config: np.ndarray, count: int) -> np.ndarray:
        d = self.distribution(config)
        return rng.choice(d.size, size=count, p=d / d.sum())


class _FrameEngine:
    name = "frame"

    def __init__(self, circuit: Circuit, sampler: _Sampler):
        self.engine = FrameEngine(circuit)
        if self.engine.layer is None and circuit.metadata.get("output_check") is None:
            self.engine._clifford_dist  # noqa: B018 - fault-free distribution, cached
        eff = [[self.engine.effect(f) for f in opts] for opts in sampler.options]
        self.keys = [np.array([e.key for e in row], dtype=np.int64) for row in eff]
        self.masks = [np.array([e.mask for e in row], dtype=np.int64) for row in eff]

    def _dist(self, key: int) -> np.ndarray:
        if self.engine.layer is None:
            return self.engine._clifford_dist
        return self.engine.distribution(key)

    def sample(self, rng: np.random.Generator, config: np.ndarray, count: int) -> np.ndarray:
        key = mask = 0
        for i, v in enumerate(config):
            if v:
                key ^= int(self.keys[i][v - 1])
                mask ^= int(self.masks[i][v - 1])
        d = self._dist(key)
        # sample the shifted distribution itself so both engines see the same p
        d = d[np.arange(d.size) ^ mask]
        return rng.choice(d.size, size=count, p=d / d.sum())


def _make_engine(name: str, circuit: Circuit, sampler: _Sampler):
    if name == "trajectory":
        return _TrajectoryEngine(circuit, sampler)
    if name == "frame":
        return _FrameEngine(circuit, sampler)
    if name == "auto":
        try:
            return _FrameEngine(circuit, sampler)
        except UnsupportedCircuit:
            return _TrajectoryEngine(circuit, sampler)
    raise ValueError(f"unknown engine {name!r}")


def _default_threads() -> int:
    return max(1, int(os.environ.get("ADDER832_THREADS", "1")))


def run_shots(circuit: Circuit, noise: NoiseModel | None = None, n_shots: int = 10_000,
              seed: int = 0, engine: str = "auto", threads: int | None = None) -> RunReport:
    """Sample ``n_shots`` noisy executions and tally accepted outcomes."""
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    if circuit.n_qubits > sv_mod.MAX_QUBITS:
        raise sv_mod.ResourceError(f"circuit has {circuit.n_qubits} qubits; the limit is {sv_mod.MAX_QUBITS}")
    noise = noise or NoiseModel()
    t0 = time.perf_counter()
    sampler = _Sampler(circuit, noise)
    eng = _make_engine(engine, circuit, sampler)
    acc, err = _record_tables(circuit)
    code = _outcome_codes(circuit)
    n_blocks = -(-n_shots // BLOCK)

    def block(b: int) -> np.ndarray:
        rng = _block_rng(seed, b)
        n = min(BLOCK, n_shots - b * BLOCK)
        configs, inv = _configurations(sampler.draw(rng, n))
        tally = np.zeros(9, dtype=np.int64)  # 8 outcomes then rejected
        for c in range(len(configs)):
            count = int(np.count_nonzero(inv == c))
            recs = eng.sample(rng, configs[c], count)
            ok = acc[recs]
            tally[8] += int(np.count_nonzero(~ok))
            tally[:8] += np.bincount(code[recs[ok]], minlength=8)
        return tally

    threads = threads or _default_threads()
    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(block, range(n_blocks)))
    else:
        parts = [block(b) for b in range(n_blocks)]
    tot = np.sum(parts, axis=0)
    counts = {k: int(tot[i]) for i, k in enumerate(OUTCOMES)}
    return RunReport(circuit.name, eng.name, n_shots, n_shots - int(tot[8]), counts, seed,
                     asdict(noise), time.perf_counter() - t0)


def _outcome_codes(circuit: Circuit) -> np.ndarray:
    """Outcome index ``a*4 + s0*2 + s1`` of every record string (0 without readout)."""
    m = circuit.n_records
    r = np.arange(1 << m, dtype=np.int64)
    if not {"a", "s0", "s1"} <= set(circuit.readout):
        return np.zeros(r.size, dtype=np.int64)
    out = np.zeros(r.size, dtype=np.int64)
    for weight, k in ((4, "a"), (2, "s0"), (1, "s1")):
        par = np.zeros(r.size, dtype=np.int64)
        for rec in circuit.readout[k]:
            par ^= (r >> rec) & 1
        out += weight * par
    return out


# ---------------------------------------------------------------------------
# fidelity probe
# ---------------------------------------------------------------------------
def _projected(state: sv_mod.StateVector, ops: Sequence[PauliString]) -> np.ndarray:
    v = state.amps.copy()
    for p in ops:
        w = sv_mod.StateVector(state.n, v.copy()).apply_pauli(p).amps
        v = (v + w) / 2
    return v


def fidelity_probe(circuit: Circuit, noise: NoiseModel | None = None, n_trajectories: int = 2000,
                   seed: int = 0, cut: str | int | None = None) -> float:
    """Accepted-trajectory mean fidelity of the state at ``cut`` with the ideal state.

    ``cut`` is a region name or instruction index (default: the circuit's
    ``fidelity_cut`` metadata).  Records available before the cut are
    post-selected on; later detection is represented by projecting the data
    onto the codespace and the unmeasured ancillas onto their ideal state.  The
    result is ``sum |<ideal|P psi>|^2 / sum ||P psi||^2`` over trajectories and
    branches, weighted by branch probability.
    """
    noise = noise or NoiseModel()
    cut = cut if cut is not None else circuit.metadata.get("fidelity_cut")
    if cut is None:
        raise ValueError("circuit declares no fidelity cut")
    stop = circuit.region(cut).start if isinstance(cut, str) else int(cut)
    ideal_br = [b for b in sv_mod.enumerate_branches(circuit, stop=stop) if b.probability > 0]
    ideal = ideal_br[0].state.amps / ideal_br[0].state.norm()
    early = [p for p in circuit.postselect if all(r < len(ideal_br[0].records) for r in p.records)]
    projector = _cut_projector(circuit, stop, ideal)

    sampler = _Sampler(circuit, noise)
    keep = [i for i, l in enumerate(sampler.locations) if l.index < stop]
    rng = _block_rng(seed, 0)
    choice = sampler.draw(rng, n_trajectories)[:, keep]
    configs, inv = _configurations(choice)
    num = den = 0.0
    for c in range(len(configs)):
        weight = int(np.count_nonzero(inv == c))
        faults = [sampler.options[keep[i]][v - 1].as_injection() for i, v in enumerate(configs[c]) if v]
        f_num = f_den = 0.0
        for b in sv_mod.enumerate_branches(circuit, faults, stop=stop):
            if not all(p.holds(b.records) for p in early):
                continue
            v = _projected(b.state, projector)
            f_den += b.probability * np.vdot(v, v).real / b.state.norm() ** 2
            f_num += b.probability * abs(np.vdot(ideal, v)) ** 2 / b.state.norm() ** 2
        num += weight * f_num
        den += weight * f_den
    return num / den if den > 0 else 0.0


def _cut_projector(circuit: Circuit, stop: int, ideal: np.ndarray) -> list[PauliString]:
    """Code stabilizers (pushed to the cut) plus single-qubit stabilizers of idle ancillas."""
    from .codes import code_832

    # relabellings used here are code automorphisms, so the group is unchanged
    n = circuit.n_qubits
    sites = circuit.metadata.get("code_sites", list(range(8)))
    ops = [s.embed(n, sites) for s in code_832().stabilizers]
    ref = sv_mod.StateVector(n, ideal.copy())
    for q in sorted(set(range(n)) - set(sites)):
        for letter in "ZX":
            p = PauliString.single(n, q, letter)
            if abs(ref.expectation(p) - 1) < 1e-9:
                ops.append(p)
                break
    return ops


# ---------------------------------------------------------------------------
# resources and Pauli propagation
# ---------------------------------------------------------------------------
def surface_resource_estimate(d: int, patches: int) -> int:
    """Physical qubits for ``patches`` rotated surface-code patches of distance ``d``
    (data plus measurement qubits, about ``2 d^2`` each)."""
    if d < 1 or patches < 1:
        raise ValueError("distance and patch count must be positive")
    return patches * 2 * d * d


def propagate_pauli(circuit: Circuit, pauli: PauliString, start: int = -1, stop: int | None = None) -> PauliString:
    """Conjugate ``pauli`` (inserted after instruction ``start``) through the Clifford
    gates and relabellings that follow; measurements leave it unchanged."""
    from .circuits import Gate, Permute

    end = len(circuit.instructions) if stop is None else stop
    p = pauli
    for ins in circuit.instructions[start + 1:end]:
        if isinstance(ins, Gate) and not ins.condition:
            p = conjugate(p, ins.name, ins.qubits)
        elif isinstance(ins, Permute):
            p = p.permuted(ins.perm)
    return p


__all__ = ["NoiseModel", "PRESETS", "ShotResult", "RunReport", "decode_shot", "run_shots",
           "fidelity_probe", "surface_resource_estimate", "propagate_pauli", "arithmetic_error"]
