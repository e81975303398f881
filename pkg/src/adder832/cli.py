"""Command-line entry point: ``adder832 <command> [options]``.

Exit status is 0 on success, 2 on a usage error and 3 when a resource limit
(qubits, branches, search nodes) is hit.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import builders, circuits, faults, logical, runner, synth
from .codes import code_422, code_832
from .statevec import ResourceError

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE = 0, 2, 3


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _circuit(args) -> circuits.Circuit:
    name = args.circuit
    if name.endswith(".json") and Path(name).exists():
        try:
            return circuits.from_json(Path(name).read_text())
        except circuits.ParseError as exc:
            raise UsageError(f"{name}: {exc}") from None
    try:
        return builders.build(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _noise(args) -> runner.NoiseModel:
    base = runner.NoiseModel.preset(args.preset)
    kw = {"p1": base.p1, "p2": base.p2, "p_meas": base.p_meas, "p_init": base.p_init}
    for flag, field in (("p1", "p1"), ("p2", "p2"), ("pmeas", "p_meas"), ("pinit", "p_init")):
        v = getattr(args, flag)
        if v is not None:
            kw[field] = v
    try:
        return runner.NoiseModel(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_build(args) -> int:
    c = _circuit(args)
    text = circuits.to_json(c) if args.format == "json" else circuits.export_qasm_like(c)
    _emit(text, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.shots < 1:
        raise UsageError("--shots must be positive")
    rep = runner.run_shots(_circuit(args), _noise(args), args.shots, args.seed,
                           engine=args.engine, threads=args.threads)
    _emit(rep.to_csv() if args.format == "csv" else rep.to_json(timing=args.timing), args.out)
    return EXIT_OK


def cmd_faults(args) -> int:
    c = _circuit(args)
    if args.mode == "single":
        doc = faults.audit_single_faults(c).to_dict()
    else:
        doc = faults.count_malicious_pairs(c, threads=args.threads).to_dict()
    _emit(json.dumps(doc, indent=2, sort_keys=True), args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    code = {"832": code_832, "422": code_422}[args.code]()
    target = code.codespace_state(args.basis)
    try:
        res = synth.min_cnot_prep(target, accept=args.accept, node_cap=args.node_cap,
                                  free_hadamards=args.free_hadamards)
    except synth.ExhaustedError as exc:
        raise UsageError(f"{exc}; try --accept local_blocks") from None
    if args.format == "json":
        text = circuits.to_json(res.circuit)
    else:
        text = circuits.export_qasm_like(res.circuit)
    sys.stderr.write(f"cnots={res.total_cnots} (search {res.search_cnots} + endpoint "
                     f"{res.endpoint_cnots}), nodes={res.nodes_visited}\n")
    _emit(text, args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    """Structural facts of one circuit: counts, locations, layout, logical checks."""
    c = _circuit(args)
    doc = {"circuit": c.name, **c.counts(), "locations": len(faults.enumerate_locations(c))}
    if "coupling" in c.metadata:
        try:
            builders.audit_layout(c)
            doc["layout"] = "pass"
        except builders.LayoutViolation as exc:
            doc["layout"] = f"fail: {exc}"
    if "ideal_stabilizers" in c.metadata:
        chk = logical.check_branches_tableau(c)
        doc["logical_action"] = {"branches": chk.branches, "failures": chk.failures}
    _emit(json.dumps(doc, indent=2, sort_keys=True), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        n = runner.surface_resource_estimate(args.d, args.patches)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(str(n), args.out)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adder832", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("json",)):
        sp.add_argument("--circuit", default="ft_adder", help="registry name or circuit JSON file")
        sp.add_argument("--out", help="write to this path instead of stdout")
        sp.add_argument("--format", choices=fmt, default=fmt[0])
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $ADDER832_THREADS or 1)")

    sp = sub.add_parser("build", help="emit a circuit")
    common(sp, ("json", "qasm"))
    sp.set_defaults(fn=cmd_build)

    sp = sub.add_parser("simulate", help="Monte-Carlo run")
    common(sp, ("json", "csv"))
    sp.add_argument("--shots", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--preset", choices=sorted(runner.PRESETS), default="emulator-like")
    sp.add_argument("--p1", type=float)
    sp.add_argument("--p2", type=float)
    sp.add_argument("--pmeas", type=float)
    sp.add_argument("--pinit", type=float)
    sp.add_argument("--engine", choices=("auto", "frame", "trajectory"), default="auto")
    sp.add_argument("--timing", action="store_true", help="include wall time in the JSON")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("faults", help="exhaustive fault injection")
    common(sp)
    sp.add_argument("--mode", choices=("single", "pairs"), default="single")
    sp.set_defaults(fn=cmd_faults)

    sp = sub.add_parser("synth", help="minimal-CNOT preparation search")
    common(sp, ("json", "qasm"))
    sp.add_argument("--code", choices=("832", "422"), default="832")
    sp.add_argument("--basis", choices=("X", "Z"), default="X", help="logical |+...> or |0...>")
    sp.add_argument("--node-cap", type=int, default=synth.DEFAULT_NODE_CAP)
    sp.add_argument("--accept", choices=sorted(synth.ACCEPTORS), default="bell_pairs",
                    help="endpoint family the search stops at")
    sp.add_argument("--free-hadamards", action="store_true")
    sp.set_defaults(fn=cmd_synth)

    sp = sub.add_parser("audit", help="counts, layout and logical-action checks")
    common(sp)
    sp.set_defaults(fn=cmd_audit)

    sp = sub.add_parser("compare", help="surface-code qubit estimate")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--patches", type=int, default=18)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_compare)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage, 0 on --help
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"adder832: error: {exc}\n")
        return EXIT_USAGE
    except ResourceError as exc:
        sys.stderr.write(f"adder832: resource limit: {exc}\n")
        return EXIT_RESOURCE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
