"""Command-line front end.

Subcommands:

* ``simulate``: run a walk file on a basis state or an amplitude file and
  print the final amplitudes.
* ``unitary``: print (or dump to CSV) the walk's total unitary.
* ``optimize``: simplify a walk file under the rewrite rules and write the
  result, optionally with a JSON report of every accepted rewrite.
* ``compile``: turn a circuit file into a walk file, verifying the result
  against the circuit's reference unitary before writing.
* ``equiv``: compare two walk files up to global phase.
* ``stats``: per-step structure, norms, periods and totals of a walk file.

Exit codes: 0 success, 1 verification or equivalence failure, 2 malformed
input (bad file, bad JSON, bad flag values).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .gate_compiler import circuit_unitary, compile_circuit, parse_circuit
from .graph_model import (
    DynamicGraph,
    ParseError,
    adjacency_matrix,
    parse_dynamic_graph,
    period,
    serialize_dynamic_graph,
)
from .numerics import phase_distance, spectral_norm
from .rewrite_optimizer import ALL_RULES, optimize
from .walk_engine import evolve_state, total_unitary

EQUIVALENCE_TOLERANCE = 1e-9

__all__ = [
    "CommandResult",
    "cmd_simulate",
    "cmd_unitary",
    "cmd_optimize",
    "cmd_compile",
    "cmd_equiv",
    "cmd_stats",
    "main",
]


@dataclass(frozen=True)
class CommandResult:
    """Exit code plus the lines to print on stdout."""

    exit_code: int
    lines: Tuple[str, ...]


class CliInputError(Exception):
    """Anything wrong with the user's files or flags; maps to exit 2."""


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as err:
        raise CliInputError(f"cannot read {path}: {err.strerror or err}") from err


def _load_walk(path: str) -> DynamicGraph:
    try:
        return parse_dynamic_graph(_read_text(path))
    except ParseError as err:
        raise CliInputError(f"{path}: {err}") from err


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as err:
        raise CliInputError(f"cannot write {path}: {err.strerror or err}") from err


def _basis_label(index: int, n_vertices: int) -> str:
    if n_vertices >= 2 and n_vertices & (n_vertices - 1) == 0:
        width = n_vertices.bit_length() - 1
        return format(index, f"0{width}b")
    return str(index)


def _initial_state(text: str, n_vertices: int) -> np.ndarray:
    """Decode --state: a bitstring label, an integer index, or a JSON file."""
    state = np.zeros(n_vertices, dtype=np.complex128)
    label = text.strip()
    bits = re.fullmatch(r"\|?([01]+)>?", label)
    if bits and n_vertices == 2 ** len(bits.group(1)):
        state[int(bits.group(1), 2)] = 1.0
        return state
    if re.fullmatch(r"\d+", label):
        index = int(label)
        if index >= n_vertices:
            raise CliInputError(f"basis index {index} out of range 0..{n_vertices - 1}")
        state[index] = 1.0
        return state
    if os.path.exists(label):
        try:
            data = json.loads(_read_text(label))
        except json.JSONDecodeError as err:
            raise CliInputError(f"{label}: invalid JSON: {err}") from err
        if not isinstance(data, list) or len(data) != n_vertices:
            raise CliInputError(f"{label}: expected a list of {n_vertices} [re, im] pairs")
        for k, pair in enumerate(data):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
            ):
                raise CliInputError(f"{label}: entry {k} is not an [re, im] pair")
            state[k] = complex(pair[0], pair[1])
        return state
    raise CliInputError(f"--state {text!r} is neither a basis label nor a readable file")


def _format_amplitude(value: complex) -> str:
    return f"{value.real:.12g}{value.imag:+.12g}i"


def cmd_simulate(args: argparse.Namespace) -> CommandResult:
    walk = _load_walk(args.walk)
    state = _initial_state(args.state, walk.n_vertices)
    final = evolve_state(walk, state)
    lines = [
        f"|{_basis_label(i, walk.n_vertices)}>  {_format_amplitude(amp)}"
        for i, amp in enumerate(final)
    ]
    norm = float(np.linalg.norm(final))
    lines.append(f"norm {norm:.12g} (deviation {abs(norm - 1.0):.3e})")
    return CommandResult(0, tuple(lines))


def _unitary_rows(u: np.ndarray) -> List[str]:
    return [
        ",".join(f"{cell.real:.12f}{cell.imag:+.12f}i" for cell in row)
        for row in u
    ]


def cmd_unitary(args: argparse.Namespace) -> CommandResult:
    walk = _load_walk(args.walk)
    u = total_unitary(walk)
    rows = _unitary_rows(u)
    if args.csv:
        _write_text(args.csv, "\n".join(rows) + "\n")
        return CommandResult(0, (f"wrote {u.shape[0]}x{u.shape[1]} unitary to {args.csv}",))
    return CommandResult(0, tuple(rows))


def _parse_passes(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    names = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [name for name in names if name not in ALL_RULES]
    if unknown:
        raise CliInputError(
            f"unknown passes {', '.join(unknown)}; available: {', '.join(ALL_RULES)}"
        )
    if not names:
        raise CliInputError("--passes needs at least one rule name")
    return names


def cmd_optimize(args: argparse.Namespace) -> CommandResult:
    walk = _load_walk(args.walk)
    passes = _parse_passes(args.passes)
    simplified, report = optimize(walk, passes=passes, max_iterations=args.max_iter)
    distance = phase_distance(total_unitary(walk), total_unitary(simplified))
    _write_text(args.output, serialize_dynamic_graph(simplified))
    if args.report:
        payload = report.to_dict()
        payload["input"] = args.walk
        payload["output"] = args.output
        payload["phase_distance"] = distance
        _write_text(args.report, json.dumps(payload, indent=2) + "\n")
    lines = [
        f"graphs {report.initial_count} -> {report.final_count}",
        f"time {report.initial_time} -> {report.final_time}"
        f" ({report.initial_time.radians:.4f} -> {report.final_time.radians:.4f})",
        f"rewrites applied: {len(report.rewrites)}",
        f"phase distance to input: {distance:.3e}",
        f"wrote {args.output}",
    ]
    if report.rejected or distance >= EQUIVALENCE_TOLERANCE:
        for item in report.rejected:
            lines.append(f"rejected: {item}")
        lines.append("verification FAILED")
        return CommandResult(1, tuple(lines))
    return CommandResult(0, tuple(lines))


def cmd_compile(args: argparse.Namespace) -> CommandResult:
    try:
        circuit = parse_circuit(_read_text(args.circuit))
    except ParseError as err:
        raise CliInputError(f"{args.circuit}: {err}") from err
    walk = compile_circuit(circuit, parallel_hadamards=args.parallel_h)
    distance = phase_distance(total_unitary(walk), circuit_unitary(circuit))
    lines = [
        f"{len(circuit.gates)} gates -> {walk.graph_count} graphs,"
        f" total time {walk.total_time()} ({walk.total_time().radians:.4f})",
        f"phase distance to circuit unitary: {distance:.3e}",
    ]
    if distance >= EQUIVALENCE_TOLERANCE:
        return CommandResult(1, tuple(lines) + ("verification FAILED, not writing output",))
    _write_text(args.output, serialize_dynamic_graph(walk))
    return CommandResult(0, tuple(lines) + (f"wrote {args.output}",))


def cmd_equiv(args: argparse.Namespace) -> CommandResult:
    first = _load_walk(args.first)
    second = _load_walk(args.second)
    if first.n_vertices != second.n_vertices:
        raise CliInputError(
            f"vertex counts differ: {first.n_vertices} vs {second.n_vertices}"
        )
    distance = phase_distance(total_unitary(first), total_unitary(second))
    verdict = "equivalent" if distance < EQUIVALENCE_TOLERANCE else "NOT equivalent"
    lines = (f"phase distance {distance:.3e}", verdict)
    return CommandResult(0 if distance < EQUIVALENCE_TOLERANCE else 1, lines)


def cmd_stats(args: argparse.Namespace) -> CommandResult:
    walk = _load_walk(args.walk)
    lines = [f"vertices: {walk.n_vertices}", f"graphs: {walk.graph_count}"]
    total = walk.total_time()
    lines.append(f"total time: {total} ({total.radians:.4f})")
    for index, step in enumerate(walk.steps):
        norm = spectral_norm(adjacency_matrix(step.graph))
        p = period(step.graph)
        lines.append(
            f"step {index}: {len(step.graph.edges)} edges, {len(step.graph.loops)} loops,"
            f" time {step.duration} ({step.duration.radians:.4f}),"
            f" norm {norm:.6f}, period {p}"
        )
    return CommandResult(0, tuple(lines))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynwalk",
        description="Simulate, compile and simplify continuous-time walk programs on dynamic graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a walk on an initial state")
    p.add_argument("walk", help="walk JSON file")
    p.add_argument(
        "--state",
        default="0",
        help="basis label (bits or index) or JSON amplitude file; default vertex 0",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("unitary", help="print or dump the total unitary")
    p.add_argument("walk", help="walk JSON file")
    p.add_argument("--csv", help="write the matrix to this CSV file instead of stdout")
    p.set_defaults(func=cmd_unitary)

    p = sub.add_parser("optimize", help="simplify a walk under the rewrite rules")
    p.add_argument("walk", help="walk JSON file")
    p.add_argument("-o", "--output", required=True, help="output walk JSON file")
    p.add_argument("--passes", help="comma-separated rule subset (default: all)")
    p.add_argument("--max-iter", type=int, help="cap on accepted rewrites")
    p.add_argument("--report", help="write a JSON rewrite report here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compile", help="compile a circuit file into a walk")
    p.add_argument("circuit", help="circuit JSON file")
    p.add_argument("-o", "--output", required=True, help="output walk JSON file")
    p.add_argument(
        "--parallel-h",
        action="store_true",
        help="fuse adjacent H gates on distinct qubits into combined layers",
    )
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("equiv", help="compare two walks up to global phase")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("stats", help="describe a walk file")
    p.add_argument("walk", help="walk JSON file")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        result: CommandResult = args.func(args)
    except CliInputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    for line in result.lines:
        print(line)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
