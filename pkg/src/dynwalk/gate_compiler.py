"""Compiling qubit circuits into walk programs.

Every gate in the catalog becomes a short sequence of timed graphs on the
2^n basis-state vertices, exact up to (at most) a global phase:

* bit flips ride full matchings: pairing every v with v XOR mask for a
  quarter period gives -i X_mask, and a 3pi/2 all-loops step retires the -i;
* diagonal gates ride loop sets: loops on the bit-set vertices for duration
  d multiply them by exp(-i d), so a phase of exp(i theta) costs 2pi - theta;
* controlled flips restrict the matching to the control-set half and pay
  the -i back with loops on that same half;
* Hadamards ride a sub-hypercube walk between two identical loop
  staircases. The staircase phases depend only on the Hamming weight on the
  target bits, and the bracket equals H on each target qubit exactly, times
  the global phase exp(-2i beta).

Qubit 0 is the leftmost wire, i.e. the most significant bit of a vertex
index. Composition order matches program order: later gates multiply on
the left.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .graph_model import (
    DynamicGraph,
    Graph,
    ParseError,
    RationalAngle,
    TimedGraph,
)

__all__ = [
    "GATE_KINDS",
    "Gate",
    "Circuit",
    "PhaseSchedule",
    "bit_value",
    "matching_graph",
    "all_loops_graph",
    "bit_set_loops_graph",
    "schedule_phases",
    "compile_hadamard_layer",
    "compile_gate",
    "compile_circuit",
    "circuit_unitary",
    "gate_unitary",
    "parse_circuit",
]

GATE_KINDS = ("X", "Y", "Z", "S", "T", "PHASE", "H", "CNOT", "HLAYER")

_QUARTER = RationalAngle(1, 4)
_HALF = RationalAngle(1, 2)
_PI = RationalAngle(1, 1)
_THREE_HALVES = RationalAngle(3, 2)
_FULL = RationalAngle(2, 1)


@dataclass(frozen=True)
class Gate:
    """One circuit element; which fields apply depends on ``kind``."""

    kind: str
    target: Optional[int] = None
    control: Optional[int] = None
    theta: Optional[RationalAngle] = None
    targets: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "HLAYER":
            if not self.targets:
                raise ValueError("HLAYER needs a nonempty targets tuple")
            if len(set(self.targets)) != len(self.targets):
                raise ValueError("HLAYER targets must be distinct")
        else:
            if self.target is None:
                raise ValueError(f"{self.kind} needs a target qubit")
        if self.kind == "CNOT":
            if self.control is None:
                raise ValueError("CNOT needs a control qubit")
            if self.control == self.target:
                raise ValueError("CNOT control and target must differ")
        if self.kind == "PHASE":
            if self.theta is None:
                raise ValueError("PHASE needs a theta angle")
            if self.theta.as_fraction() >= 2:
                raise ValueError("PHASE theta must lie in [0, 2pi)")


@dataclass(frozen=True)
class Circuit:
    """A gate list on a fixed number of qubits."""

    n_qubits: int
    gates: Tuple[Gate, ...]

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for index, gate in enumerate(self.gates):
            for q in _gate_qubits(gate):
                if not (0 <= q < self.n_qubits):
                    raise ValueError(f"gate {index} touches qubit {q}, out of range")

    @property
    def n_vertices(self) -> int:
        return 2 ** self.n_qubits


@dataclass(frozen=True)
class PhaseSchedule:
    """A per-vertex phase target and the staircase realizing it."""

    phases: Tuple[Tuple[int, RationalAngle], ...]
    steps: Tuple[TimedGraph, ...]

    def total_time(self) -> RationalAngle:
        total = Fraction(0)
        for step in self.steps:
            total += step.duration.as_fraction()
        return RationalAngle.from_fraction(total)


def _gate_qubits(gate: Gate) -> Tuple[int, ...]:
    if gate.kind == "HLAYER":
        return tuple(gate.targets or ())
    if gate.kind == "CNOT":
        return (gate.control, gate.target)  # type: ignore[return-value]
    return (gate.target,)  # type: ignore[return-value]


def bit_value(qubit: int, n_qubits: int) -> int:
    """Bitmask of one qubit in a vertex index; qubit 0 is the leftmost."""
    if not (0 <= qubit < n_qubits):
        raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
    return 1 << (n_qubits - 1 - qubit)


def matching_graph(n_vertices: int, flip_mask: int) -> Graph:
    """Perfect matching pairing every vertex v with v XOR flip_mask."""
    if not (0 < flip_mask < n_vertices):
        raise ValueError(f"flip mask {flip_mask} out of range")
    edges = {(v, v ^ flip_mask) for v in range(n_vertices) if v < v ^ flip_mask}
    return Graph.make(n_vertices, edges)


def all_loops_graph(n_vertices: int) -> Graph:
    return Graph.make(n_vertices, loops=range(n_vertices))


def bit_set_loops_graph(n_vertices: int, bit_mask: int) -> Graph:
    """Loops on every vertex whose index has bit_mask set."""
    return Graph.make(n_vertices, loops=(v for v in range(n_vertices) if v & bit_mask))


def schedule_phases(phases: Mapping[int, RationalAngle], n_vertices: int) -> PhaseSchedule:
    """Loop staircase applying exp(-i theta_v) to each vertex v.

    Emits one loop graph per distinct nonzero phase, nested by threshold in
    descending order, so the total time equals the largest phase. That is
    optimal: every vertex holding the maximum phase must sit in loop graphs
    for at least that long. Phases must lie in [0, 2pi); anything else is a
    caller bug and raises ValueError.
    """
    cleaned: Dict[int, RationalAngle] = {}
    for vertex, angle in phases.items():
        if not (0 <= vertex < n_vertices):
            raise ValueError(f"vertex {vertex} out of range")
        if angle.as_fraction() >= 2:
            raise ValueError(f"phase {angle} for vertex {vertex} not reduced below 2pi")
        if not angle.is_zero:
            cleaned[vertex] = angle
    thresholds = sorted({angle for angle in cleaned.values()}, reverse=True)
    steps = []
    for index, level in enumerate(thresholds):
        loops = frozenset(v for v, angle in cleaned.items() if angle >= level)
        lower = thresholds[index + 1] if index + 1 < len(thresholds) else RationalAngle.zero()
        steps.append(TimedGraph(Graph(n_vertices, loops=loops), level - lower))
    phase_items = tuple(sorted(cleaned.items()))
    return PhaseSchedule(phase_items, tuple(steps))


def _choose_beta(weight_range: int) -> Fraction:
    """Bracket phase beta (in pi units) minimizing the staircase height.

    The staircase phase for Hamming weight h is (beta - h/2) mod 2. Beta
    ranges over quarter-turn multiples because the matching condition only
    fixes it up to the i^h structure; smaller beta wins ties so the choice
    is deterministic.
    """
    best: Optional[Tuple[Fraction, Fraction]] = None
    for beta in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2)):
        height = max((beta - Fraction(h, 2)) % 2 for h in range(weight_range + 1))
        if best is None or (height, beta) < best:
            best = (height, beta)
    assert best is not None
    return best[1]


def compile_hadamard_layer(targets: Iterable[int], n_qubits: int) -> DynamicGraph:
    """Walk program equal to H on each target qubit, up to a global phase.

    Structure: staircase, sub-hypercube walk, identical staircase. The walk
    runs on the edges flipping any single target bit for time k*pi/4 (k
    targets, spectral norm k), giving ((I - iX)/sqrt(2)) per target. The
    staircases supply the diagonal conjugation diag(1, i) per target qubit
    plus the bracket phase: per-vertex phase (beta - h(v) pi/2) mod 2pi,
    where h counts set target bits. The result is exp(-2i beta) H on the
    targets, exactly.
    """
    order = sorted(set(targets))
    if not order:
        raise ValueError("need at least one target qubit")
    n = 2 ** n_qubits
    masks = [bit_value(q, n_qubits) for q in order]
    union = 0
    for mask in masks:
        union |= mask

    beta = _choose_beta(len(order))
    phase_map = {
        v: RationalAngle.from_fraction((beta - Fraction((v & union).bit_count(), 2)) % 2)
        for v in range(n)
    }
    stair = schedule_phases(phase_map, n).steps

    edges = {(v, v ^ mask) for mask in masks for v in range(n) if v < v ^ mask}
    walk = TimedGraph(Graph.make(n, edges), RationalAngle(len(order), 4))
    return DynamicGraph(n, tuple(stair) + (walk,) + tuple(stair))


def _single_qubit_steps(gate: Gate, n_qubits: int) -> Tuple[TimedGraph, ...]:
    n = 2 ** n_qubits
    mask = bit_value(gate.target, n_qubits)  # type: ignore[arg-type]
    if gate.kind == "X":
        return (
            TimedGraph(matching_graph(n, mask), _HALF),
            TimedGraph(all_loops_graph(n), _THREE_HALVES),
        )
    if gate.kind == "Y":
        # loops pi after the matching: diag(1,-1) . (-i X) = Y with no phase
        return (
            TimedGraph(matching_graph(n, mask), _HALF),
            TimedGraph(bit_set_loops_graph(n, mask), _PI),
        )
    if gate.kind in ("Z", "S", "T", "PHASE"):
        theta = {
            "Z": _PI,
            "S": _THREE_HALVES,
            "T": RationalAngle(7, 4),
            "PHASE": (_FULL - gate.theta) % _FULL if gate.theta else RationalAngle.zero(),
        }[gate.kind]
        if gate.kind == "PHASE" and gate.theta is not None and gate.theta.is_zero:
            return ()
        return (TimedGraph(bit_set_loops_graph(n, mask), theta),)
    raise AssertionError(f"not a single-qubit catalog gate: {gate.kind}")


def _gate_steps(gate: Gate, n_qubits: int) -> Tuple[TimedGraph, ...]:
    n = 2 ** n_qubits
    if gate.kind == "H":
        return compile_hadamard_layer((gate.target,), n_qubits).steps
    if gate.kind == "HLAYER":
        return compile_hadamard_layer(gate.targets or (), n_qubits).steps
    if gate.kind == "CNOT":
        control_mask = bit_value(gate.control, n_qubits)  # type: ignore[arg-type]
        target_mask = bit_value(gate.target, n_qubits)  # type: ignore[arg-type]
        edges = {
            (v, v ^ target_mask)
            for v in range(n)
            if v & control_mask and v < v ^ target_mask
        }
        return (
            TimedGraph(Graph.make(n, edges), _HALF),
            TimedGraph(bit_set_loops_graph(n, control_mask), _THREE_HALVES),
        )
    return _single_qubit_steps(gate, n_qubits)


def compile_gate(gate: Gate, n_qubits: int) -> DynamicGraph:
    """Walk program for one gate; exact up to a documented global phase.

    X, Y, Z, S, T, PHASE and CNOT compile with global phase 1. H and HLAYER
    compile to exp(-2i beta) times the gate (a single H comes out as -H).
    """
    return DynamicGraph(2 ** n_qubits, _gate_steps(gate, n_qubits))


def compile_circuit(circuit: Circuit, parallel_hadamards: bool = False) -> DynamicGraph:
    """Concatenate gate programs in circuit order.

    With ``parallel_hadamards``, maximal runs of adjacent H gates on
    distinct qubits fuse into one combined layer, sharing a single
    sub-hypercube walk instead of one walk per qubit. Explicit HLAYER gates
    always compile combined.
    """
    steps: list = []
    gates = list(circuit.gates)
    index = 0
    while index < len(gates):
        gate = gates[index]
        if parallel_hadamards and gate.kind == "H":
            run = [gate.target]
            stop = index + 1
            while (
                stop < len(gates)
                and gates[stop].kind == "H"
                and gates[stop].target not in run
            ):
                run.append(gates[stop].target)
                stop += 1
            steps.extend(compile_hadamard_layer(run, circuit.n_qubits).steps)
            index = stop
            continue
        steps.extend(_gate_steps(gate, circuit.n_qubits))
        index += 1
    return DynamicGraph(circuit.n_vertices, tuple(steps))


_SQRT_HALF = 1.0 / math.sqrt(2.0)
_SINGLE_QUBIT_MATRICES = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.diag([1, -1]).astype(np.complex128),
    "S": np.diag([1, 1j]).astype(np.complex128),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]).astype(np.complex128),
    "H": np.array([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]], dtype=np.complex128),
}


def gate_unitary(gate: Gate, n_qubits: int) -> np.ndarray:
    """Reference dense unitary of one gate (the compiler's oracle side)."""
    n = 2 ** n_qubits
    if gate.kind == "CNOT":
        control_mask = bit_value(gate.control, n_qubits)  # type: ignore[arg-type]
        target_mask = bit_value(gate.target, n_qubits)  # type: ignore[arg-type]
        u = np.zeros((n, n), dtype=np.complex128)
        for v in range(n):
            u[v ^ target_mask if v & control_mask else v, v] = 1.0
        return u
    if gate.kind == "HLAYER":
        factors = [
            _SINGLE_QUBIT_MATRICES["H"] if q in (gate.targets or ()) else np.eye(2)
            for q in range(n_qubits)
        ]
    else:
        if gate.kind == "PHASE":
            local = np.diag([1.0, np.exp(1j * (gate.theta.radians if gate.theta else 0.0))])
        else:
            local = _SINGLE_QUBIT_MATRICES[gate.kind]
        factors = [local if q == gate.target else np.eye(2) for q in range(n_qubits)]
    u = np.array([[1.0]], dtype=np.complex128)
    for factor in factors:
        u = np.kron(u, factor)
    return u


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Reference dense unitary of the whole circuit."""
    u = np.eye(circuit.n_vertices, dtype=np.complex128)
    for gate in circuit.gates:
        u = gate_unitary(gate, circuit.n_qubits) @ u
    return u


def _parse_angle(obj: object, path: str) -> RationalAngle:
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object with pi_num and pi_den")
    for key in obj:
        if key not in ("pi_num", "pi_den"):
            raise ParseError(f"{path}: unknown field {key!r}")
    for key in ("pi_num", "pi_den"):
        if key not in obj:
            raise ParseError(f"{path}: missing field {key!r}")
    num, den = obj["pi_num"], obj["pi_den"]
    for key, value in (("pi_num", num), ("pi_den", den)):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"{path}.{key}: expected an integer, got {value!r}")
    if num < 0 or den < 1:
        raise ParseError(f"{path}: angle must be a nonnegative fraction of pi")
    return RationalAngle(num, den)


_GATE_FIELDS = {
    "X": ("target",),
    "Y": ("target",),
    "Z": ("target",),
    "S": ("target",),
    "T": ("target",),
    "H": ("target",),
    "PHASE": ("target", "theta"),
    "CNOT": ("control", "target"),
    "HLAYER": ("targets",),
}


def _parse_gate(obj: object, n_qubits: int, path: str) -> Gate:
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected a gate object")
    kind = obj.get("kind")
    if kind not in GATE_KINDS:
        raise ParseError(f"{path}.kind: expected one of {', '.join(GATE_KINDS)}, got {kind!r}")
    fields = _GATE_FIELDS[kind]
    for key in obj:
        if key != "kind" and key not in fields:
            raise ParseError(f"{path}: unknown field {key!r} for {kind}")
    for key in fields:
        if key not in obj:
            raise ParseError(f"{path}: missing field {key!r} for {kind}")

    def qubit(key: str) -> int:
        value = obj[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"{path}.{key}: expected a qubit index, got {value!r}")
        if not (0 <= value < n_qubits):
            raise ParseError(f"{path}.{key}: qubit {value} out of range 0..{n_qubits - 1}")
        return value

    try:
        if kind == "HLAYER":
            raw = obj["targets"]
            if not isinstance(raw, list) or not raw:
                raise ParseError(f"{path}.targets: expected a nonempty list of qubits")
            seen = []
            for k, value in enumerate(raw):
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ParseError(f"{path}.targets[{k}]: expected a qubit index")
                if not (0 <= value < n_qubits):
                    raise ParseError(f"{path}.targets[{k}]: qubit {value} out of range")
                if value in seen:
                    raise ParseError(f"{path}.targets[{k}]: duplicate qubit {value}")
                seen.append(value)
            return Gate("HLAYER", targets=tuple(seen))
        if kind == "CNOT":
            return Gate("CNOT", control=qubit("control"), target=qubit("target"))
        if kind == "PHASE":
            return Gate("PHASE", target=qubit("target"), theta=_parse_angle(obj["theta"], f"{path}.theta"))
        return Gate(kind, target=qubit("target"))
    except ValueError as err:
        if isinstance(err, ParseError):
            raise
        raise ParseError(f"{path}: {err}") from err


def parse_circuit(text: str) -> Circuit:
    """Parse circuit JSON, raising ParseError with a JSON path on defects."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ParseError("$: expected a top-level object")
    for key in data:
        if key not in ("n_qubits", "gates"):
            raise ParseError(f"$: unknown field {key!r}")
    for key in ("n_qubits", "gates"):
        if key not in data:
            raise ParseError(f"$: missing field {key!r}")
    n_qubits = data["n_qubits"]
    if isinstance(n_qubits, bool) or not isinstance(n_qubits, int) or n_qubits < 1:
        raise ParseError("n_qubits: expected a positive integer")
    raw_gates = data["gates"]
    if not isinstance(raw_gates, list):
        raise ParseError("gates: expected a list")
    gates = tuple(
        _parse_gate(obj, n_qubits, f"gates[{index}]") for index, obj in enumerate(raw_gates)
    )
    return Circuit(n_qubits, gates)
