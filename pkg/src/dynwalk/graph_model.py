"""Graphs, exact durations, and the dynamic-graph container.

A walk program is a finite sequence of undirected graphs (self-loops
allowed) on a fixed vertex set, each paired with a duration. Durations in
this package are exact nonnegative rational multiples of pi, kept as
integer pairs until a unitary is actually evaluated. That exactness is what
lets the rewrite passes cancel full periods and compare costs without
accumulating float error.

The JSON interchange format mirrors the in-memory model:

    {"n_vertices": 4,
     "sequence": [{"edges": [[0, 1]], "loops": [2], "time": {"pi_num": 1, "pi_den": 2}}]}

``parse_dynamic_graph`` validates aggressively and reports the JSON path of
the offending element, since hand-edited walk files are the normal input.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "RationalAngle",
    "Graph",
    "TimedGraph",
    "DynamicGraph",
    "Period",
    "ParseError",
    "adjacency_matrix",
    "support",
    "supports_disjoint",
    "period",
    "reduce_time",
    "parse_dynamic_graph",
    "serialize_dynamic_graph",
    "rationalize",
]

RationalLike = Union["RationalAngle", Fraction, int]


@total_ordering
@dataclass(frozen=True)
class RationalAngle:
    """An exact nonnegative angle num*pi/den, always stored reduced."""

    num: int
    den: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.num, int) or not isinstance(self.den, int):
            raise TypeError("RationalAngle components must be ints")
        if self.den == 0:
            raise ValueError("zero denominator")
        num, den = self.num, self.den
        if den < 0:
            num, den = -num, -den
        if num < 0:
            raise ValueError(f"negative angle {num}*pi/{den}")
        g = math.gcd(num, den)
        if g > 1:
            num //= g
            den //= g
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def zero(cls) -> "RationalAngle":
        return cls(0, 1)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "RationalAngle":
        return cls(value.numerator, value.denominator)

    @property
    def is_zero(self) -> bool:
        return self.num == 0

    def as_fraction(self) -> Fraction:
        """The multiple of pi as an exact fraction."""
        return Fraction(self.num, self.den)

    @property
    def radians(self) -> float:
        return math.pi * self.num / self.den

    def __float__(self) -> float:
        return self.radians

    def __add__(self, other: "RationalAngle") -> "RationalAngle":
        return RationalAngle.from_fraction(self.as_fraction() + other.as_fraction())

    def __sub__(self, other: "RationalAngle") -> "RationalAngle":
        value = self.as_fraction() - other.as_fraction()
        if value < 0:
            raise ValueError(f"angle subtraction went negative: {self} - {other}")
        return RationalAngle.from_fraction(value)

    def __mod__(self, modulus: "RationalAngle") -> "RationalAngle":
        if modulus.is_zero:
            return RationalAngle.zero()
        return RationalAngle.from_fraction(self.as_fraction() % modulus.as_fraction())

    def scaled(self, factor: Union[Fraction, int]) -> "RationalAngle":
        value = self.as_fraction() * factor
        if value < 0:
            raise ValueError("scaling produced a negative angle")
        return RationalAngle.from_fraction(value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalAngle):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __lt__(self, other: "RationalAngle") -> bool:
        return self.as_fraction() < other.as_fraction()

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __str__(self) -> str:
        if self.num == 0:
            return "0"
        head = "π" if self.num == 1 else f"{self.num}π"
        return head if self.den == 1 else f"{head}/{self.den}"

    def __repr__(self) -> str:
        return f"RationalAngle({self.num}, {self.den})"


TWO_PI = RationalAngle(2, 1)


def _normalize_edge(pair: Sequence[int]) -> Tuple[int, int]:
    a, b = pair
    if a == b:
        raise ValueError(f"edge ({a}, {b}) joins a vertex to itself; use a loop")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Graph:
    """An undirected graph with optional self-loops on range(n_vertices).

    Edges are stored as sorted pairs (i, j) with i < j. The empty graph
    (no edges, no loops) is legal and acts as a hold step of whatever
    duration it is given: its adjacency matrix is zero, so nothing moves.
    """

    n_vertices: int
    edges: frozenset = field(default_factory=frozenset)
    loops: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n_vertices < 0:
            raise ValueError("negative vertex count")
        for pair in self.edges:
            i, j = pair
            if not (0 <= i < j < self.n_vertices):
                raise ValueError(f"edge {pair} out of range for {self.n_vertices} vertices")
        for v in self.loops:
            if not (0 <= v < self.n_vertices):
                raise ValueError(f"loop {v} out of range for {self.n_vertices} vertices")

    @classmethod
    def make(
        cls,
        n_vertices: int,
        edges: Iterable[Sequence[int]] = (),
        loops: Iterable[int] = (),
    ) -> "Graph":
        return cls(
            n_vertices,
            frozenset(_normalize_edge(pair) for pair in edges),
            frozenset(int(v) for v in loops),
        )

    @property
    def is_empty(self) -> bool:
        return not self.edges and not self.loops

    @property
    def is_loops_only(self) -> bool:
        return not self.edges and bool(self.loops)

    def union(self, other: "Graph") -> "Graph":
        if self.n_vertices != other.n_vertices:
            raise ValueError("vertex sets differ")
        return Graph(self.n_vertices, self.edges | other.edges, self.loops | other.loops)

    def degree_free(self, vertex: int) -> bool:
        """True when no edge of this graph touches the vertex (loops ignored)."""
        return all(vertex not in pair for pair in self.edges)

    def sorted_edges(self) -> list:
        return sorted(self.edges)

    def sorted_loops(self) -> list:
        return sorted(self.loops)


@dataclass(frozen=True)
class TimedGraph:
    """One walk step: evolve under graph for an exact duration."""

    graph: Graph
    duration: RationalAngle


@dataclass(frozen=True)
class DynamicGraph:
    """An ordered sequence of timed graphs on a shared vertex set."""

    n_vertices: int
    steps: Tuple[TimedGraph, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        for index, step in enumerate(self.steps):
            if step.graph.n_vertices != self.n_vertices:
                raise ValueError(
                    f"step {index} has {step.graph.n_vertices} vertices, expected {self.n_vertices}"
                )

    @classmethod
    def from_steps(cls, n_vertices: int, steps: Iterable[TimedGraph]) -> "DynamicGraph":
        return cls(n_vertices, tuple(steps))

    def total_time(self) -> RationalAngle:
        total = Fraction(0)
        for step in self.steps:
            total += step.duration.as_fraction()
        return RationalAngle.from_fraction(total)

    @property
    def graph_count(self) -> int:
        return len(self.steps)

    def replaced(self, start: int, stop: int, new_steps: Sequence[TimedGraph]) -> "DynamicGraph":
        """Copy with steps[start:stop] replaced by new_steps."""
        merged = self.steps[:start] + tuple(new_steps) + self.steps[stop:]
        return DynamicGraph(self.n_vertices, merged)


@dataclass(frozen=True)
class Period:
    """Recurrence time of a walk step: a rational multiple of pi, or none.

    ``value`` is None for aperiodic graphs (incommensurate spectrum). The
    empty graph gets the degenerate finite period 0, meaning every duration
    reduces to 0: nothing evolves, so all durations are equivalent.
    """

    value: Optional[RationalAngle]

    @classmethod
    def finite(cls, value: RationalAngle) -> "Period":
        return cls(value)

    @classmethod
    def infinite(cls) -> "Period":
        return cls(None)

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def __str__(self) -> str:
        return str(self.value) if self.value is not None else "infinite"


def adjacency_matrix(graph: Graph) -> np.ndarray:
    """Symmetric integer adjacency matrix; loops put 1 on the diagonal."""
    a = np.zeros((graph.n_vertices, graph.n_vertices), dtype=np.int64)
    for i, j in graph.edges:
        a[i, j] = 1
        a[j, i] = 1
    for v in graph.loops:
        a[v, v] = 1
    return a


def support(graph: Graph) -> frozenset:
    """Vertices touched by at least one edge or loop."""
    touched = set(graph.loops)
    for i, j in graph.edges:
        touched.add(i)
        touched.add(j)
    return frozenset(touched)


def supports_disjoint(a: Graph, b: Graph) -> bool:
    return not (support(a) & support(b))


def rationalize(value: float, max_denominator: int = 16, tolerance: float = 1e-9) -> Optional[Fraction]:
    """Best rational p/q with q <= max_denominator, or None if not within tolerance."""
    guess = Fraction(value).limit_denominator(max_denominator)
    if abs(float(guess) - value) < tolerance:
        return guess
    return None


def period(graph: Graph) -> Period:
    """Recurrence time of exp(-i A t / ||A||), if one exists.

    Each eigenvalue pair contributes a candidate period 2*pi*||A|| / |lam|;
    the walk period is their least common multiple. With the normalized
    ratios |lam| / ||A|| written as reduced fractions p/q, that lcm is
    2*pi * lcm(q) / gcd(p). Ratios that do not rationalize (denominator
    above 16 or residual over 1e-9) make the spectrum incommensurate and
    the period infinite.
    """
    if graph.is_empty:
        return Period.finite(RationalAngle.zero())
    eigenvalues = np.linalg.eigvalsh(adjacency_matrix(graph).astype(np.float64))
    norm = float(np.abs(eigenvalues).max())
    numerators: set = set()
    denominators: set = set()
    for lam in eigenvalues:
        magnitude = abs(float(lam))
        if magnitude / norm < 1e-12:
            continue  # zero eigenvalues sit still and impose no constraint
        ratio = rationalize(magnitude / norm)
        if ratio is None:
            return Period.infinite()
        if ratio == 0:
            continue
        numerators.add(ratio.numerator)
        denominators.add(ratio.denominator)
    lcm_q = math.lcm(*denominators)
    gcd_p = math.gcd(*numerators)
    return Period.finite(RationalAngle(2 * lcm_q, gcd_p))


def reduce_time(step: TimedGraph) -> TimedGraph:
    """Reduce a step's duration modulo its graph's period, when finite."""
    p = period(step.graph)
    if not p.is_finite:
        return step
    return TimedGraph(step.graph, step.duration % p.value)


class ParseError(ValueError):
    """Raised for malformed walk JSON; the message carries the JSON path."""


def _fail(path: str, problem: str) -> None:
    raise ParseError(f"{path}: {problem}")


def _expect_int(value: object, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _expect_keys(obj: dict, allowed: Sequence[str], required: Sequence[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            _fail(path, f"unknown field {key!r}")
    for key in required:
        if key not in obj:
            _fail(path, f"missing field {key!r}")


def _parse_time(obj: object, path: str) -> RationalAngle:
    if not isinstance(obj, dict):
        _fail(path, "expected an object with pi_num and pi_den")
    _expect_keys(obj, ("pi_num", "pi_den"), ("pi_num", "pi_den"), path)
    num = _expect_int(obj["pi_num"], f"{path}.pi_num")
    den = _expect_int(obj["pi_den"], f"{path}.pi_den")
    if num < 0:
        _fail(f"{path}.pi_num", "durations are nonnegative")
    if den < 1:
        _fail(f"{path}.pi_den", "denominator must be at least 1")
    return RationalAngle(num, den)


def _parse_step(obj: object, n_vertices: int, path: str) -> TimedGraph:
    if not isinstance(obj, dict):
        _fail(path, "expected a step object")
    _expect_keys(obj, ("edges", "loops", "time"), ("edges", "loops", "time"), path)

    raw_edges = obj["edges"]
    if not isinstance(raw_edges, list):
        _fail(f"{path}.edges", "expected a list of [i, j] pairs")
    edges = set()
    for k, pair in enumerate(raw_edges):
        edge_path = f"{path}.edges[{k}]"
        if not isinstance(pair, list) or len(pair) != 2:
            _fail(edge_path, "expected a pair [i, j]")
        i = _expect_int(pair[0], edge_path)
        j = _expect_int(pair[1], edge_path)
        if i == j:
            _fail(edge_path, "self-pair; use loops instead")
        if not (0 <= i < n_vertices and 0 <= j < n_vertices):
            _fail(edge_path, f"vertex out of range 0..{n_vertices - 1}")
        edge = (i, j) if i < j else (j, i)
        if edge in edges:
            _fail(edge_path, f"duplicate edge {list(edge)}")
        edges.add(edge)

    raw_loops = obj["loops"]
    if not isinstance(raw_loops, list):
        _fail(f"{path}.loops", "expected a list of vertices")
    loops = set()
    for k, raw in enumerate(raw_loops):
        loop_path = f"{path}.loops[{k}]"
        v = _expect_int(raw, loop_path)
        if not (0 <= v < n_vertices):
            _fail(loop_path, f"vertex out of range 0..{n_vertices - 1}")
        if v in loops:
            _fail(loop_path, f"duplicate loop {v}")
        loops.add(v)

    duration = _parse_time(obj["time"], f"{path}.time")
    return TimedGraph(Graph(n_vertices, frozenset(edges), frozenset(loops)), duration)


def parse_dynamic_graph(text: str) -> DynamicGraph:
    """Parse walk JSON, raising ParseError with a JSON path on any defect."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err}") from err
    if not isinstance(data, dict):
        _fail("$", "expected a top-level object")
    _expect_keys(data, ("n_vertices", "sequence"), ("n_vertices", "sequence"), "$")
    n_vertices = _expect_int(data["n_vertices"], "n_vertices")
    if n_vertices < 1:
        _fail("n_vertices", "must be at least 1")
    raw_sequence = data["sequence"]
    if not isinstance(raw_sequence, list):
        _fail("sequence", "expected a list of steps")
    steps = tuple(
        _parse_step(step, n_vertices, f"sequence[{index}]")
        for index, step in enumerate(raw_sequence)
    )
    return DynamicGraph(n_vertices, steps)


def serialize_dynamic_graph(walk: DynamicGraph) -> str:
    """Serialize to the JSON interchange form, deterministically ordered."""
    payload = {
        "n_vertices": walk.n_vertices,
        "sequence": [
            {
                "edges": [list(pair) for pair in step.graph.sorted_edges()],
                "loops": step.graph.sorted_loops(),
                "time": {"pi_num": step.duration.num, "pi_den": step.duration.den},
            }
            for step in walk.steps
        ],
    }
    return json.dumps(payload, indent=2) + "\n"
