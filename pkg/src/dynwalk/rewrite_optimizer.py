"""Verified rewrite passes and the walk simplification driver.

Six rewrite rules shrink a walk program without changing its total unitary
(up to global phase):

* SWAP_COMMUTING: adjacent steps whose adjacency matrices commute exchange
  places. Cost-neutral; the driver uses it only to unlock other rules.
* MERGE_IDENTICAL: adjacent steps on the same graph fuse; the summed
  duration reduces modulo the graph's period and the step vanishes when
  the reduction hits zero.
* COMBINE_PST: a run of steps that each act as phase * X_mask collapses to
  one matching (the XOR of the masks) plus at most one loop graph paying
  the accumulated phase.
* MERGE_COMPLEMENTARY: adjacent steps on support-disjoint graphs of equal
  spectral norm overlap: the union graph runs for the shorter duration,
  and the longer graph alone finishes the difference.
* MOVE_SINGLETON: a looped, edge-free vertex carries a pure phase, which
  can migrate along steps that leave the vertex edge-free and deposit into
  another step's loop structure.
* HYPERCUBE_HADAMARD: a fragment equal (up to phase) to Hadamards on a
  bit subset is replaced by the staircase/walk/staircase realization when
  that is strictly cheaper.

Every accepted rewrite is re-verified numerically against the program
unitary it replaced; a failure rolls back and is reported rather than
silently kept. Cost is lexicographic (total time, then graph count) and
every accepted step strictly decreases it, so the driver terminates. When
no rule fires, the driver spends a bounded search on cost-neutral enabling
moves (commuting swaps of adjacent blocks, or neutral applications of the
merge rules) that let a strictly improving rewrite land immediately after.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from .gate_compiler import all_loops_graph, compile_hadamard_layer, matching_graph, schedule_phases
from .graph_model import (
    DynamicGraph,
    Graph,
    Period,
    RationalAngle,
    TimedGraph,
    adjacency_matrix,
    period,
    rationalize,
    supports_disjoint,
)
from .numerics import phase_distance, spectral_norm
from .walk_engine import classify_phased_bitflip, step_unitary

__all__ = [
    "RULE_SWAP_COMMUTING",
    "RULE_MERGE_IDENTICAL",
    "RULE_COMBINE_PST",
    "RULE_MERGE_COMPLEMENTARY",
    "RULE_MOVE_SINGLETON",
    "RULE_HYPERCUBE_HADAMARD",
    "ALL_RULES",
    "VERIFY_TOLERANCE",
    "RuleNotApplicable",
    "RewriteStep",
    "OptimizationReport",
    "pass_swap_commuting",
    "pass_merge_identical",
    "pass_combine_pst",
    "pass_merge_complementary",
    "pass_move_singleton",
    "pass_hypercube_hadamard",
    "optimize",
]

RULE_SWAP_COMMUTING = "SWAP_COMMUTING"
RULE_MERGE_IDENTICAL = "MERGE_IDENTICAL"
RULE_COMBINE_PST = "COMBINE_PST"
RULE_MERGE_COMPLEMENTARY = "MERGE_COMPLEMENTARY"
RULE_MOVE_SINGLETON = "MOVE_SINGLETON"
RULE_HYPERCUBE_HADAMARD = "HYPERCUBE_HADAMARD"
RULE_NORMALIZE_TIME = "NORMALIZE_TIME"
RULE_DROP_ZERO = "DROP_ZERO"

ALL_RULES = (
    RULE_SWAP_COMMUTING,
    RULE_MERGE_IDENTICAL,
    RULE_COMBINE_PST,
    RULE_MERGE_COMPLEMENTARY,
    RULE_MOVE_SINGLETON,
    RULE_HYPERCUBE_HADAMARD,
)

VERIFY_TOLERANCE = 1e-9
NORM_TOLERANCE = 1e-9
PHASE_DENOMINATOR_LIMIT = 64


class RuleNotApplicable(Exception):
    """The requested rewrite does not apply at the given location."""


@dataclass(frozen=True)
class RewriteStep:
    """One accepted rewrite: which rule, where, and what it bought."""

    rule: str
    span: Tuple[int, int]
    time_saved: RationalAngle
    graphs_removed: int
    detail: str = ""


@dataclass(frozen=True)
class OptimizationReport:
    initial_time: RationalAngle
    final_time: RationalAngle
    initial_count: int
    final_count: int
    rewrites: Tuple[RewriteStep, ...]
    rejected: Tuple[str, ...] = ()

    @property
    def verified(self) -> bool:
        return not self.rejected

    def to_dict(self) -> dict:
        def angle(a: RationalAngle) -> dict:
            return {"pi_num": a.num, "pi_den": a.den, "text": str(a), "radians": a.radians}

        return {
            "initial": {"time": angle(self.initial_time), "graphs": self.initial_count},
            "final": {"time": angle(self.final_time), "graphs": self.final_count},
            "rewrites": [
                {
                    "rule": step.rule,
                    "span": list(step.span),
                    "time_saved": angle(step.time_saved),
                    "graphs_removed": step.graphs_removed,
                    "detail": step.detail,
                }
                for step in self.rewrites
            ],
            "rejected": list(self.rejected),
            "verified": self.verified,
        }


Cost = Tuple[Fraction, int]


def _cost(walk: DynamicGraph) -> Cost:
    return (walk.total_time().as_fraction(), walk.graph_count)


@lru_cache(maxsize=8192)
def _cached_step_unitary(step: TimedGraph) -> np.ndarray:
    return step_unitary(step)


@lru_cache(maxsize=8192)
def _cached_classify(step: TimedGraph):
    return classify_phased_bitflip(step)


@lru_cache(maxsize=4096)
def _cached_norm(graph: Graph) -> float:
    return spectral_norm(adjacency_matrix(graph))


@lru_cache(maxsize=4096)
def _cached_period(graph: Graph) -> Period:
    return period(graph)


def _program_unitary(walk: DynamicGraph) -> np.ndarray:
    u = np.eye(walk.n_vertices, dtype=np.complex128)
    for step in walk.steps:
        u = _cached_step_unitary(step) @ u
    return u


def _check_adjacent(walk: DynamicGraph, index: int) -> Tuple[TimedGraph, TimedGraph]:
    if not (0 <= index < walk.graph_count - 1):
        raise RuleNotApplicable(f"no adjacent pair at index {index}")
    return walk.steps[index], walk.steps[index + 1]


def pass_swap_commuting(walk: DynamicGraph, index: int) -> DynamicGraph:
    """Exchange steps index and index+1 when their graphs commute exactly."""
    first, second = _check_adjacent(walk, index)
    a = adjacency_matrix(first.graph)
    b = adjacency_matrix(second.graph)
    if not np.array_equal(a @ b, b @ a):
        raise RuleNotApplicable("adjacency matrices do not commute")
    return walk.replaced(index, index + 2, (second, first))


def pass_merge_identical(walk: DynamicGraph, index: int) -> DynamicGraph:
    """Fuse adjacent steps on the same graph, reducing modulo the period."""
    first, second = _check_adjacent(walk, index)
    if first.graph != second.graph:
        raise RuleNotApplicable("graphs differ")
    total = first.duration + second.duration
    p = _cached_period(first.graph)
    if p.is_finite:
        total = total % p.value
    if total.is_zero:
        return walk.replaced(index, index + 2, ())
    return walk.replaced(index, index + 2, (TimedGraph(first.graph, total),))


def _phase_angle(target: complex) -> Optional[RationalAngle]:
    """Exact angle theta in [0, 2pi) with exp(-i theta) = target, or None."""
    if abs(abs(target) - 1.0) > VERIFY_TOLERANCE:
        return None
    theta = (-cmath.phase(target)) % (2.0 * math.pi)
    guess = Fraction(theta / math.pi).limit_denominator(PHASE_DENOMINATOR_LIMIT) % 2
    if abs(cmath.exp(-1j * math.pi * float(guess)) - target) > VERIFY_TOLERANCE:
        return None
    return RationalAngle.from_fraction(guess)


def pass_combine_pst(walk: DynamicGraph, start: int, stop: int) -> DynamicGraph:
    """Collapse a run of phased bit-flip steps into matching + loops.

    Every step in [start, stop) must classify as phase * X_mask. The run
    composes to (product of phases) * X_(xor of masks); the replacement is
    a quarter-period matching on the combined mask (contributing -i)
    followed by an all-loops graph paying whatever phase remains, or just
    the loop graph when the masks cancel.
    """
    if not (0 <= start < stop <= walk.graph_count) or stop - start < 2:
        raise RuleNotApplicable("need at least two steps")
    n = walk.n_vertices
    if n < 1 or n & (n - 1):
        raise RuleNotApplicable("vertex count is not a power of two")
    mask = 0
    phase = complex(1.0)
    for step in walk.steps[start:stop]:
        flip = _cached_classify(step)
        if flip is None:
            raise RuleNotApplicable("step is not a phased bit flip")
        mask ^= flip.flip_mask
        phase *= flip.phase
    replacement: List[TimedGraph] = []
    if mask:
        replacement.append(TimedGraph(matching_graph(n, mask), RationalAngle(1, 2)))
        residue = _phase_angle(phase * 1j)
    else:
        residue = _phase_angle(phase)
    if residue is None:
        raise RuleNotApplicable("accumulated phase is not a clean fraction of pi")
    if not residue.is_zero:
        replacement.append(TimedGraph(all_loops_graph(n), residue))
    return walk.replaced(start, stop, replacement)


def pass_merge_complementary(walk: DynamicGraph, index: int) -> DynamicGraph:
    """Overlap adjacent support-disjoint steps of equal spectral norm.

    [A at s, B at t] with s <= t becomes [A union B at s, B at t - s];
    the second step disappears when the durations tie. Sound because
    disjoint supports make the adjacency matrices commute and the shared
    norm keeps the evolution rates aligned.
    """
    first, second = _check_adjacent(walk, index)
    if first.graph.is_empty or second.graph.is_empty:
        raise RuleNotApplicable("empty step")
    if not supports_disjoint(first.graph, second.graph):
        raise RuleNotApplicable("supports overlap")
    if abs(_cached_norm(first.graph) - _cached_norm(second.graph)) > NORM_TOLERANCE:
        raise RuleNotApplicable("spectral norms differ")
    union = first.graph.union(second.graph)
    if first.duration <= second.duration:
        shorter, longer = first, second
    else:
        shorter, longer = second, first
    remainder = longer.duration - shorter.duration
    replacement = [TimedGraph(union, shorter.duration)]
    if not remainder.is_zero:
        replacement.append(TimedGraph(longer.graph, remainder))
    return walk.replaced(index, index + 2, replacement)


def _rational_norm(graph: Graph) -> Optional[Fraction]:
    value = _cached_norm(graph)
    if value <= 0.0:
        return None
    guess = rationalize(value)
    if guess is None or guess <= 0:
        return None
    return guess


def pass_move_singleton(walk: DynamicGraph, source: int, vertex: int, target: int) -> DynamicGraph:
    """Migrate the phase of a looped, edge-free vertex into another step.

    The vertex must carry a loop and no edges in the source step, and stay
    edge-free in every step strictly between source and target (loops in
    the corridor are fine: diagonals commute). The phase moved is
    tau = t_source / ||A_source||. Two landing modes:

    * the target is loops-only and already loops the vertex: its phase
      becomes (t_target + tau) mod 2pi and the target re-emits as a
      staircase;
    * the target leaves the vertex entirely untouched and tau covers at
      least the target's normalized duration: the vertex joins the target
      with a loop, and any remaining phase trails as a one-vertex step.
    """
    count = walk.graph_count
    if not (0 <= source < count and 0 <= target < count) or source == target:
        raise RuleNotApplicable("bad source/target indices")
    src_step = walk.steps[source]
    if vertex not in src_step.graph.loops or not src_step.graph.degree_free(vertex):
        raise RuleNotApplicable("vertex is not a looped singleton in the source")
    lo, hi = (source, target) if source < target else (target, source)
    for between in walk.steps[lo + 1 : hi]:
        if not between.graph.degree_free(vertex):
            raise RuleNotApplicable("corridor step attaches edges to the vertex")

    src_norm = _rational_norm(src_step.graph)
    if src_norm is None:
        raise RuleNotApplicable("source norm is not a small rational")
    tau = src_step.duration.scaled(Fraction(1) / src_norm) % RationalAngle(2, 1)

    remainder_graph = Graph(
        src_step.graph.n_vertices, src_step.graph.edges, src_step.graph.loops - {vertex}
    )
    if not remainder_graph.is_empty:
        if abs(_cached_norm(remainder_graph) - _cached_norm(src_step.graph)) > NORM_TOLERANCE:
            raise RuleNotApplicable("removing the loop would change the source norm")

    tgt_step = walk.steps[target]
    n = walk.n_vertices
    if vertex in tgt_step.graph.loops:
        if not tgt_step.graph.is_loops_only:
            raise RuleNotApplicable("target loops the vertex but is not loops-only")
        phases = {w: tgt_step.duration for w in tgt_step.graph.loops}
        phases[vertex] = (tgt_step.duration + tau) % RationalAngle(2, 1)
        target_replacement: Tuple[TimedGraph, ...] = schedule_phases(phases, n).steps
    else:
        if not tgt_step.graph.degree_free(vertex):
            raise RuleNotApplicable("target attaches edges to the vertex")
        if tgt_step.graph.is_empty:
            raise RuleNotApplicable("target step is empty")
        tgt_norm = _rational_norm(tgt_step.graph)
        if tgt_norm is None:
            raise RuleNotApplicable("target norm is not a small rational")
        consumed = tgt_step.duration.scaled(Fraction(1) / tgt_norm)
        if tau < consumed:
            raise RuleNotApplicable("singleton phase is shorter than the target")
        joined = Graph(n, tgt_step.graph.edges, tgt_step.graph.loops | {vertex})
        residual = (tau - consumed) % RationalAngle(2, 1)
        target_replacement = (TimedGraph(joined, tgt_step.duration),)
        if not residual.is_zero:
            target_replacement += (TimedGraph(Graph(n, loops=frozenset({vertex})), residual),)

    source_replacement: Tuple[TimedGraph, ...] = ()
    if not remainder_graph.is_empty:
        source_replacement = (TimedGraph(remainder_graph, src_step.duration),)

    pieces: List[TimedGraph] = []
    for idx, step in enumerate(walk.steps):
        if idx == source:
            pieces.extend(source_replacement)
        elif idx == target:
            pieces.extend(target_replacement)
        else:
            pieces.append(step)
    return DynamicGraph(walk.n_vertices, tuple(pieces))


def _hadamard_on_subset(targets: Sequence[int], n_qubits: int) -> np.ndarray:
    h = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)
    u = np.array([[1.0]], dtype=np.complex128)
    for q in range(n_qubits):
        u = np.kron(u, h if q in targets else np.eye(2, dtype=np.complex128))
    return u


def pass_hypercube_hadamard(walk: DynamicGraph, start: int, stop: int) -> DynamicGraph:
    """Replace a fragment equal (up to phase) to Hadamards on a bit subset.

    Tries every nonempty subset of bit positions, largest first, and swaps
    in the staircase/walk/staircase layer only when that strictly reduces
    (total time, graph count). Unlike the merge rules this pass enforces
    the cost drop itself: the layer is a fixed-price replacement, not a
    local fusion, so applying it blindly could pessimize a cheap fragment.
    """
    if not (0 <= start < stop <= walk.graph_count):
        raise RuleNotApplicable("bad span")
    n = walk.n_vertices
    if n < 2 or n & (n - 1):
        raise RuleNotApplicable("vertex count is not a power of two")
    n_qubits = n.bit_length() - 1
    fragment = np.eye(n, dtype=np.complex128)
    for step in walk.steps[start:stop]:
        fragment = _cached_step_unitary(step) @ fragment

    found: Optional[Tuple[int, ...]] = None
    for size in range(n_qubits, 0, -1):
        for subset in combinations(range(n_qubits), size):
            if phase_distance(fragment, _hadamard_on_subset(subset, n_qubits)) < VERIFY_TOLERANCE:
                found = subset
                break
        if found:
            break
    if found is None:
        raise RuleNotApplicable("fragment is not a Hadamard layer")

    layer = compile_hadamard_layer(found, n_qubits)
    old_time = sum((s.duration.as_fraction() for s in walk.steps[start:stop]), Fraction(0))
    new_time = layer.total_time().as_fraction()
    old_cost = (old_time, stop - start)
    new_cost = (new_time, layer.graph_count)
    if not new_cost < old_cost:
        raise RuleNotApplicable("layer replacement is not strictly cheaper")
    return walk.replaced(start, stop, layer.steps)


# ---------------------------------------------------------------------------
# Driver


def _normalize(walk: DynamicGraph) -> Tuple[DynamicGraph, List[RewriteStep]]:
    """Reduce durations modulo periods and drop steps that do nothing."""
    records: List[RewriteStep] = []
    steps: List[TimedGraph] = []
    for index, step in enumerate(walk.steps):
        reduced = step
        p = _cached_period(step.graph)
        if p.is_finite:
            cut = step.duration % p.value
            if cut != step.duration:
                records.append(
                    RewriteStep(
                        RULE_NORMALIZE_TIME,
                        (index, index + 1),
                        step.duration - cut,
                        0,
                        f"{step.duration} -> {cut}",
                    )
                )
                reduced = TimedGraph(step.graph, cut)
        if reduced.duration.is_zero or reduced.graph.is_empty:
            records.append(
                RewriteStep(
                    RULE_DROP_ZERO, (index, index + 1), reduced.duration, 1, "inert step"
                )
            )
            continue
        steps.append(reduced)
    return DynamicGraph(walk.n_vertices, tuple(steps)), records


def _loops_only_run(walk: DynamicGraph, start: int) -> int:
    stop = start
    while stop < walk.graph_count and walk.steps[stop].graph.is_loops_only:
        stop += 1
    return stop


def _collapse_loop_run(walk: DynamicGraph, start: int) -> Optional[Tuple[DynamicGraph, RewriteStep]]:
    """Re-emit a run of loops-only steps as one optimal staircase.

    The run's per-vertex phase totals (mod 2pi) determine it up to
    reordering, so the descending staircase is the cheapest equivalent
    form. Recorded as MOVE_SINGLETON over the run's span: it is a
    composition of singleton extractions, moves and merges.
    """
    stop = _loops_only_run(walk, start)
    if stop - start < 2:
        return None
    totals: Dict[int, Fraction] = {}
    for step in walk.steps[start:stop]:
        for v in step.graph.loops:
            totals[v] = (totals.get(v, Fraction(0)) + step.duration.as_fraction()) % 2
    phases = {v: RationalAngle.from_fraction(t) for v, t in totals.items() if t != 0}
    stair = schedule_phases(phases, walk.n_vertices).steps
    old_time = sum((s.duration.as_fraction() for s in walk.steps[start:stop]), Fraction(0))
    new_time = sum((s.duration.as_fraction() for s in stair), Fraction(0))
    if not (new_time, len(stair)) < (old_time, stop - start):
        return None
    candidate = walk.replaced(start, stop, stair)
    record = RewriteStep(
        RULE_MOVE_SINGLETON,
        (start, stop),
        RationalAngle.from_fraction(old_time - new_time),
        (stop - start) - len(stair),
        f"staircase over {len(phases)} vertices",
    )
    return candidate, record


def _best_move_singleton(
    walk: DynamicGraph, source: int
) -> Optional[Tuple[DynamicGraph, RewriteStep]]:
    """Strongest elementary singleton move out of the given source step.

    Preference order: moves that delete a step outright, then largest time
    saving, then the leftmost target. Only strictly improving moves are
    returned; neutral ones surface through the enabling search instead.
    """
    src = walk.steps[source]
    if not src.graph.loops:
        return None
    base_cost = _cost(walk)
    best: Optional[Tuple[Tuple[int, Fraction, int], DynamicGraph, RewriteStep]] = None
    for vertex in src.graph.sorted_loops():
        if not src.graph.degree_free(vertex):
            continue
        for target in range(walk.graph_count):
            if target == source:
                continue
            try:
                candidate = pass_move_singleton(walk, source, vertex, target)
            except RuleNotApplicable:
                continue
            cost = _cost(candidate)
            if not cost < base_cost:
                continue
            removed = walk.graph_count - candidate.graph_count
            saved = base_cost[0] - cost[0]
            rank = (-removed, -saved, target)
            record = RewriteStep(
                RULE_MOVE_SINGLETON,
                (min(source, target), max(source, target) + 1),
                RationalAngle.from_fraction(saved),
                removed,
                f"vertex {vertex}: step {source} -> step {target}",
            )
            if best is None or rank < best[0]:
                best = (rank, candidate, record)
    if best is None:
        return None
    return best[1], best[2]


def _classifiable_run(walk: DynamicGraph, start: int) -> int:
    n = walk.n_vertices
    if n < 1 or n & (n - 1):
        return start
    stop = start
    while stop < walk.graph_count and _cached_classify(walk.steps[stop]) is not None:
        stop += 1
    return stop


def _scan_rules(
    walk: DynamicGraph, enabled: Set[str]
) -> Iterator[Tuple[DynamicGraph, RewriteStep]]:
    """Yield strictly improving rewrites, leftmost position first."""
    base_cost = _cost(walk)
    for index in range(walk.graph_count):
        if RULE_MERGE_IDENTICAL in enabled:
            try:
                candidate = pass_merge_identical(walk, index)
            except RuleNotApplicable:
                candidate = None
            if candidate is not None and _cost(candidate) < base_cost:
                saved = base_cost[0] - _cost(candidate)[0]
                yield candidate, RewriteStep(
                    RULE_MERGE_IDENTICAL,
                    (index, index + 2),
                    RationalAngle.from_fraction(saved),
                    walk.graph_count - candidate.graph_count,
                )
        if RULE_COMBINE_PST in enabled:
            stop = _classifiable_run(walk, index)
            if stop - index >= 2:
                try:
                    candidate = pass_combine_pst(walk, index, stop)
                except RuleNotApplicable:
                    candidate = None
                if candidate is not None and _cost(candidate) < base_cost:
                    saved = base_cost[0] - _cost(candidate)[0]
                    yield candidate, RewriteStep(
                        RULE_COMBINE_PST,
                        (index, stop),
                        RationalAngle.from_fraction(saved),
                        walk.graph_count - candidate.graph_count,
                    )
        if RULE_MERGE_COMPLEMENTARY in enabled:
            try:
                candidate = pass_merge_complementary(walk, index)
            except RuleNotApplicable:
                candidate = None
            if candidate is not None and _cost(candidate) < base_cost:
                saved = base_cost[0] - _cost(candidate)[0]
                yield candidate, RewriteStep(
                    RULE_MERGE_COMPLEMENTARY,
                    (index, index + 2),
                    RationalAngle.from_fraction(saved),
                    walk.graph_count - candidate.graph_count,
                )
        if RULE_MOVE_SINGLETON in enabled:
            collapsed = _collapse_loop_run(walk, index)
            if collapsed is not None:
                yield collapsed
            moved = _best_move_singleton(walk, index)
            if moved is not None:
                yield moved
        if RULE_HYPERCUBE_HADAMARD in enabled:
            for stop in range(walk.graph_count, index, -1):
                try:
                    candidate = pass_hypercube_hadamard(walk, index, stop)
                except RuleNotApplicable:
                    continue
                saved = base_cost[0] - _cost(candidate)[0]
                yield candidate, RewriteStep(
                    RULE_HYPERCUBE_HADAMARD,
                    (index, stop),
                    RationalAngle.from_fraction(saved),
                    walk.graph_count - candidate.graph_count,
                )
                break


def _scan(
    walk: DynamicGraph, enabled: Set[str], skip: Set[str]
) -> Optional[Tuple[DynamicGraph, RewriteStep]]:
    for candidate, record in _scan_rules(walk, enabled):
        if _signature(walk, record) in skip:
            continue
        return candidate, record
    return None


def _signature(walk: DynamicGraph, record: RewriteStep) -> str:
    return f"{record.rule}@{record.span}#{hash(walk.steps)}"


def _block_commutes(walk: DynamicGraph, i: int, a: int, b: int) -> bool:
    left = walk.steps[i : i + a]
    right = walk.steps[i + a : i + a + b]
    for s in left:
        ms = adjacency_matrix(s.graph)
        for t in right:
            mt = adjacency_matrix(t.graph)
            if not np.array_equal(ms @ mt, mt @ ms):
                return False
    return True


def _enabling_candidates(
    walk: DynamicGraph, enabled: Set[str]
) -> Iterator[Tuple[DynamicGraph, RewriteStep]]:
    """Cost-neutral moves worth trying when the scan is stuck.

    Commuting swaps of adjacent blocks come first (small blocks before
    large), then cost-neutral applications of the fusion rules. All are
    verified like any other rewrite when a pair is committed.
    """
    count = walk.graph_count
    base_cost = _cost(walk)
    if RULE_SWAP_COMMUTING in enabled:
        for total in range(2, count + 1):
            for a in range(1, total):
                b = total - a
                for i in range(0, count - total + 1):
                    left = walk.steps[i : i + a]
                    right = walk.steps[i + a : i + a + b]
                    if left == right:
                        continue
                    if not _block_commutes(walk, i, a, b):
                        continue
                    candidate = walk.replaced(i, i + total, right + left)
                    yield candidate, RewriteStep(
                        RULE_SWAP_COMMUTING,
                        (i, i + total),
                        RationalAngle.zero(),
                        0,
                        f"swap blocks {a}+{b}",
                    )
    for rule in (RULE_COMBINE_PST, RULE_MERGE_COMPLEMENTARY):
        if rule not in enabled:
            continue
        for index in range(count):
            try:
                if rule == RULE_COMBINE_PST:
                    stop = _classifiable_run(walk, index)
                    if stop - index < 2:
                        continue
                    candidate = pass_combine_pst(walk, index, stop)
                    span = (index, stop)
                else:
                    candidate = pass_merge_complementary(walk, index)
                    span = (index, index + 2)
            except RuleNotApplicable:
                continue
            if _cost(candidate) != base_cost:
                continue
            yield candidate, RewriteStep(rule, span, RationalAngle.zero(), 0, "enabling")
    if RULE_MOVE_SINGLETON in enabled:
        for source in range(count):
            src = walk.steps[source]
            for vertex in src.graph.sorted_loops():
                if not src.graph.degree_free(vertex):
                    continue
                for target in range(count):
                    if target == source:
                        continue
                    try:
                        candidate = pass_move_singleton(walk, source, vertex, target)
                    except RuleNotApplicable:
                        continue
                    if _cost(candidate) != base_cost:
                        continue
                    yield candidate, RewriteStep(
                        RULE_MOVE_SINGLETON,
                        (min(source, target), max(source, target) + 1),
                        RationalAngle.zero(),
                        0,
                        f"enabling move of vertex {vertex}",
                    )


def _find_enabling_pair(
    walk: DynamicGraph, enabled: Set[str], skip: Set[str]
) -> Optional[Tuple[DynamicGraph, RewriteStep, DynamicGraph, RewriteStep]]:
    for staged, staged_record in _enabling_candidates(walk, enabled):
        follow = _scan(staged, enabled, skip)
        if follow is not None:
            improved, improve_record = follow
            return staged, staged_record, improved, improve_record
    return None


def optimize(
    walk: DynamicGraph,
    passes: Optional[Iterable[str]] = None,
    max_iterations: Optional[int] = None,
) -> Tuple[DynamicGraph, OptimizationReport]:
    """Simplify a walk program under the verified rewrite rules.

    Fixpoint loop: normalize durations, scan left to right for the first
    strictly (time, count)-decreasing rewrite, and when none exists search
    for one cost-neutral enabling move whose successor rewrite strictly
    improves, committing the two together. Every accepted change is
    checked against the previous program unitary to VERIFY_TOLERANCE; a
    failed check rolls back, is recorded in the report, and that rewrite
    is not retried.
    """
    enabled = set(ALL_RULES if passes is None else passes)
    unknown = enabled - set(ALL_RULES)
    if unknown:
        raise ValueError(f"unknown passes: {sorted(unknown)}")
    limit = max_iterations if max_iterations is not None else 10 * max(walk.graph_count, 1) ** 2

    initial_time = walk.total_time()
    initial_count = walk.graph_count

    records: List[RewriteStep] = []
    rejected: List[str] = []
    skip: Set[str] = set()

    current, norm_records = _normalize(walk)
    records.extend(norm_records)

    iterations = 0
    while iterations < limit:
        iterations += 1
        found = _scan(current, enabled, skip)
        if found is not None:
            candidate, record = found
            if phase_distance(_program_unitary(current), _program_unitary(candidate)) < VERIFY_TOLERANCE:
                current, extra = _normalize(candidate)
                records.append(record)
                records.extend(extra)
            else:
                rejected.append(f"{record.rule} at {record.span}: verification failed")
                skip.add(_signature(current, record))
            continue
        pair = _find_enabling_pair(current, enabled, skip)
        if pair is None:
            break
        staged, staged_record, improved, improve_record = pair
        ok_stage = phase_distance(_program_unitary(current), _program_unitary(staged)) < VERIFY_TOLERANCE
        ok_improve = phase_distance(_program_unitary(staged), _program_unitary(improved)) < VERIFY_TOLERANCE
        if ok_stage and ok_improve:
            current, extra = _normalize(improved)
            records.append(staged_record)
            records.append(improve_record)
            records.extend(extra)
        else:
            rejected.append(
                f"{staged_record.rule}+{improve_record.rule} at {staged_record.span}: verification failed"
            )
            skip.add(_signature(staged, improve_record))

    report = OptimizationReport(
        initial_time=initial_time,
        final_time=current.total_time(),
        initial_count=initial_count,
        final_count=current.graph_count,
        rewrites=tuple(records),
        rejected=tuple(rejected),
    )
    return current, report
