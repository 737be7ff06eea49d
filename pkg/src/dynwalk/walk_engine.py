"""Running walk programs and classifying what a step does.

A program step (graph G, duration t) acts on amplitudes as the unitary
exp(-i A t / ||A||), with A the adjacency matrix of G. Steps compose left
to right in program order, so the total unitary of [s1, s2, s3] is
U3 U2 U1. Simulation applies steps one at a time; the dense total unitary
exists for verification and for the rewrite passes.

``classify_phased_bitflip`` recognizes the steps that act as a bit-flip
permutation times a phase. Those are the only steps the phase-tracking
rewrite can fuse, and on power-of-two vertex counts they are exactly the
full matchings at quarter-period and the uniform loop sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph_model import DynamicGraph, Graph, TimedGraph, adjacency_matrix
from .numerics import ComplexMatrix, StateVector, apply, evolve_unitary

__all__ = [
    "PhasedBitFlip",
    "CLASSIFY_TOLERANCE",
    "step_unitary",
    "total_unitary",
    "evolve_state",
    "graphs_commute",
    "classify_phased_bitflip",
    "phased_bitflip_unitary",
]

CLASSIFY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PhasedBitFlip:
    """A step unitary of the form phase * X_mask.

    ``flip_mask`` XORs every basis index; mask 0 is a pure global phase.
    ``phase`` is the unit complex factor in front of the permutation.
    """

    flip_mask: int
    phase: complex


def step_unitary(step: TimedGraph) -> ComplexMatrix:
    """Dense unitary of one timed graph step."""
    return evolve_unitary(adjacency_matrix(step.graph), step.duration)


def total_unitary(walk: DynamicGraph) -> ComplexMatrix:
    """Product of all step unitaries, later steps applied on the left."""
    u = np.eye(walk.n_vertices, dtype=np.complex128)
    for step in walk.steps:
        u = step_unitary(step) @ u
    return u


def evolve_state(walk: DynamicGraph, state: StateVector) -> StateVector:
    """Run the program on a state, one step at a time."""
    psi = np.asarray(state, dtype=np.complex128)
    if psi.shape != (walk.n_vertices,):
        raise ValueError(f"state has shape {psi.shape}, expected ({walk.n_vertices},)")
    for step in walk.steps:
        psi = apply(step_unitary(step), psi)
    return psi


def graphs_commute(a: Graph, b: Graph) -> bool:
    """Exact integer test of whether two adjacency matrices commute."""
    if a.n_vertices != b.n_vertices:
        raise ValueError("vertex sets differ")
    ma = adjacency_matrix(a)
    mb = adjacency_matrix(b)
    return np.array_equal(ma @ mb, mb @ ma)


def phased_bitflip_unitary(flip_mask: int, phase: complex, n_vertices: int) -> ComplexMatrix:
    """Dense matrix phase * X_mask on n_vertices basis states."""
    indices = np.arange(n_vertices)
    u = np.zeros((n_vertices, n_vertices), dtype=np.complex128)
    u[indices ^ flip_mask, indices] = phase
    return u


def classify_phased_bitflip(step: TimedGraph) -> Optional[PhasedBitFlip]:
    """Recognize a step acting as phase * X_mask, else None.

    The vertex count must be a power of two so that XOR masks make sense;
    anything else raises ValueError. The candidate mask is read off column
    0 of the step unitary and then verified globally to CLASSIFY_TOLERANCE,
    so a false positive would need the whole matrix to conspire. A
    zero-duration or empty step classifies as (mask 0, phase 1).
    """
    n = step.graph.n_vertices
    if n < 1 or n & (n - 1):
        raise ValueError(f"vertex count {n} is not a power of two")
    u = step_unitary(step)
    column = np.abs(u[:, 0])
    mask = int(column.argmax())
    phase = complex(u[mask, 0])
    if abs(abs(phase) - 1.0) > CLASSIFY_TOLERANCE:
        return None
    expected = phased_bitflip_unitary(mask, phase, n)
    if np.abs(u - expected).max() > CLASSIFY_TOLERANCE:
        return None
    return PhasedBitFlip(mask, phase)
