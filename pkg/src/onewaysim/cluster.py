"""Cluster states, graph stabilizers, and the two experiment layouts.

A cluster state on a graph G is built by preparing |+> on every vertex
and applying CPhase across every edge.  Vertices are numbered 0..n-1
and map directly to qubit indices (qubit 0 = most significant bit).

The four-qubit chip realizes two graphs on the linear cluster |C4>:

    horseshoe            box
    1 - 2                1 - 2
        |                |   |
    4 - 3                4 - 3

Both are local-unitary images of |C4>; the converters below move
states between the |C4> frame and either graph frame, and the
``*_equivalence`` functions check the identities exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from .qcore import (
    PauliString,
    State,
    StateVector,
    apply_cphase,
    apply_gate,
    hadamard,
    overlap,
    plus_state,
    swap_qubits,
)


@dataclass(frozen=True)
class ClusterGraph:
    """Simple undirected graph; edges are stored sorted and deduplicated."""

    num_vertices: int
    edges: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if self.num_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        normalized = []
        for edge in self.edges:
            a, b = int(edge[0]), int(edge[1])
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not (0 <= a < self.num_vertices and 0 <= b < self.num_vertices):
                raise ValueError(f"edge {edge!r} out of range")
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            normalized.append(key)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    def neighbors(self, vertex: int) -> Tuple[int, ...]:
        out = []
        for a, b in self.edges:
            if a == vertex:
                out.append(b)
            elif b == vertex:
                out.append(a)
        return tuple(sorted(out))


# the two layouts demonstrated on the chip, 0-based
LINEAR_GRAPH = ClusterGraph(4, ((0, 1), (1, 2), (2, 3)))
HORSESHOE_GRAPH = LINEAR_GRAPH
BOX_GRAPH = ClusterGraph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))


def build_cluster(graph: ClusterGraph) -> StateVector:
    """|+>^n followed by CPhase on every edge."""
    state = plus_state(graph.num_vertices)
    for a, b in graph.edges:
        state = apply_cphase(state, a, b)
    return state


def stabilizer_generators(graph: ClusterGraph) -> Tuple[PauliString, ...]:
    """One generator per vertex: X there, Z on each neighbor."""
    gens = []
    for v in range(graph.num_vertices):
        letters = ["I"] * graph.num_vertices
        letters[v] = "X"
        for u in graph.neighbors(v):
            letters[u] = "Z"
        gens.append(PauliString("".join(letters)))
    return tuple(gens)


def c4_state() -> StateVector:
    """The linear four-qubit cluster (|0000> + |0011> + |1100> - |1111>)/2."""
    amps = np.zeros(16, dtype=complex)
    amps[0b0000] = 0.5
    amps[0b0011] = 0.5
    amps[0b1100] = 0.5
    amps[0b1111] = -0.5
    return StateVector(amps)


def to_horseshoe_frame(state: State) -> State:
    """Map a |C4>-frame state to the horseshoe graph frame: H on 0 and 3."""
    h = hadamard()
    return apply_gate(apply_gate(state, 0, h), 3, h)


def to_box_frame(state: State) -> State:
    """Map a |C4>-frame state to the box graph frame: swap 1,2 then H all."""
    out = swap_qubits(state, 1, 2)
    h = hadamard()
    for q in range(4):
        out = apply_gate(out, q, h)
    return out


def horseshoe_equivalence() -> Tuple[StateVector, StateVector, float]:
    """Built horseshoe cluster vs the converted |C4>; overlap should be 1."""
    built = build_cluster(HORSESHOE_GRAPH)
    mapped = to_horseshoe_frame(c4_state())
    return built, mapped, overlap(built, mapped)


def box_equivalence() -> Tuple[StateVector, StateVector, float]:
    """Built box cluster vs the converted |C4>; overlap should be 1."""
    built = build_cluster(BOX_GRAPH)
    mapped = to_box_frame(c4_state())
    return built, mapped, overlap(built, mapped)
