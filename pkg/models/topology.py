"""
Time-indexed communication / influence graphs and transition-system reachability.
"""

import logging
import sys
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from models.errors import UnknownNode
from models.invariant import Edge, Invariant, Transition, collect_atoms, filter_by_owner
from models.temporal import TimedFact, flatten

logger = logging.getLogger(__name__)

# End of the single slice used for untimed (all-time) graphs
ALL_TIME = sys.maxsize

EdgeKey = Tuple[str, str]


def edge_key(a: str, b: str) -> EdgeKey:
    """Undirected edges are stored as sorted pairs."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class TimeIndexedGraph:
    """
    A node set plus interval-guarded edge slices.

    Each slice is ``(start, end, edges)`` with inclusive bounds; slices may overlap.
    """
    nodes: FrozenSet[str]
    slices: Tuple[Tuple[int, int, FrozenSet[EdgeKey]], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        normalized = []
        for start, end, edges in self.slices:
            if start > end:
                raise ValueError(f"slice start {start} is after end {end}")
            edges = frozenset(edge_key(a, b) for a, b in edges)
            for a, b in edges:
                for node in (a, b):
                    if node not in self.nodes:
                        raise ValueError(f"edge endpoint '{node}' is not a graph node")
            normalized.append((start, end, edges))
        object.__setattr__(self, "slices", tuple(normalized))

    def _require(self, *names):
        for name in names:
            if name not in self.nodes:
                raise UnknownNode(name)


@dataclass(frozen=True)
class TransitionSystem:
    states: FrozenSet[str]
    transitions: FrozenSet[Tuple[str, str, str]]

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        for source, _, target in self.transitions:
            if source not in self.states or target not in self.states:
                raise ValueError(f"transition endpoint not in states: {source} -> {target}")


# Construction

def graph_from_facts(facts: Iterable[TimedFact], horizon: int = ALL_TIME) -> TimeIndexedGraph:
    """Group the Edge facts by their time guard into slices; untimed edges hold for all time."""
    groups = {}
    nodes = set()
    for fact in facts:
        if not isinstance(fact.payload, Edge):
            continue
        span = fact.tick_range(horizon)
        if span is None:
            continue
        edge = fact.payload
        nodes.update((edge.source, edge.target))
        groups.setdefault(span, set()).add(edge_key(edge.source, edge.target))
    slices = tuple((start, end, frozenset(edges)) for (start, end), edges in sorted(groups.items()))
    return TimeIndexedGraph(frozenset(nodes), slices)


def graph_from_model(m: Invariant, owner: Optional[str] = None, horizon: int = ALL_TIME) -> TimeIndexedGraph:
    """Build the graph of the Edge facts of ``m`` (restricted to ``owner`` when given)."""
    if owner is not None:
        m = filter_by_owner(m, owner)
    return graph_from_facts(flatten(m), horizon)


def static_graph(nodes: Iterable[str], edges: Iterable[EdgeKey]) -> TimeIndexedGraph:
    edges = list(edges)
    return TimeIndexedGraph(frozenset(nodes), ((0, ALL_TIME, frozenset(edges)),))


def complete_graph(nodes: Iterable[str]) -> TimeIndexedGraph:
    """All-time graph linking every pair of nodes (wireless sensor layer)."""
    nodes = sorted(set(nodes))
    edges = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
    return static_graph(nodes, edges)


def transition_system_from_model(m: Invariant) -> TransitionSystem:
    transitions = {(t.source, t.event, t.target) for t in collect_atoms(m, Transition)}
    states = {s for source, _, target in transitions for s in (source, target)}
    return TransitionSystem(frozenset(states), frozenset(transitions))


# Queries

def graph_at(g: TimeIndexedGraph, t: int) -> FrozenSet[EdgeKey]:
    """Union of the edges of every slice whose interval contains ``t``."""
    edges = set()
    for start, end, slice_edges in g.slices:
        if start <= t <= end:
            edges |= slice_edges
    return frozenset(edges)


def _nx_graph(g: TimeIndexedGraph, t: int) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(g.nodes)
    graph.add_edges_from(graph_at(g, t))
    return graph


def connected(g: TimeIndexedGraph, a: str, b: str, t: int) -> bool:
    """True iff an undirected path joins ``a`` and ``b`` at tick ``t``."""
    g._require(a, b)
    if a == b:
        return True
    return nx.has_path(_nx_graph(g, t), a, b)


def connectivity_windows(g: TimeIndexedGraph, a: str, b: str, horizon: int) -> List[List[int]]:
    """
    Maximal inclusive tick intervals within [0, horizon] where ``a`` and ``b`` are connected.

    The edge set only changes at slice boundaries, so connectivity is evaluated
    once per constant segment instead of once per tick.
    """
    g._require(a, b)
    boundaries = {0}
    for start, end, _ in g.slices:
        if start <= horizon:
            boundaries.add(start)
        if end < horizon:
            boundaries.add(end + 1)
    ticks = sorted(boundaries)
    windows = []
    for i, start in enumerate(ticks):
        end = ticks[i + 1] - 1 if i + 1 < len(ticks) else horizon
        if not connected(g, a, b, start):
            continue
        if windows and windows[-1][1] == start - 1:
            windows[-1][1] = end
        else:
            windows.append([start, end])
    logger.debug("Connectivity %s-%s over %d segments: %s", a, b, len(ticks), windows)
    return windows


def reachable_states(ts: TransitionSystem, start: str, events: Iterable[str]) -> set:
    """
    States reachable from ``start`` consuming ``events`` in order.

    Every enabled transition is taken for each event; a state with no transition
    for the event stays where it is.
    """
    if start not in ts.states:
        raise UnknownNode(start)
    current = {start}
    for event in events:
        following = set()
        for state in current:
            targets = {target for source, label, target in ts.transitions
                       if source == state and label == event}
            following |= targets or {state}
        current = following
    return current


def articulation_nodes(g: TimeIndexedGraph, t: int) -> set:
    """Nodes whose removal disconnects the graph at tick ``t``."""
    return set(nx.articulation_points(_nx_graph(g, t)))
