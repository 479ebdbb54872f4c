"""Qualitative analysis on the support graph shared by all members of a model."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .model import Model, ModelError, StationaryPolicy
from .uncertainty import check_graph_preserving

# successors[s][a] -> tuple of successor indices, only for enabled a
SupportGraph = list[dict[int, tuple[int, ...]]]


@dataclass(frozen=True)
class ReachPartition:
    target: frozenset[int]
    infinite: frozenset[int]
    unknown: frozenset[int]
    zero: frozenset[int]


def support_graph(model: Model, strict: bool = False) -> SupportGraph:
    """Action-labelled successor lists.

    With ``strict=True`` every row must be graph preserving and, for MEMDPs,
    all environments must agree on every support.
    """
    if strict:
        for (s, a), row in sorted(model.rows.items()):
            ok, why = check_graph_preserving(row)
            if not ok:
                raise ModelError(f"row ({model.states[s]},{model.actions[a]}) is not graph preserving: {why}")
        for k, env in enumerate(model.environments[1:], start=1):
            for sa, row in env.items():
                if sa not in model.rows or set(row.support) != set(model.rows[sa].support):
                    s, a = sa
                    raise ModelError(
                        f"environment {k} changes the support of ({model.states[s]},{model.actions[a]})"
                    )
    graph: SupportGraph = [{} for _ in range(model.n_states)]
    for (s, a), row in sorted(model.rows.items()):
        graph[s][a] = tuple(sorted(set(row.support)))
    return graph


def restrict_to_policy(graph: SupportGraph, policy: StationaryPolicy) -> SupportGraph:
    return [{a: succ[a] for a in policy.support(s)} for s, succ in enumerate(graph)]


def _check_target(model: Model, target: Iterable[int]) -> frozenset[int]:
    t = frozenset(target)
    if not t:
        raise ValueError("target set must be nonempty")
    bad = [s for s in t if not 0 <= s < model.n_states]
    if bad:
        raise ValueError(f"unknown target state(s): {bad}")
    return t


def _predecessors(graph: SupportGraph) -> list[set[int]]:
    pre: list[set[int]] = [set() for _ in graph]
    for s, succ in enumerate(graph):
        for targets in succ.values():
            for t in targets:
                pre[t].add(s)
    return pre


def _backward_reach(graph: SupportGraph, sources: set[int], blocked: frozenset[int] = frozenset()) -> set[int]:
    """States with some path into ``sources`` whose intermediate states avoid ``blocked``."""
    pre = _predecessors(graph)
    seen = set(sources)
    queue = deque(sorted(sources))
    while queue:
        t = queue.popleft()
        for s in sorted(pre[t]):
            if s not in seen and s not in blocked:
                seen.add(s)
                queue.append(s)
    return seen


def _can_avoid_forever(graph: SupportGraph, target: frozenset[int]) -> set[int]:
    """States from which some policy never visits the target (surely)."""
    alive = set(range(len(graph))) - target
    changed = True
    while changed:
        changed = False
        for s in sorted(alive):
            if not any(all(t in alive for t in succ) for succ in graph[s].values()):
                alive.discard(s)
                changed = True
    return alive


def _min_reach_certain(graph: SupportGraph, target: frozenset[int]) -> set[int]:
    avoid = _can_avoid_forever(graph, target)
    # a state escapes almost-sure reachability iff it can reach an avoiding
    # state along a path that does not pass through the target first
    escaping = _backward_reach(graph, avoid, blocked=target)
    return set(range(len(graph))) - escaping


def min_reach_certain(model: Model, target: Iterable[int]) -> frozenset[int]:
    """States that reach the target almost surely under every policy."""
    t = _check_target(model, target)
    return frozenset(_min_reach_certain(support_graph(model), t))


def prob0_max(model: Model, target: Iterable[int], graph: SupportGraph | None = None) -> frozenset[int]:
    """States from which no policy reaches the target with positive probability."""
    t = _check_target(model, target)
    g = support_graph(model) if graph is None else graph
    return frozenset(set(range(model.n_states)) - _backward_reach(g, set(t)))


def classify_reach_reward(model: Model, target: Iterable[int], graph: SupportGraph | None = None) -> ReachPartition:
    """Split states into target, infinite-reward and still-unknown sets."""
    t = _check_target(model, target)
    g = support_graph(model, strict=True) if graph is None else graph
    certain = _min_reach_certain(g, t)
    infinite = frozenset(range(model.n_states)) - certain - t
    unknown = frozenset(certain) - t
    zero = frozenset(set(range(model.n_states)) - _backward_reach(g, set(t)))
    return ReachPartition(target=t, infinite=infinite, unknown=unknown, zero=zero)


def bfs_distance(graph: SupportGraph, target: frozenset[int]) -> list[float]:
    """Shortest number of steps to the target when choosing actions freely."""
    dist = [float("inf")] * len(graph)
    pre = _predecessors(graph)
    queue = deque()
    for t in sorted(target):
        dist[t] = 0
        queue.append(t)
    while queue:
        t = queue.popleft()
        for s in sorted(pre[t]):
            if dist[s] == float("inf"):
                dist[s] = dist[t] + 1
                queue.append(s)
    return dist
