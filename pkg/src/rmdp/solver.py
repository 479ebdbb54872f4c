"""Robust, optimistic and nominal dynamic programming.

Every Bellman sweep is double buffered: new values are computed from the
previous iterate only, so the order in which states are processed (or
whether they are processed concurrently) never changes the result.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np

from . import graph as G
from .model import Model, ModelError, StationaryPolicy, check_policy, induce_dtmc
from .uncertainty import MAX, MIN, inner_extremum

DEFAULT_EPSILON = 1e-6
DEFAULT_MAX_ITER = 100_000
TIE_TOL = 1e-12


class Mode(str, Enum):
    ROBUST = "robust"
    OPTIMISTIC = "optimistic"
    NOMINAL = "nominal"

    @property
    def direction(self) -> str:
        return MAX if self is Mode.OPTIMISTIC else MIN


@dataclass(frozen=True)
class ReachReward:
    target: frozenset[int]
    name = "reach-reward"

    def __post_init__(self):
        object.__setattr__(self, "target", frozenset(self.target))
        if not self.target:
            raise ValueError("target set must be nonempty")


@dataclass(frozen=True)
class Reachability:
    target: frozenset[int]
    name = "reachability"

    def __post_init__(self):
        object.__setattr__(self, "target", frozenset(self.target))
        if not self.target:
            raise ValueError("target set must be nonempty")


@dataclass(frozen=True)
class Discounted:
    gamma: float
    name = "discounted"

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"discount factor must lie in [0, 1), got {self.gamma}")


Objective = Union[ReachReward, Reachability, Discounted]


@dataclass(frozen=True, eq=False)
class ValueVector:
    values: np.ndarray
    residual: float
    iterations: int
    converged: bool

    def __getitem__(self, s):
        return self.values[s]


@dataclass(frozen=True, eq=False)
class SolveResult:
    values: ValueVector
    policy: StationaryPolicy
    mode: Mode
    objective: Objective
    # policy iteration bookkeeping: evaluation sweeps spent in each round
    sweeps_per_round: tuple[int, ...] = field(default=())


@dataclass(frozen=True)
class _Setup:
    values: np.ndarray  # initial iterate with the fixed states already set
    free: tuple[int, ...]  # states updated by Bellman sweeps
    partition: G.ReachPartition | None


def _check_solvable(model: Model, mode: Mode) -> None:
    if model.kind == "memdp":
        raise ModelError("memdp models are not (s,a)-rectangular; use memdp_evaluate / memdp_best_stationary")
    if mode is Mode.NOMINAL and model.kind != "mdp":
        raise ModelError(f"nominal mode needs a point mdp, got kind={model.kind!r}")


def _check_objective(model: Model, objective: Objective) -> None:
    if isinstance(objective, (ReachReward, Reachability)):
        bad = [s for s in objective.target if not 0 <= s < model.n_states]
        if bad:
            raise ValueError(f"unknown target state(s): {bad}")
    elif not isinstance(objective, Discounted):
        raise TypeError(f"unsupported objective {objective!r}")


def _setup(model: Model, objective: Objective, graph: G.SupportGraph) -> _Setup:
    n = model.n_states
    V = np.zeros(n)
    if isinstance(objective, ReachReward):
        part = G.classify_reach_reward(model, objective.target, graph=graph)
        V[list(part.infinite)] = math.inf
        return _Setup(V, tuple(sorted(part.unknown)), part)
    if isinstance(objective, Reachability):
        t = frozenset(objective.target)
        zero = G.prob0_max(model, t, graph=graph)
        V[list(t)] = 1.0
        free = sorted(set(range(n)) - t - zero)
        part = G.ReachPartition(target=t, infinite=frozenset(), unknown=frozenset(free), zero=zero)
        return _Setup(V, tuple(free), part)
    return _Setup(V, tuple(range(n)), None)


def _model_graph(model: Model, objective: Objective) -> G.SupportGraph:
    return G.support_graph(model, strict=isinstance(objective, ReachReward))


def q_value(model: Model, s: int, a: int, V: np.ndarray, objective: Objective, direction: str) -> float:
    """One-step backup of ``(s, a)`` against the value vector ``V``."""
    row = model.rows[(s, a)]
    inner = inner_extremum(row, [V[t] for t in row.support], direction).value
    if isinstance(objective, Reachability):
        return inner
    if isinstance(objective, Discounted):
        return model.rewards[(s, a)] + objective.gamma * inner
    return model.rewards[(s, a)] + inner


def _sweep(
    states: Sequence[int],
    backup: Callable[[int, np.ndarray], float],
    V: np.ndarray,
    pool: ThreadPoolExecutor | None,
) -> np.ndarray:
    new = V.copy()
    if pool is None or len(states) < 2:
        for s in states:
            new[s] = backup(s, V)
    else:
        for s, v in zip(states, pool.map(lambda s: backup(s, V), states)):
            new[s] = v
    return new


def _iterate(
    V: np.ndarray,
    free: Sequence[int],
    backup: Callable[[int, np.ndarray], float],
    epsilon: float,
    max_iter: int,
    threads: int,
) -> ValueVector:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if max_iter < 0:
        raise ValueError("max_iter must be nonnegative")
    if not free:
        return ValueVector(V, 0.0, 0, True)
    residual = math.inf
    iterations = 0
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while iterations < max_iter:
            new = _sweep(free, backup, V, pool)
            residual = float(np.max(np.abs(new[list(free)] - V[list(free)])))
            V = new
            iterations += 1
            if residual < epsilon:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    V.setflags(write=False)
    return ValueVector(V, residual, iterations, residual < epsilon)


def value_iteration(
    model: Model,
    objective: Objective,
    mode: Mode = Mode.ROBUST,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    threads: int = 1,
) -> ValueVector:
    """Iterate the (robust/optimistic/nominal) Bellman operator from zero.

    Stops once the max-norm change of a sweep drops below ``epsilon`` or
    after ``max_iter`` sweeps, in which case ``converged`` is False.
    """
    mode = Mode(mode)
    _check_solvable(model, mode)
    _check_objective(model, objective)
    setup = _setup(model, objective, _model_graph(model, objective))
    direction = mode.direction

    def backup(s, V):
        return max(q_value(model, s, a, V, objective, direction) for a in model.enabled(s))

    return _iterate(setup.values, setup.free, backup, epsilon, max_iter, threads)


def _free_states(model: Model, objective: Objective) -> set[int]:
    if isinstance(objective, Discounted):
        return set(range(model.n_states))
    setup = _setup(model, objective, _model_graph(model, objective))
    return set(setup.free)


def _greedy(qs: Sequence[tuple[int, float]]) -> int:
    best_a, best_q = qs[0]
    for a, q in qs[1:]:
        if q > best_q + TIE_TOL * max(1.0, abs(best_q)):
            best_a, best_q = a, q
    return best_a


def extract_policy(model: Model, values, objective: Objective, mode: Mode = Mode.ROBUST) -> StationaryPolicy:
    """Greedy deterministic policy with respect to ``values``.

    Ties go to the lowest action index. States whose value is fixed by
    preprocessing get their lowest-index enabled action.
    """
    mode = Mode(mode)
    _check_solvable(model, mode)
    V = np.asarray(values.values if isinstance(values, ValueVector) else values, dtype=float)
    if V.shape != (model.n_states,):
        raise ValueError(f"value vector has shape {V.shape}, expected ({model.n_states},)")
    free = _free_states(model, objective)
    choice = []
    for s in range(model.n_states):
        acts = model.enabled(s)
        if s in free and len(acts) > 1:
            choice.append(_greedy([(a, q_value(model, s, a, V, objective, mode.direction)) for a in acts]))
        else:
            choice.append(acts[0])
    return StationaryPolicy.from_actions(choice, model.n_actions)


def policy_evaluation(
    model: Model,
    policy: StationaryPolicy,
    objective: Objective,
    mode: Mode = Mode.ROBUST,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    threads: int = 1,
    init: np.ndarray | None = None,
) -> ValueVector:
    """Value of a fixed stationary (possibly randomized) policy.

    Preprocessing uses the support graph restricted to the policy's actions,
    so states where the policy itself misses the target get value infinity
    (reach-reward) or zero (reachability). ``init`` may warm-start the free
    states from a vector known to lie below the policy's value.
    """
    mode = Mode(mode)
    _check_solvable(model, mode)
    _check_objective(model, objective)
    check_policy(model, policy)
    graph = G.restrict_to_policy(_model_graph(model, objective), policy)
    setup = _setup(model, objective, graph)
    direction = mode.direction
    V = setup.values
    if init is not None:
        free = list(setup.free)
        start = np.asarray(init, dtype=float)[free]
        V[free] = np.where(np.isfinite(start), start, 0.0)
    weights = [[(a, policy.probs[s, a]) for a in policy.support(s)] for s in range(model.n_states)]

    def backup(s, V):
        return math.fsum(w * q_value(model, s, a, V, objective, direction) for a, w in weights[s])

    return _iterate(V, setup.free, backup, epsilon, max_iter, threads)


def _initial_policy(model: Model, objective: Objective, graph: G.SupportGraph) -> list[int]:
    if isinstance(objective, Discounted):
        return [model.enabled(s)[0] for s in range(model.n_states)]
    dist = G.bfs_distance(graph, frozenset(objective.target))
    choice = []
    for s in range(model.n_states):
        acts = model.enabled(s)
        choice.append(min(acts, key=lambda a: (min(dist[t] for t in graph[s][a]), a)))
    return choice


def policy_iteration(
    model: Model,
    objective: Objective,
    mode: Mode = Mode.ROBUST,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    threads: int = 1,
) -> SolveResult:
    """Alternate policy evaluation (to ``epsilon/10``) and greedy improvement.

    Reach objectives start from the policy that heads for the target along
    shortest support-graph paths, which is proper on every state that can
    reach the target. An action replaces the current one only if it improves
    the state-action value by more than ``epsilon/10``. At most ``max_iter``
    improvement rounds are run.
    """
    mode = Mode(mode)
    _check_solvable(model, mode)
    _check_objective(model, objective)
    graph = _model_graph(model, objective)
    setup = _setup(model, objective, graph)
    free = set(setup.free)
    choice = _initial_policy(model, objective, graph)
    eval_eps = epsilon / 10.0
    threshold = epsilon / 10.0
    sweeps: list[int] = []
    V = None
    stable = False
    while len(sweeps) < max(max_iter, 1):
        policy = StationaryPolicy.from_actions(choice, model.n_actions)
        vv = policy_evaluation(model, policy, objective, mode, eval_eps, max_iter, threads, init=V)
        sweeps.append(vv.iterations)
        V = np.array(vv.values)
        new_choice = list(choice)
        for s in sorted(free):
            acts = model.enabled(s)
            if len(acts) < 2:
                continue
            qs = {a: q_value(model, s, a, V, objective, mode.direction) for a in acts}
            best = _greedy(list(qs.items()))
            if qs[best] > qs[choice[s]] + threshold:
                new_choice[s] = best
        if new_choice == choice:
            stable = vv.converged
            break
        choice = new_choice
    if setup.partition is not None:
        # values fixed by model-level preprocessing override policy-level ones
        V[list(setup.partition.infinite)] = math.inf
    for s in range(model.n_states):
        if s not in free:
            choice[s] = model.enabled(s)[0]
    V.setflags(write=False)
    values = ValueVector(V, vv.residual, sum(sweeps), stable)
    return SolveResult(values, StationaryPolicy.from_actions(choice, model.n_actions), mode, objective, tuple(sweeps))


def solve(
    model: Model,
    objective: Objective,
    mode: Mode = Mode.ROBUST,
    method: str = "vi",
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    threads: int = 1,
) -> SolveResult:
    """Optimal values and a deterministic policy via value or policy iteration."""
    mode = Mode(mode)
    if method == "pi":
        return policy_iteration(model, objective, mode, epsilon, max_iter, threads)
    if method != "vi":
        raise ValueError(f"unknown method {method!r}")
    vv = value_iteration(model, objective, mode, epsilon, max_iter, threads)
    return SolveResult(vv, extract_policy(model, vv, objective, mode), mode, objective)


def bellman_sweep(model: Model, values, objective: Objective, mode: Mode = Mode.ROBUST) -> np.ndarray:
    """Apply the Bellman operator once to the non-fixed states of ``values``."""
    mode = Mode(mode)
    _check_solvable(model, mode)
    V = np.asarray(values.values if isinstance(values, ValueVector) else values, dtype=float)
    free = sorted(_free_states(model, objective))
    return _sweep(
        free,
        lambda s, W: max(q_value(model, s, a, W, objective, mode.direction) for a in model.enabled(s)),
        V,
        None,
    )


@dataclass(frozen=True, eq=False)
class MemdpEvaluation:
    per_environment: tuple[np.ndarray, ...]
    worst: float
    worst_environment: int


def memdp_evaluate(model: Model, policy: StationaryPolicy, objective: Objective) -> MemdpEvaluation:
    """Exact value of a stationary policy in every environment of a MEMDP.

    Nature commits to one environment up front, so the worst case is the
    minimum over environments of the initial-state value.
    """
    from .oracle import exact_dtmc_value

    if model.kind != "memdp":
        raise ModelError(f"memdp_evaluate needs a memdp model, got kind={model.kind!r}")
    _check_objective(model, objective)
    per_env = []
    for i in range(len(model.environments)):
        dtmc = induce_dtmc(model.environment(i), policy)
        per_env.append(exact_dtmc_value(dtmc, objective))
    init = [v[model.initial] for v in per_env]
    worst_env = int(np.argmin(init))
    return MemdpEvaluation(tuple(per_env), float(init[worst_env]), worst_env)


def memdp_best_stationary(model: Model, objective: Objective, guard: int = 10_000) -> SolveResult:
    """Best stationary deterministic policy for the worst environment, by enumeration.

    Stationary policies are not optimal for MEMDPs in general; this is a
    small-scale baseline. Ties keep the lexicographically first policy.
    """
    if model.kind != "memdp":
        raise ModelError(f"memdp_best_stationary needs a memdp model, got kind={model.kind!r}")
    choices = [model.enabled(s) for s in range(model.n_states)]
    count = math.prod(len(c) for c in choices)
    if count > guard:
        raise ModelError(f"{count} stationary deterministic policies exceed the guard of {guard}")
    best = None
    for actions in itertools.product(*choices):
        policy = StationaryPolicy.from_actions(actions, model.n_actions)
        ev = memdp_evaluate(model, policy, objective)
        if best is None or ev.worst > best[1].worst:
            best = (policy, ev)
    policy, ev = best
    worst = np.min(np.vstack(ev.per_environment), axis=0)
    worst.setflags(write=False)
    return SolveResult(ValueVector(worst, 0.0, count, True), policy, Mode.ROBUST, objective)
