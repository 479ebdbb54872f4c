"""Immutable model representation for MDPs, IMDPs, L1-MDPs and MEMDPs.

States and actions are named by strings externally and by dense indices
internally; index order is declaration order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .uncertainty import (
    IntervalRow,
    L1Row,
    PointRow,
    UncertainRow,
    check_graph_preserving,
    row_problems,
)

KINDS = ("mdp", "imdp", "l1", "memdp")
ROW_TYPES = {"mdp": PointRow, "imdp": IntervalRow, "l1": L1Row, "memdp": PointRow}

DERIVED_TOL = 1e-9
CONSTRUCTION_TOL = 1e-12

StateAction = tuple[int, int]


class ModelError(ValueError):
    """Raised when an operation receives a model it cannot handle."""


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    state: str | None = None
    action: str | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = ""
        if self.state is not None:
            where = f" at ({self.state},{self.action})" if self.action is not None else f" at ({self.state})"
        return f"{self.rule}{where}" + (f": {self.detail}" if self.detail else "")


@dataclass(frozen=True, eq=False)
class Model:
    """An (uncertain) MDP.

    ``rows`` maps every enabled ``(state, action)`` pair to its uncertain
    row. For ``kind="memdp"`` the rows are those of the first environment
    and ``environments`` holds one row mapping per environment.
    """

    kind: str
    states: tuple[str, ...]
    actions: tuple[str, ...]
    initial: int
    rows: Mapping[StateAction, UncertainRow]
    rewards: Mapping[StateAction, float]
    environments: tuple[Mapping[StateAction, PointRow], ...] = ()
    _enabled: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rows", MappingProxyType(dict(self.rows)))
        object.__setattr__(self, "rewards", MappingProxyType(dict(self.rewards)))
        envs = tuple(MappingProxyType(dict(env)) for env in self.environments)
        object.__setattr__(self, "environments", envs)
        enabled: list[list[int]] = [[] for _ in self.states]
        for s, a in self.rows:
            if 0 <= s < len(self.states):
                enabled[s].append(a)
        object.__setattr__(self, "_enabled", tuple(tuple(sorted(acts)) for acts in enabled))

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise KeyError(f"unknown state {name!r}") from None

    def action_index(self, name: str) -> int:
        try:
            return self.actions.index(name)
        except ValueError:
            raise KeyError(f"unknown action {name!r}") from None

    def enabled(self, s: int) -> tuple[int, ...]:
        if not 0 <= s < self.n_states:
            raise KeyError(f"unknown state index {s}")
        return self._enabled[s]

    def reward(self, s: int, a: int) -> float:
        return self.rewards[(s, a)]

    def environment(self, i: int) -> "Model":
        """Environment ``i`` of a MEMDP as a point MDP."""
        if self.kind != "memdp":
            raise ModelError("environment() requires a memdp model")
        return Model("mdp", self.states, self.actions, self.initial, self.environments[i], self.rewards)


def build_model(
    kind: str,
    states: Sequence[str],
    actions: Sequence[str],
    initial: str,
    rows: Mapping[tuple[str, str], UncertainRow] | Sequence[Mapping[tuple[str, str], PointRow]],
    rewards: Mapping[tuple[str, str], float],
) -> Model:
    """Build a model from name-keyed rows.

    Rows are keyed by ``(state, action)`` names and their ``support`` holds
    successor *indices*. For ``memdp`` pass a list of such mappings, one per
    environment. No validation happens here; call :func:`validate`.
    """
    states = tuple(states)
    actions = tuple(actions)
    s_ix = {name: i for i, name in enumerate(states)}
    a_ix = {name: i for i, name in enumerate(actions)}

    def key(pair):
        s, a = pair
        return s_ix[s], a_ix[a]

    if kind == "memdp":
        envs = tuple({key(k): r for k, r in env.items()} for env in rows)  # type: ignore[union-attr]
        first = envs[0] if envs else {}
    else:
        envs = ()
        first = {key(k): r for k, r in rows.items()}  # type: ignore[union-attr]
    return Model(
        kind=kind,
        states=states,
        actions=actions,
        initial=s_ix[initial],
        rows=first,
        rewards={key(k): float(v) for k, v in rewards.items()},
        environments=envs,
    )


def validate(model: Model) -> list[Diagnostic]:
    """Return one diagnostic per violated model invariant (empty if valid)."""
    diags: list[Diagnostic] = []
    S, A = model.states, model.actions

    def name(s, a=None):
        sn = S[s] if 0 <= s < len(S) else str(s)
        if a is None:
            return sn, None
        return sn, (A[a] if 0 <= a < len(A) else str(a))

    if model.kind not in KINDS:
        return [Diagnostic("unknown-kind", detail=repr(model.kind))]
    if len(set(S)) != len(S):
        diags.append(Diagnostic("duplicate-state"))
    if len(set(A)) != len(A):
        diags.append(Diagnostic("duplicate-action"))
    if not S:
        return diags + [Diagnostic("no-states")]
    if not 0 <= model.initial < len(S):
        diags.append(Diagnostic("unknown-initial-state", detail=str(model.initial)))

    envs = model.environments if model.kind == "memdp" else (model.rows,)
    if model.kind == "memdp" and not envs:
        diags.append(Diagnostic("no-environments"))
    row_type = ROW_TYPES[model.kind]

    for s, a in sorted(set(model.rows) | set(model.rewards)):
        if not (0 <= s < len(S) and 0 <= a < len(A)):
            diags.append(Diagnostic("unknown-state-or-action", *map(str, (s, a))))
            continue
        if (s, a) not in model.rows:
            diags.append(Diagnostic("reward-without-transition", *name(s, a)))
        if (s, a) not in model.rewards:
            diags.append(Diagnostic("transition-without-reward", *name(s, a)))
        else:
            r = model.rewards[(s, a)]
            if not math.isfinite(r) or r < 0:
                diags.append(Diagnostic("negative-or-nonfinite-reward", *name(s, a), detail=str(r)))

    for k, env in enumerate(envs):
        tag = f"environment {k}: " if model.kind == "memdp" else ""
        if model.kind == "memdp" and set(env) != set(envs[0]):
            diags.append(Diagnostic("environment-enabled-mismatch", detail=f"environment {k}"))
        for (s, a), row in sorted(env.items()):
            if not (0 <= s < len(S) and 0 <= a < len(A)):
                continue
            if not isinstance(row, row_type):
                diags.append(Diagnostic("wrong-row-type", *name(s, a), detail=tag + type(row).__name__))
                continue
            if any(not 0 <= t < len(S) for t in row.support):
                diags.append(Diagnostic("unknown-successor", *name(s, a), detail=tag))
                continue
            for rule in row_problems(row):
                diags.append(Diagnostic(rule, *name(s, a), detail=tag.rstrip(": ")))

    for s in range(len(S)):
        if not model._enabled[s]:
            diags.append(Diagnostic("deadlock", S[s]))
    return diags


def enabled_actions(model: Model, s: str | int) -> list[str]:
    ix = model.state_index(s) if isinstance(s, str) else s
    return [model.actions[a] for a in model.enabled(ix)]


def check_graph_preserving_model(model: Model) -> list[Diagnostic]:
    out = []
    for (s, a), row in sorted(model.rows.items()):
        ok, why = check_graph_preserving(row)
        if not ok:
            out.append(Diagnostic("not-graph-preserving", model.states[s], model.actions[a], why))
    return out


@dataclass(frozen=True)
class Dtmc:
    """Markov chain with dense transition matrix and per-state rewards."""

    states: tuple[str, ...]
    initial: int
    matrix: np.ndarray
    rewards: np.ndarray

    def __post_init__(self):
        n = len(self.states)
        if self.matrix.shape != (n, n) or self.rewards.shape != (n,):
            raise ValueError("dtmc matrix/reward shapes do not match the state count")


@dataclass(frozen=True, eq=False)
class StationaryPolicy:
    """Per-state distribution over actions, stored as an (S, A) matrix."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_actions(cls, actions: Sequence[int], n_actions: int) -> "StationaryPolicy":
        p = np.zeros((len(actions), n_actions))
        p[np.arange(len(actions)), list(actions)] = 1.0
        return cls(p)

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all((self.probs == 0.0) | (self.probs == 1.0)))

    def action(self, s: int) -> int:
        """The chosen action of a deterministic policy at state ``s``."""
        row = self.probs[s]
        a = int(np.argmax(row))
        if row[a] != 1.0:
            raise ValueError(f"policy is randomized at state {s}")
        return a

    def actions(self) -> list[int]:
        return [self.action(s) for s in range(len(self.probs))]

    def support(self, s: int) -> list[int]:
        return [int(a) for a in np.flatnonzero(self.probs[s] > 0.0)]

    def __eq__(self, other):
        return isinstance(other, StationaryPolicy) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())


def check_policy(model: Model, policy: StationaryPolicy) -> None:
    if policy.probs.shape != (model.n_states, model.n_actions):
        raise ModelError(
            f"policy shape {policy.probs.shape} does not match model ({model.n_states}, {model.n_actions})"
        )
    for s in range(model.n_states):
        row = policy.probs[s]
        if np.any(row < 0) or abs(math.fsum(row) - 1.0) > CONSTRUCTION_TOL:
            raise ModelError(f"policy row at state {model.states[s]} is not a distribution")
        bad = set(policy.support(s)) - set(model.enabled(s))
        if bad:
            names = ", ".join(model.actions[a] for a in sorted(bad))
            raise ModelError(f"policy uses disabled action(s) {names} at state {model.states[s]}")


def induce_dtmc(model: Model, policy: StationaryPolicy) -> Dtmc:
    """Markov chain obtained by fixing a stationary policy in a point MDP."""
    if model.kind != "mdp":
        raise ModelError(f"induce_dtmc needs a point mdp, got kind={model.kind!r}")
    check_policy(model, policy)
    n = model.n_states
    P = np.zeros((n, n))
    r = np.zeros(n)
    for s in range(n):
        for a in policy.support(s):
            w = policy.probs[s, a]
            row = model.rows[(s, a)]
            if w == 1.0:
                P[s, list(row.support)] = row.probs
                r[s] = model.rewards[(s, a)]
            else:
                for t, p in zip(row.support, row.probs):
                    P[s, t] += w * p
                r[s] += w * model.rewards[(s, a)]
    return Dtmc(model.states, model.initial, P, r)
