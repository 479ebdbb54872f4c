"""Seeded random benchmark models."""
from __future__ import annotations

import numpy as np

from .model import Model
from .uncertainty import IntervalRow, L1Row, PointRow

MIN_PROB = 0.01
MAX_SUPPORT = 50


def random_model(
    n_states: int,
    n_actions: int,
    kind: str = "imdp",
    density: float = 0.3,
    seed: int = 0,
    width: float = 0.1,
) -> Model:
    """Random model whose last state is an absorbing target.

    Every row of every other state has an edge into the last state, so all
    policies reach it almost surely. Point probabilities are at least 0.01;
    interval rows have width at most ``width`` and lower bounds at least
    0.01; L1 radii stay below ``width`` and below twice the smallest centre
    mass.
    """
    if n_states < 2:
        raise ValueError("need at least 2 states")
    if n_actions < 1:
        raise ValueError("need at least 1 action")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    if kind not in ("mdp", "imdp", "l1"):
        raise ValueError(f"cannot generate kind {kind!r}")
    if not 0.0 <= width <= 1.0:
        raise ValueError("width must lie in [0, 1]")
    if kind == "mdp" and width != 0.0:
        raise ValueError("point mdps have no uncertainty; use width 0")

    rng = np.random.default_rng(seed)
    goal = n_states - 1
    states = tuple(f"s{i}" for i in range(n_states))
    actions = tuple(f"a{k}" for k in range(n_actions))
    rows, rewards = {}, {}
    for s in range(goal):
        for a in range(n_actions):
            picks = [t for t in range(goal) if rng.random() < density]
            if len(picks) >= MAX_SUPPORT:
                picks = sorted(rng.choice(picks, MAX_SUPPORT - 1, replace=False).tolist())
            support = tuple(picks) + (goal,)
            m = len(support)
            w = rng.uniform(0.1, 1.0, size=m)
            probs = MIN_PROB + (1.0 - MIN_PROB * m) * w / w.sum()
            probs[-1] = 1.0 - probs[:-1].sum()
            rewards[(s, a)] = float(rng.uniform(0.0, 1.0))
            if kind == "mdp":
                rows[(s, a)] = PointRow(support, tuple(probs.tolist()))
            elif kind == "imdp":
                below = rng.uniform(0.0, width / 2.0, size=m)
                above = rng.uniform(0.0, width / 2.0, size=m)
                lower = np.maximum(MIN_PROB, probs - below)
                upper = np.minimum(1.0, probs + above)
                rows[(s, a)] = IntervalRow(support, tuple(lower.tolist()), tuple(upper.tolist()))
            else:
                radius = min(float(rng.uniform(0.0, width)), 0.99 * 2.0 * float(probs.min()))
                rows[(s, a)] = L1Row(support, tuple(probs.tolist()), radius)
    if kind == "mdp":
        rows[(goal, 0)] = PointRow((goal,), (1.0,))
    elif kind == "imdp":
        rows[(goal, 0)] = IntervalRow((goal,), (1.0,), (1.0,))
    else:
        rows[(goal, 0)] = L1Row((goal,), (1.0,), 0.0)
    rewards[(goal, 0)] = 0.0
    return Model(kind, states, actions, 0, rows, rewards)
