"""PAC interval-MDP learning from samples of a hidden point MDP."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Model, ModelError, validate
from .solver import DEFAULT_EPSILON, DEFAULT_MAX_ITER, Mode, Objective, SolveResult, solve
from .uncertainty import IntervalRow

StateAction = tuple[int, int]


@dataclass(frozen=True)
class PacConfig:
    delta: float
    n_per_sa: int
    eps_min: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if int(self.n_per_sa) != self.n_per_sa or self.n_per_sa < 1:
            raise ValueError(f"n_per_sa must be a positive integer, got {self.n_per_sa}")
        if not 0.0 < self.eps_min < 1.0:
            raise ValueError(f"eps_min must lie in (0, 1), got {self.eps_min}")


@dataclass(frozen=True, eq=False)
class SampleCounts:
    """Per-row sample totals and per-successor counts (aligned with row support)."""

    totals: dict[StateAction, int]
    counts: dict[StateAction, tuple[int, ...]]
    seed: int


def _truth_check(truth: Model) -> None:
    if truth.kind != "mdp":
        raise ModelError(f"the ground truth must be a point mdp, got kind={truth.kind!r}")
    diags = validate(truth)
    if diags:
        raise ModelError("invalid ground truth: " + "; ".join(map(str, diags)))


def sample_counts(truth: Model, n_per_sa: int, seed: int) -> SampleCounts:
    """Draw ``n_per_sa`` successors from every row of ``truth``.

    Each row has its own generator seeded by ``(seed, s, a)``, so rows can be
    sampled in any order with identical results.
    """
    _truth_check(truth)
    if n_per_sa < 1:
        raise ValueError("n_per_sa must be at least 1")
    totals, counts = {}, {}
    for (s, a), row in sorted(truth.rows.items()):
        rng = np.random.default_rng([seed, s, a])
        p = np.asarray(row.probs, dtype=float)
        drawn = rng.multinomial(n_per_sa, p / p.sum())
        totals[(s, a)] = int(n_per_sa)
        counts[(s, a)] = tuple(int(c) for c in drawn)
    return SampleCounts(totals, counts, seed)


def hoeffding_radius(n: int, delta_prime: float) -> float:
    return math.sqrt(math.log(2.0 / delta_prime) / (2.0 * n))


def transition_delta(truth: Model, delta: float) -> float:
    """Per-transition failure probability after a union bound over all transitions."""
    n_transitions = sum(len(row.support) for row in truth.rows.values())
    return delta / n_transitions


def hoeffding_imdp(counts: SampleCounts, cfg: PacConfig, truth: Model) -> Model:
    """Interval MDP whose intervals are Hoeffding confidence intervals.

    The support of every row is taken from ``truth``; lower bounds are
    floored at ``cfg.eps_min`` so that no transition disappears.
    """
    delta_prime = transition_delta(truth, cfg.delta)
    rows = {}
    for sa, row in sorted(truth.rows.items()):
        n = counts.totals.get(sa, 0)
        if n <= 0:
            s, a = sa
            raise ModelError(f"no samples for ({truth.states[s]},{truth.actions[a]})")
        c = hoeffding_radius(n, delta_prime)
        lower, upper = [], []
        for k in counts.counts[sa]:
            p_hat = k / n
            lo = max(p_hat - c, cfg.eps_min)
            lower.append(lo)
            upper.append(max(min(p_hat + c, 1.0), lo))
        rows[sa] = IntervalRow(tuple(row.support), tuple(lower), tuple(upper))
    return Model("imdp", truth.states, truth.actions, truth.initial, rows, truth.rewards)


def contains(imdp: Model, truth: Model) -> bool:
    """Whether every true transition probability lies inside its learned interval."""
    for sa, row in truth.rows.items():
        learned = imdp.rows[sa]
        for p, lo, hi in zip(row.probs, learned.lower, learned.upper):
            if not lo <= p <= hi:
                return False
    return True


@dataclass(frozen=True, eq=False)
class PacResult:
    imdp: Model
    counts: SampleCounts
    delta_prime: float
    robust: SolveResult
    nominal: SolveResult


def pac_pipeline(
    truth: Model,
    cfg: PacConfig,
    objective: Objective,
    seed: int,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PacResult:
    """Sample, build the Hoeffding IMDP and solve it robustly.

    The nominal solution of the truth is returned alongside for comparison.
    """
    counts = sample_counts(truth, cfg.n_per_sa, seed)
    imdp = hoeffding_imdp(counts, cfg, truth)
    robust = solve(imdp, objective, Mode.ROBUST, "vi", epsilon, max_iter)
    nominal = solve(truth, objective, Mode.NOMINAL, "vi", epsilon, max_iter)
    return PacResult(imdp, counts, transition_delta(truth, cfg.delta), robust, nominal)
