"""Brute-force reference implementations for checking the fast solvers.

Nothing here calls the inner-problem solvers, the graph analysis or the
value/policy iteration code; every result is obtained by enumeration or a
direct linear solve. All oracles are exponential and guarded.
"""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numba
import numpy as np

from .model import Dtmc, Model
from .uncertainty import InnerResult, IntervalRow, L1Row, PointRow

VERTEX_DEDUP_TOL = 1e-12
FEASIBILITY_TOL = 1e-12


class OracleError(RuntimeError):
    pass


def interval_vertices(lowers: Sequence[float], uppers: Sequence[float], max_successors: int = 8) -> list[tuple[float, ...]]:
    """Vertices of ``{p : lowers <= p <= uppers, sum(p) = 1}``.

    Every vertex has all but (at most) one coordinate at a bound; we try each
    balancing coordinate with every bound assignment of the others.
    """
    m = len(lowers)
    if m != len(uppers):
        raise ValueError("lowers and uppers differ in length")
    if m > max_successors:
        raise OracleError(f"{m} successors exceed the vertex-enumeration guard of {max_successors}")
    verts: list[tuple[float, ...]] = []
    for j in range(m):
        others = [i for i in range(m) if i != j]
        for bits in itertools.product((0, 1), repeat=m - 1):
            p = [0.0] * m
            for i, b in zip(others, bits):
                p[i] = uppers[i] if b else lowers[i]
            p[j] = 1.0 - math.fsum(p[i] for i in others)
            if lowers[j] - FEASIBILITY_TOL <= p[j] <= uppers[j] + FEASIBILITY_TOL:
                p[j] = min(max(p[j], lowers[j]), uppers[j])
                if not any(max(abs(x - y) for x, y in zip(p, v)) <= VERTEX_DEDUP_TOL for v in verts):
                    verts.append(tuple(p))
    return verts


def _vertices(row) -> list[tuple[float, ...]]:
    if isinstance(row, PointRow):
        return [tuple(row.probs)]
    if isinstance(row, IntervalRow):
        return interval_vertices(row.lower, row.upper)
    raise OracleError(f"no vertex enumeration for {type(row).__name__}")


def brute_inner_interval(row: IntervalRow, values: Sequence[float], direction: str = "min") -> InnerResult:
    verts = interval_vertices(row.lower, row.upper)
    if not verts:
        raise OracleError("interval row has no feasible vertex")
    scored = [(math.fsum(p * v for p, v in zip(vert, values)), vert) for vert in verts]
    pick = min if direction == "min" else max
    value, vert = pick(scored, key=lambda x: x[0])
    return InnerResult(vert, value)


@numba.njit(cache=True)
def _grid_search(center, radius, values, sign, q):  # pragma: no cover - compiled
    m = center.shape[0]
    tol = 1e-12
    best = np.inf
    best_k = np.zeros(m, dtype=np.int64)
    found = False
    if m == 1:
        best_k[0] = q
        return values[0] * sign, best_k, True
    outer = m - 2
    n0 = q + 1 if outer >= 1 else 1
    for i0 in range(n0):
        used0 = abs(i0 / q - center[0]) if outer >= 1 else 0.0
        if used0 > radius + tol:
            continue
        n1 = q + 1 - i0 if outer >= 2 else 1
        for i1 in range(n1):
            used1 = abs(i1 / q - center[1]) if outer >= 2 else 0.0
            budget = radius - used0 - used1
            if budget < -tol:
                continue
            rest = q - i0 - i1
            r = rest / q
            a_ = center[m - 2]
            b_ = r - center[m - 1]
            if abs(a_ - b_) > budget + tol:
                continue
            lo = max(0.0, (a_ + b_ - budget) / 2.0)
            hi = min(r, (a_ + b_ + budget) / 2.0)
            x_lo = int(math.ceil((lo - tol) * q))
            x_hi = int(math.floor((hi + tol) * q))
            if x_lo < 0:
                x_lo = 0
            if x_hi > rest:
                x_hi = rest
            if x_lo > x_hi:
                continue
            base = 0.0
            if outer >= 1:
                base += values[0] * (i0 / q)
            if outer >= 2:
                base += values[1] * (i1 / q)
            slope = sign * (values[m - 2] - values[m - 1])
            x = x_lo if slope > 0 else x_hi
            val = sign * (base + values[m - 2] * (x / q) + values[m - 1] * ((rest - x) / q))
            if val < best:
                best = val
                found = True
                if outer >= 1:
                    best_k[0] = i0
                if outer >= 2:
                    best_k[1] = i1
                best_k[m - 2] = x
                best_k[m - 1] = rest - x
    return best, best_k, found


def grid_inner_l1(
    center: Sequence[float],
    radius: float,
    values: Sequence[float],
    direction: str = "min",
    q: int = 2000,
) -> InnerResult:
    """Best point of the step-``1/q`` simplex grid inside the L1 ball.

    The ball is dilated by ``m/q`` so that the grid neighbour of the true
    optimum is always a candidate; the result is then within
    ``max|values| * m / q`` of the exact optimum.
    """
    m = len(center)
    if m > 4:
        raise OracleError(f"{m} successors exceed the grid-search guard of 4")
    if len(values) != m:
        raise ValueError("center and values differ in length")
    sign = 1.0 if direction == "min" else -1.0
    c = np.asarray(center, dtype=float)
    v = np.asarray(values, dtype=float)
    best, k, found = _grid_search(c, float(radius) + m / q, v, sign, int(q))
    if not found:
        raise OracleError("no grid point inside the L1 ball")
    probs = tuple(float(x) / q for x in k)
    return InnerResult(probs, float(sign * best))


def _reach_matrix(P: np.ndarray) -> np.ndarray:
    """Boolean reflexive-transitive closure of the nonzero pattern of ``P``."""
    n = P.shape[0]
    R = (P > 0) | np.eye(n, dtype=bool)
    while True:
        R2 = (R.astype(np.int64) @ R.astype(np.int64)) > 0
        if np.array_equal(R2, R):
            return R
        R = R2


def _dtmc_sets(P: np.ndarray, target: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """(positive, certain) reachability masks of ``target`` in a Markov chain."""
    n = P.shape[0]
    t = np.zeros(n, dtype=bool)
    t[list(target)] = True
    # make targets absorbing so paths stop at the first visit
    Q = P.copy()
    Q[t] = 0.0
    Q[t, np.flatnonzero(t)] = 1.0
    R = _reach_matrix(Q)
    positive = R[:, t].any(axis=1)
    certain = ~(R[:, ~positive].any(axis=1))
    return positive, certain


def exact_dtmc_value(dtmc: Dtmc, objective) -> np.ndarray:
    """Exact per-state value of a Markov chain by a direct linear solve."""
    n = len(dtmc.states)
    if n > 200:
        raise OracleError(f"{n} states exceed the exact-solve guard of 200")
    P, r = dtmc.matrix, dtmc.rewards
    name = getattr(objective, "name", None)
    if name == "discounted":
        return _solve(np.eye(n) - objective.gamma * P, r)
    if name not in ("reach-reward", "reachability"):
        raise OracleError(f"unsupported objective {objective!r}")
    target = sorted(objective.target)
    is_t = np.zeros(n, dtype=bool)
    is_t[target] = True
    positive, certain = _dtmc_sets(P, target)
    v = np.zeros(n)
    if name == "reach-reward":
        unknown = np.flatnonzero(certain & ~is_t)
        v[~certain & ~is_t] = math.inf
        if unknown.size:
            A = np.eye(unknown.size) - P[np.ix_(unknown, unknown)]
            v[unknown] = _solve(A, r[unknown])
        return v
    v[is_t] = 1.0
    unknown = np.flatnonzero(positive & ~is_t)
    if unknown.size:
        A = np.eye(unknown.size) - P[np.ix_(unknown, unknown)]
        b = P[np.ix_(unknown, np.flatnonzero(is_t))].sum(axis=1)
        v[unknown] = _solve(A, b)
    return v


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    # LAPACK gesv: LU with partial pivoting
    if np.linalg.cond(A) > 1e14:
        raise OracleError("singular system; preprocessing left a non-transient state")
    return np.linalg.solve(A, b)


def brute_force_robust_value(
    model: Model,
    objective,
    policy_guard: int = 64,
    nature_guard: int = 10_000,
) -> float:
    """Max over stationary deterministic agent policies of the min over
    stationary vertex choices of nature, at the initial state.
    """
    if model.kind not in ("mdp", "imdp"):
        raise OracleError(f"brute force needs an mdp or imdp, got kind={model.kind!r}")
    n = model.n_states
    enabled = [sorted(a for (s, a) in model.rows if s == st) for st in range(n)]
    if math.prod(len(e) for e in enabled) > policy_guard:
        raise OracleError("agent policy count exceeds the guard")
    verts = {sa: _vertices(row) for sa, row in model.rows.items()}
    best = -math.inf
    for actions in itertools.product(*enabled):
        pairs = [(s, a) for s, a in enumerate(actions)]
        if math.prod(len(verts[p]) for p in pairs) > nature_guard:
            raise OracleError("nature vertex-combination count exceeds the guard")
        r = np.array([model.rewards[p] for p in pairs])
        worst = math.inf
        for pick in itertools.product(*(verts[p] for p in pairs)):
            P = np.zeros((n, n))
            for (s, a), probs in zip(pairs, pick):
                P[s, list(model.rows[(s, a)].support)] = probs
            v = exact_dtmc_value(Dtmc(model.states, model.initial, P, r), objective)
            worst = min(worst, v[model.initial])
        best = max(best, worst)
    return best


def brute_reach_partition(model: Model, target, policy_guard: int = 4096) -> tuple[frozenset[int], frozenset[int]]:
    """(infinite, zero) state sets by enumerating deterministic policies.

    ``infinite``: non-target states where some policy misses the target with
    positive probability. ``zero``: states where every policy misses it surely.
    Only the support of each row matters, so rows are replaced by uniform
    distributions over their support.
    """
    n = model.n_states
    target = sorted(target)
    enabled = [sorted(a for (s, a) in model.rows if s == st) for st in range(n)]
    if math.prod(len(e) for e in enabled) > policy_guard:
        raise OracleError("agent policy count exceeds the guard")
    infinite = np.zeros(n, dtype=bool)
    reachable = np.zeros(n, dtype=bool)
    for actions in itertools.product(*enabled):
        P = np.zeros((n, n))
        for s, a in enumerate(actions):
            succ = list(model.rows[(s, a)].support)
            P[s, succ] = 1.0 / len(succ)
        positive, certain = _dtmc_sets(P, target)
        infinite |= ~certain
        reachable |= positive
    infinite[target] = False
    return frozenset(np.flatnonzero(infinite).tolist()), frozenset(np.flatnonzero(~reachable).tolist())
