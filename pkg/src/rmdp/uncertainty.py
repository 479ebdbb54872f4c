"""Local uncertainty sets and their inner problems.

Each state-action pair owns one row: a point distribution, an interval
row (per-successor lower/upper bounds) or an L1 ball around a centre
distribution. The inner problem is the min (or max) of the expected
successor value over the row's set of distributions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

MIN = "min"
MAX = "max"

STOCHASTIC_TOL = 1e-12


class InfeasibleRowError(ValueError):
    pass


def _check_direction(direction: str) -> None:
    if direction not in (MIN, MAX):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")


def _check_values(values: Sequence[float], m: int) -> None:
    if len(values) != m:
        raise ValueError(f"expected {m} successor values, got {len(values)}")
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"successor values must be finite, got {v}")


@dataclass(frozen=True)
class PointRow:
    support: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs differ in length")


@dataclass(frozen=True)
class IntervalRow:
    support: tuple[int, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if not len(self.support) == len(self.lower) == len(self.upper):
            raise ValueError("support, lower and upper differ in length")


@dataclass(frozen=True)
class L1Row:
    support: tuple[int, ...]
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if len(self.support) != len(self.center):
            raise ValueError("support and center differ in length")


UncertainRow = Union[PointRow, IntervalRow, L1Row]


@dataclass(frozen=True)
class InnerResult:
    """Extremal distribution over a row's support and its expectation."""

    probs: tuple[float, ...]
    value: float


def row_problems(row: UncertainRow) -> list[str]:
    """Feasibility problems of a single row, as short rule strings."""
    problems = []
    if len(row.support) == 0:
        return ["empty-support"]
    if len(set(row.support)) != len(row.support):
        problems.append("duplicate-successor")
    if isinstance(row, PointRow):
        if any(not (0.0 < p <= 1.0) for p in row.probs):
            problems.append("probability-out-of-range")
        if abs(math.fsum(row.probs) - 1.0) > STOCHASTIC_TOL:
            problems.append("row-not-stochastic")
    elif isinstance(row, IntervalRow):
        for lo, hi in zip(row.lower, row.upper):
            if lo <= 0.0 < hi:
                problems.append("zero-lower-nonzero-upper")
            elif not (0.0 < lo <= hi <= 1.0):
                problems.append("interval-out-of-range")
        if math.fsum(row.lower) > 1.0 + STOCHASTIC_TOL:
            problems.append("lower-bounds-exceed-one")
        if math.fsum(row.upper) < 1.0 - STOCHASTIC_TOL:
            problems.append("upper-bounds-below-one")
    elif isinstance(row, L1Row):
        if any(not (0.0 <= p <= 1.0) for p in row.center):
            problems.append("probability-out-of-range")
        if abs(math.fsum(row.center) - 1.0) > STOCHASTIC_TOL:
            problems.append("row-not-stochastic")
        if not (0.0 <= row.radius <= 2.0):
            problems.append("radius-out-of-range")
    else:
        problems.append("unknown-row-type")
    return problems


def check_graph_preserving(row: UncertainRow) -> tuple[bool, str]:
    """Whether every member of the row's set has exactly the declared support."""
    if isinstance(row, PointRow):
        return True, ""
    if isinstance(row, IntervalRow):
        bad = [s for s, lo in zip(row.support, row.lower) if lo <= 0.0]
        if bad:
            return False, f"successors {bad} have a zero lower bound"
        return True, ""
    if isinstance(row, L1Row):
        smallest = min(row.center)
        if row.radius >= 2.0 * smallest:
            return False, (
                f"radius {row.radius} >= 2 * min centre mass {smallest}; "
                "a successor can lose all of its mass"
            )
        return True, ""
    raise TypeError(f"not an uncertain row: {row!r}")


def _order(values: Sequence[float], direction: str) -> list[int]:
    # ties broken by ascending successor position in both directions
    if direction == MIN:
        return sorted(range(len(values)), key=lambda i: (values[i], i))
    return sorted(range(len(values)), key=lambda i: (-values[i], i))


def _expectation(probs: Sequence[float], values: Sequence[float]) -> float:
    return math.fsum(p * v for p, v in zip(probs, values))


def inner_point(row: PointRow, values: Sequence[float]) -> InnerResult:
    _check_values(values, len(row.support))
    return InnerResult(row.probs, _expectation(row.probs, values))


def inner_interval(row: IntervalRow, values: Sequence[float], direction: str = MIN) -> InnerResult:
    """Extremal expectation over an interval row.

    Successors are visited from the most favourable value for the given
    direction onwards; each is raised from its lower to its upper bound as
    long as the free budget ``1 - sum(lower)`` allows. The first successor
    that cannot be raised fully takes the leftover budget and the rest stay
    at their lower bounds.
    """
    _check_direction(direction)
    m = len(row.support)
    _check_values(values, m)
    lower, upper = row.lower, row.upper
    lo_sum = math.fsum(lower)
    if lo_sum > 1.0 + STOCHASTIC_TOL or math.fsum(upper) < 1.0 - STOCHASTIC_TOL:
        raise InfeasibleRowError(f"interval row {row.support} has no feasible distribution")

    order = _order(values, direction)
    probs = list(lower)
    budget = 1.0 - lo_sum
    k = 0
    while k < m:
        i = order[k]
        gap = upper[i] - lower[i]
        if budget - gap < 0.0:
            break
        probs[i] = upper[i]
        budget -= gap
        k += 1
    if k < m:
        i = order[k]
        probs[i] = lower[i] + max(budget, 0.0)
    elif budget > 0.0:
        # sum(upper) == 1 up to rounding; hand the crumbs to the best successor
        i = order[0]
        probs[i] = min(upper[i], probs[i] + budget)
    return InnerResult(tuple(probs), _expectation(probs, values))


def inner_l1(row: L1Row, values: Sequence[float], direction: str = MIN) -> InnerResult:
    """Extremal expectation over an L1 ball (intersected with the simplex).

    The most favourable successor receives up to half the radius on top of
    its centre mass, then mass is removed from the least favourable end
    until the distribution sums to one again.
    """
    _check_direction(direction)
    m = len(row.support)
    _check_values(values, m)
    if not (0.0 <= row.radius <= 2.0):
        raise InfeasibleRowError(f"L1 radius must lie in [0, 2], got {row.radius}")

    order = _order(values, direction)
    probs = list(row.center)
    first = order[0]
    probs[first] = min(1.0, probs[first] + row.radius / 2.0)
    k = m - 1
    while k > 0 and math.fsum(probs) > 1.0 + STOCHASTIC_TOL / 4:
        i = order[k]
        others = math.fsum(probs) - probs[i]
        probs[i] = max(0.0, 1.0 - others)
        k -= 1
    return InnerResult(tuple(probs), _expectation(probs, values))


def inner_extremum(row: UncertainRow, values: Sequence[float], direction: str = MIN) -> InnerResult:
    if isinstance(row, PointRow):
        return inner_point(row, values)
    if isinstance(row, IntervalRow):
        return inner_interval(row, values, direction)
    if isinstance(row, L1Row):
        return inner_l1(row, values, direction)
    raise TypeError(f"not an uncertain row: {row!r}")
