"""Exact canonical linear program over (response type, natural treatment).

Variable ``q(r, x)`` is the probability that a unit has response type ``r``
and naturally takes treatment ``x``. The feasible set is every structural
model consistent with both data tables, so minimizing and maximizing a
linear objective gives the tight range of that quantity. Solved with a dense
two-phase simplex over Fractions using Bland's rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .core import (
    Assignment,
    ArityMismatch,
    BenefitFunction,
    ExperimentalDistribution,
    Interval,
    ObservationalDistribution,
    SizeLimitExceeded,
    UnitSelectionError,
    all_assignments,
)
from .pcbounds import CounterfactualQuery

ZERO = Fraction(0)

# guard on n**m * m variables
MAX_LP_VARIABLES = 4096


class Infeasible(UnitSelectionError, ValueError):
    """No distribution over response types matches both tables."""


@dataclass(frozen=True)
class CanonicalLP:
    variables: tuple[tuple[Assignment, int], ...]  # (response type, natural treatment)
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    labels: tuple[str, ...]
    objective: tuple[Fraction, ...]

    def with_objective(self, objective: Sequence[Fraction]) -> "CanonicalLP":
        return CanonicalLP(self.variables, self.rows, self.rhs, self.labels, tuple(objective))


@dataclass(frozen=True)
class LPSolution:
    status: str  # "optimal" or "infeasible"
    objective: Fraction | None
    point: tuple[Fraction, ...] | None  # basic feasible solution


def build_lp(f: BenefitFunction | None, exp: ExperimentalDistribution, obs: ObservationalDistribution,
             *, limit: int = MAX_LP_VARIABLES) -> CanonicalLP:
    """Constraints from both tables; objective from ``f`` (zero if ``f`` is None)."""
    m, n = exp.m, exp.n
    if (obs.m, obs.n) != (m, n) or (f is not None and (f.m, f.n) != (m, n)):
        raise ArityMismatch("benefit function and data tables differ in shape")
    if n**m * m > limit:
        raise SizeLimitExceeded(f"{n**m * m} LP variables exceed the limit {limit}")
    variables = tuple((r, x) for r in all_assignments(m, n) for x in range(1, m + 1))
    rows, rhs, labels = [], [], []

    def add(label, member: Callable[[Assignment, int], bool], value):
        rows.append(tuple(Fraction(1) if member(r, x) else ZERO for r, x in variables))
        rhs.append(Fraction(value))
        labels.append(label)

    add("total", lambda r, x: True, 1)
    for j in range(1, m + 1):
        for i in range(1, n + 1):
            add(f"P(y{i}|do(x{j}))", lambda r, x, j=j, i=i: r[j - 1] == i, exp.p(j, i))
    for j in range(1, m + 1):
        for i in range(1, n + 1):
            add(f"P(x{j},y{i})", lambda r, x, j=j, i=i: x == j and r[j - 1] == i, obs.joint(j, i))
    objective = [ZERO] * len(variables)
    if f is not None:
        coef = {t.assignment: t.coefficient for t in f.terms}
        objective = [coef.get(r, ZERO) for r, _ in variables]
    return CanonicalLP(variables, tuple(rows), tuple(rhs), tuple(labels), tuple(objective))


# ---------------------------------------------------------------------------
# Simplex
# ---------------------------------------------------------------------------

class _Tableau:
    """Rows ``[a_1 .. a_N | b]`` with ``basis[k]`` the basic column of row k."""

    def __init__(self, rows, basis):
        self.rows = rows
        self.basis = basis

    def pivot(self, k: int, col: int):
        row = self.rows[k]
        piv = row[col]
        row = [v / piv if v else v for v in row]
        self.rows[k] = row
        nonzero = [c for c, v in enumerate(row) if v]
        for t, other in enumerate(self.rows):
            if t != k and other[col]:
                factor = other[col]
                for c in nonzero:
                    other[c] = other[c] - factor * row[c]
        self.basis[k] = col

    def reduced_costs(self, cost):
        """Reduced-cost row ``c - c_B B^-1 A`` for minimizing ``cost``."""
        out = list(cost) + [ZERO]
        for b, row in zip(self.basis, self.rows):
            cb = cost[b]
            if cb:
                for c, v in enumerate(row[:-1]):
                    if v:
                        out[c] -= cb * v
        return out

    def minimize(self, cost, allowed):
        """Bland's rule: lowest-index entering column, lowest-index leaving basic."""
        allowed = sorted(allowed)
        rc = self.reduced_costs(cost)
        while True:
            entering = next((c for c in allowed if rc[c] < 0), None)
            if entering is None:
                return
            best = None
            for k, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[k])
                    if best is None or key < best[0]:
                        best = (key, k)
            if best is None:
                raise ArithmeticError("unbounded objective")  # excluded by the total-mass row
            self.pivot(best[1], entering)
            factor = rc[entering]
            for c, v in enumerate(self.rows[best[1]][:-1]):
                if v:
                    rc[c] -= factor * v

    def value(self, cost) -> Fraction:
        return sum((cost[b] * row[-1] for b, row in zip(self.basis, self.rows)), ZERO)

    def point(self, width: int) -> tuple[Fraction, ...]:
        x = [ZERO] * width
        for b, row in zip(self.basis, self.rows):
            if b < width:
                x[b] = row[-1]
        return tuple(x)


def _phase_one(lp: CanonicalLP) -> _Tableau:
    width = len(lp.variables)
    height = len(lp.rows)
    rows = []
    for k, (row, b) in enumerate(zip(lp.rows, lp.rhs)):
        sign = -1 if b < 0 else 1
        art = [ZERO] * height
        art[k] = Fraction(1)
        rows.append([sign * v for v in row] + art + [sign * b])
    tab = _Tableau(rows, [width + k for k in range(height)])
    cost = [ZERO] * width + [Fraction(1)] * height
    tab.minimize(cost, range(width + height))
    if tab.value(cost) != 0:
        raise Infeasible("no response-type distribution matches both tables")
    # drive remaining artificials out of the basis; rows with no candidate are redundant
    k = 0
    while k < len(tab.rows):
        if tab.basis[k] >= width:
            col = next((c for c in range(width) if tab.rows[k][c] != 0), None)
            if col is None:
                del tab.rows[k]
                del tab.basis[k]
                continue
            tab.pivot(k, col)
        k += 1
    tab.rows = [row[:width] + [row[-1]] for row in tab.rows]
    return tab


def _copy(tab: _Tableau) -> _Tableau:
    return _Tableau([list(r) for r in tab.rows], list(tab.basis))


def solve(lp: CanonicalLP, sense: str = "min") -> LPSolution:
    """Optimize the LP objective exactly; ``sense`` is "min" or "max"."""
    try:
        feasible = _phase_one(lp)
    except Infeasible:
        return LPSolution("infeasible", None, None)
    return _phase_two(lp, feasible, sense)


def _phase_two(lp: CanonicalLP, feasible: _Tableau, sense: str) -> LPSolution:
    width = len(lp.variables)
    sign = {"min": 1, "max": -1}[sense]
    cost = [sign * c for c in lp.objective]
    tab = _copy(feasible)
    tab.minimize(cost, range(width))
    return LPSolution("optimal", sign * tab.value(cost), tab.point(width))


def solve_minmax(lp: CanonicalLP) -> Interval:
    """Tight range of the objective; raises :class:`Infeasible`."""
    feasible = _phase_one(lp)
    lo = _phase_two(lp, feasible, "min").objective
    hi = _phase_two(lp, feasible, "max").objective
    return Interval(lo, hi)


def query_objective(lp: CanonicalLP, query: CounterfactualQuery) -> tuple[Fraction, ...]:
    """Indicator objective of a counterfactual event; observed Y means ``r[x] == q``."""
    out = []
    for r, x in lp.variables:
        hit = all(r[j - 1] == i for j, i in query.pairs)
        if query.observed_x is not None:
            hit = hit and x == query.observed_x
        if query.observed_y is not None:
            hit = hit and r[x - 1] == query.observed_y
        out.append(Fraction(1) if hit else ZERO)
    return tuple(out)


class Oracle:
    """Tight ranges on one dataset; phase one runs once and is shared by every objective."""

    def __init__(self, exp: ExperimentalDistribution, obs: ObservationalDistribution):
        self.lp = build_lp(None, exp, obs)
        self._feasible = _phase_one(self.lp)  # raises Infeasible

    def objective_bounds(self, objective: Sequence[Fraction]) -> Interval:
        lp = self.lp.with_objective(objective)
        return Interval(_phase_two(lp, self._feasible, "min").objective,
                        _phase_two(lp, self._feasible, "max").objective)

    def query(self, query: CounterfactualQuery) -> Interval:
        return self.objective_bounds(query_objective(self.lp, query))

    def benefit(self, f: BenefitFunction) -> Interval:
        if (f.m, f.n) != _shape(self.lp):
            raise ArityMismatch("benefit function and data tables differ in shape")
        coef = {t.assignment: t.coefficient for t in f.terms}
        return self.objective_bounds([coef.get(r, ZERO) for r, _ in self.lp.variables])


def _shape(lp: CanonicalLP) -> tuple[int, int]:
    r, _ = lp.variables[-1]
    return len(r), max(r)


def oracle_query_bounds(query: CounterfactualQuery, exp: ExperimentalDistribution,
                        obs: ObservationalDistribution) -> Interval:
    return Oracle(exp, obs).query(query)


def oracle_benefit_bounds(f: BenefitFunction, exp: ExperimentalDistribution,
                          obs: ObservationalDistribution) -> Interval:
    return solve_minmax(build_lp(f, exp, obs))
