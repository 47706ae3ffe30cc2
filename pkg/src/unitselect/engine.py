"""Identifiability and bounds of a benefit function via equivalent rewritings.

The n**(m-1) response types that share outcome y_i at treatment x_r sum to
the experimental probability P(y_i | do(x_r)). Replacing one of them by that
probability minus the others gives an equivalent function plus a constant.
:func:`identify` searches for a rewriting with every coefficient zero;
:func:`bound_benefit` takes the tightest interval over all rewritings.

The searches run on integer-scaled copies of the inputs (one common
denominator for probabilities, one for coefficients), which keeps them
exact while avoiding Fraction overhead in the inner loop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .core import (
    Assignment,
    ArityMismatch,
    BenefitFunction,
    BenefitTerm,
    ExperimentalDistribution,
    Interval,
    ObservationalDistribution,
    UnitSelectionError,
    all_assignments,
    check_size,
    common_denominator,
    format_decimal,
    require_valid,
    term_index,
)
from .pcbounds import BoundsEvaluator

log = logging.getLogger(__name__)


class BudgetExceeded(UnitSelectionError, RuntimeError):
    pass


@dataclass
class EngineConfig:
    memoize: bool = True
    max_states: int = 10**7
    states: int = field(default=0, compare=False)  # diagnostics, updated per run


@dataclass(frozen=True)
class ReductionGroup:
    position: int  # treatment index r
    outcome: int  # outcome index i
    members: tuple[int, ...]  # positions in the term list


@dataclass(frozen=True)
class ReductionStep:
    position: int
    outcome: int
    kept: Assignment
    coefficient: Fraction
    adjustment: Fraction

    def __str__(self):
        return (f"x{self.position}=y{self.outcome}: replace {self.kept} "
                f"(coef {self.coefficient}) -> {self.coefficient}*P(y{self.outcome}|do(x{self.position}))"
                f" = {self.adjustment}")


@dataclass(frozen=True)
class IdentifiabilityResult:
    identifiable: bool
    value: Fraction  # meaningful only when identifiable
    steps: tuple[ReductionStep, ...] = ()
    states: int = 0


@dataclass(frozen=True)
class BoundsResult:
    interval: Interval
    base: Interval  # interval of the unreduced function
    partial: bool = False  # search stopped at the state budget
    lower_steps: tuple[ReductionStep, ...] = ()
    upper_steps: tuple[ReductionStep, ...] = ()
    states: int = 0

    @property
    def lower(self) -> Fraction:
        return self.interval.lower

    @property
    def upper(self) -> Fraction:
        return self.interval.upper


# ---------------------------------------------------------------------------
# Term-list operations
# ---------------------------------------------------------------------------

def find_groups(f: BenefitFunction) -> list[ReductionGroup]:
    """Groups of terms whose full set is present, in (position, outcome) order."""
    where = {t.assignment: k for k, t in enumerate(f.terms)}
    groups = []
    for r, i, slots in _group_slots(f.m, f.n):
        members = []
        for s in slots:
            k = where.get(_assignments(f.m, f.n)[s])
            if k is None:
                break
            members.append(k)
        else:
            groups.append(ReductionGroup(r, i, tuple(members)))
    return groups


def reduce(f: BenefitFunction, group: ReductionGroup, keep: int,
           exp: ExperimentalDistribution) -> tuple[BenefitFunction, Fraction]:
    """Drop term ``keep`` of ``group``, shifting its coefficient onto the others.

    Returns the rewritten function and the constant it was offset by, so that
    ``f == new_f + adjustment`` for every distribution consistent with ``exp``.
    """
    if keep not in group.members:
        raise ValueError(f"term {keep} is not a member of the group")
    alpha = f.terms[keep].coefficient
    others = set(group.members) - {keep}
    terms = tuple(
        BenefitTerm(t.coefficient - alpha, t.assignment) if k in others else t
        for k, t in enumerate(f.terms) if k != keep
    )
    return BenefitFunction(f.m, f.n, terms), alpha * exp.p(group.position, group.outcome)


@lru_cache(maxsize=None)
def _assignments(m: int, n: int) -> tuple[Assignment, ...]:
    return tuple(all_assignments(m, n))


@lru_cache(maxsize=None)
def _group_slots(m: int, n: int) -> tuple[tuple[int, int, tuple[int, ...]], ...]:
    """(r, i, canonical slots) for every treatment/outcome pair."""
    table = _assignments(m, n)
    return tuple(
        (r, i, tuple(s for s, a in enumerate(table) if a[r - 1] == i))
        for r in range(1, m + 1) for i in range(1, n + 1)
    )


def _slots(f: BenefitFunction, scale: int) -> tuple:
    state = [None] * f.n**f.m
    for t in f.terms:
        state[term_index(t.assignment, f.n) - 1] = int(t.coefficient * scale)
    return tuple(state)


def _replay(f: BenefitFunction, path, exp: ExperimentalDistribution) -> tuple[ReductionStep, ...]:
    """Re-run a search path through :func:`reduce` with exact coefficients."""
    steps = []
    table = _assignments(f.m, f.n)
    while path:
        (r, i, slot), path = path
        group = next(g for g in find_groups(f) if (g.position, g.outcome) == (r, i))
        keep = next(k for k in group.members if f.terms[k].assignment == table[slot])
        alpha = f.terms[keep].coefficient
        f, adj = reduce(f, group, keep, exp)
        steps.append(ReductionStep(r, i, table[slot], alpha, adj))
    return tuple(steps)


def _children(state: tuple, groups):
    for r, i, slots in groups:
        if any(state[s] is None for s in slots):
            continue
        for keep in slots:
            ck = state[keep]
            child = list(state)
            for s in slots:
                child[s] = None if s == keep else state[s] - ck
            yield r, i, keep, ck, tuple(child)


# ---------------------------------------------------------------------------
# Identifiability
# ---------------------------------------------------------------------------

def identify(f: BenefitFunction, exp: ExperimentalDistribution,
             cfg: EngineConfig | None = None) -> IdentifiabilityResult:
    """Depth-first search for a rewriting whose coefficients are all zero.

    A negative answer means no rewriting of this kind exists; it does not by
    itself prove the benefit function is unidentifiable.
    """
    cfg = cfg or EngineConfig()
    if (f.m, f.n) != (exp.m, exp.n):
        raise ArityMismatch("benefit function and experimental data differ in shape")
    check_size(f.m, f.n)
    scale = common_denominator(t.coefficient for t in f.terms)
    groups = _group_slots(f.m, f.n)
    failed: set = set()
    count = 0

    def search(state):
        nonlocal count
        if all(not c for c in state):  # None or 0
            return ()
        if cfg.memoize and state in failed:
            return None
        count += 1
        if count > cfg.max_states:
            raise BudgetExceeded(f"identifiability search exceeded {cfg.max_states} states")
        for r, i, keep, _, child in _children(state, groups):
            found = search(child)
            if found is not None:
                return ((r, i, keep), found)
        if cfg.memoize:
            failed.add(state)
        return None

    path = search(_slots(f, scale))
    cfg.states = count
    if path is None:
        return IdentifiabilityResult(False, Fraction(0), (), count)
    steps = _replay(f, path, exp)
    return IdentifiabilityResult(True, sum((s.adjustment for s in steps), Fraction(0)), steps, count)


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------

def bound_benefit(f: BenefitFunction, exp: ExperimentalDistribution, obs: ObservationalDistribution,
                  cfg: EngineConfig | None = None, *, joint_bounds=None) -> BoundsResult:
    """Tightest interval over every reachable rewriting of ``f``.

    Each rewriting is bounded termwise from the response-type intervals: a
    positive coefficient takes the lower endpoint for the lower bound, a
    negative one the upper endpoint. ``joint_bounds`` may supply precomputed
    response-type intervals. If the state budget runs out, the best interval
    found so far is returned with ``partial=True``; it is still valid.
    """
    cfg = cfg or EngineConfig()
    if (f.m, f.n) != (exp.m, exp.n):
        raise ArityMismatch("benefit function and data differ in shape")
    check_size(f.m, f.n)
    require_valid(exp, obs)
    if joint_bounds is None:
        joint_bounds = BoundsEvaluator(exp, obs, validate=False).bounds_for_all_full_joints()
    table = _assignments(f.m, f.n)
    lb = [joint_bounds[a].lower for a in table]
    ub = [joint_bounds[a].upper for a in table]
    cscale = common_denominator(t.coefficient for t in f.terms)
    pscale = common_denominator(lb + ub + [v for row in exp.table for v in row])
    LB = [int(v * pscale) for v in lb]
    UB = [int(v * pscale) for v in ub]
    D = [None] + [[None] + [int(v * pscale) for v in row] for row in exp.table]
    groups = _group_slots(f.m, f.n)
    memo: dict = {}
    count = 0
    partial = False

    def base(state):
        lo = up = 0
        for s, c in enumerate(state):
            if c:
                if c > 0:
                    lo += c * LB[s]
                    up += c * UB[s]
                else:
                    lo += c * UB[s]
                    up += c * LB[s]
        return lo, up

    def search(state):
        nonlocal count, partial
        if cfg.memoize:
            hit = memo.get(state)
            if hit is not None:
                return hit
        count += 1
        lo, up = base(state)
        lo_path = up_path = None
        if count > cfg.max_states:
            partial = True
        else:
            for r, i, keep, ck, child in _children(state, groups):
                adj = ck * D[r][i]
                clo, cup, clo_path, cup_path = search(child)
                if adj + clo > lo:
                    lo, lo_path = adj + clo, ((r, i, keep), clo_path)
                if adj + cup < up:
                    up, up_path = adj + cup, ((r, i, keep), cup_path)
        result = (lo, up, lo_path, up_path)
        if cfg.memoize:
            memo[state] = result
        return result

    root = _slots(f, cscale)
    lo, up, lo_path, up_path = search(root)
    cfg.states = count
    if partial:
        log.warning("bounds search stopped after %d states; interval is partial", cfg.max_states)
    unit = cscale * pscale
    blo, bup = base(root)
    interval = Interval(Fraction(lo, unit), Fraction(up, unit))
    if interval.lower > interval.upper:
        raise ArithmeticError(f"empty benefit interval {interval}")
    return BoundsResult(
        interval=interval,
        base=Interval(Fraction(blo, unit), Fraction(bup, unit)),
        partial=partial,
        lower_steps=_replay(f, lo_path, exp),
        upper_steps=_replay(f, up_path, exp),
        states=count,
    )


def describe(result: BoundsResult | IdentifiabilityResult, precision: int = 3) -> str:
    """Human-readable one-liner in the 3-decimal style of printed tables."""
    if isinstance(result, IdentifiabilityResult):
        if not result.identifiable:
            return "identifiable: no"
        return f"identifiable: yes, value = {result.value} ({format_decimal(result.value, precision)})"
    lo, up = result.interval.lower, result.interval.upper
    return f"{format_decimal(lo, precision)} ≤ f(c) ≤ {format_decimal(up, precision)}"
