"""Bounds on conditional probabilities of causation for m-valued X, n-valued Y.

A query is a conjunction of counterfactual events ``Y_{x_j} = y_i`` (the
*pairs*, at most one per treatment), optionally joined with the observed
events ``X = x_p`` and/or ``Y = y_q``. :class:`BoundsEvaluator` bounds every
such query from one experimental and one observational table. Multi-pair
queries recurse into queries with one fewer pair, so the recursion always
bottoms out at single-pair formulas or exact experimental values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import (
    Assignment,
    ExperimentalDistribution,
    Interval,
    MAX_RESPONSE_TYPES,
    ObservationalDistribution,
    SizeLimitExceeded,
    all_assignments,
    point,
    require_valid,
)

ZERO = Fraction(0)
ONE = Fraction(1)

Pairs = tuple[tuple[int, int], ...]  # ((j, i), ...) sorted by treatment j


@dataclass(frozen=True)
class CounterfactualQuery:
    """``P(∧ Y_{x_j}=y_i  [, X=x_p] [, Y=y_q])``; also the memo key."""

    pairs: Pairs
    observed_x: int | None = None
    observed_y: int | None = None

    def __post_init__(self):
        pairs = tuple(sorted((int(j), int(i)) for j, i in self.pairs))
        if not pairs:
            raise ValueError("a query needs at least one counterfactual pair")
        treatments = [j for j, _ in pairs]
        if len(set(treatments)) != len(treatments):
            raise ValueError(f"duplicate treatment index among pairs {pairs}")
        if self.observed_x is not None and self.observed_x in treatments:
            raise ValueError(f"observed treatment x_{self.observed_x} collides with a pair")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def joint(cls, assignment: Assignment) -> "CounterfactualQuery":
        """The full response-type event for ``(i_1, ..., i_m)``."""
        return cls(tuple((j, i) for j, i in enumerate(assignment, start=1)))

    def __str__(self):
        parts = [f"y{i}_x{j}" for j, i in self.pairs]
        if self.observed_x is not None:
            parts.append(f"x{self.observed_x}")
        if self.observed_y is not None:
            parts.append(f"y{self.observed_y}")
        return f"P({', '.join(parts)})"


def _interval(lower_candidates: Iterable[Fraction], upper_candidates: Iterable[Fraction]) -> Interval:
    lower = max(ZERO, *lower_candidates)
    upper = min(ONE, *upper_candidates)
    if lower > upper:
        raise ArithmeticError(f"empty bound [{lower}, {upper}]; data likely invalid")
    return Interval(lower, upper)


def _without(pairs: Pairs, t: int) -> Pairs:
    return pairs[:t] + pairs[t + 1:]


class BoundsEvaluator:
    """Evaluates the bound formulas on one (experimental, observational) pair.

    The evaluator is immutable apart from its cache; cached intervals are
    pure functions of the query, so concurrent identical writes are harmless.
    """

    def __init__(self, exp: ExperimentalDistribution, obs: ObservationalDistribution,
                 *, memoize: bool = True, validate: bool = True):
        if validate:
            require_valid(exp, obs)
        self.exp, self.obs = exp, obs
        self.m, self.n = exp.m, exp.n
        self.memoize = memoize
        self.cache: dict[CounterfactualQuery, Interval] = {}
        self.px = [None] + [obs.px(j) for j in range(1, self.m + 1)]
        self.py = [None] + [obs.py(i) for i in range(1, self.n + 1)]

    # -- shorthand -----------------------------------------------------------
    def _pe(self, j: int, i: int) -> Fraction:
        return self.exp.p(j, i)

    def _po(self, j: int, i: int) -> Fraction:
        return self.obs.joint(j, i)

    def _check(self, *, outcomes=(), treatments=()):
        for i in outcomes:
            if not 1 <= i <= self.n:
                raise IndexError(f"outcome index {i} outside 1..{self.n}")
        for j in treatments:
            if not 1 <= j <= self.m:
                raise IndexError(f"treatment index {j} outside 1..{self.m}")

    # -- dispatch ------------------------------------------------------------
    def bound(self, query: CounterfactualQuery) -> Interval:
        """Bound any query, choosing the formula by its shape."""
        pairs, p, q = query.pairs, query.observed_x, query.observed_y
        self._check(outcomes=[i for _, i in pairs] + ([q] if q else []),
                    treatments=[j for j, _ in pairs] + ([p] if p else []))
        if self.memoize and query in self.cache:
            return self.cache[query]
        result = self._compute(pairs, p, q)
        if self.memoize:
            self.cache[query] = result
        return result

    def _compute(self, pairs: Pairs, p, q) -> Interval:
        if len(pairs) == 1:
            (j, i), = pairs
            if p is None and q is None:
                return point(self._pe(j, i))
            if p is None:
                return self._thm4(i, j) if q == i else self._thm5(i, q, j)
            if q is None:
                return self._thm6(i, j, p)
            return self._thm7(i, q, j, p)
        if p is None and q is None:
            return self._thm8(pairs)
        if q is None:
            return self._thm9(pairs, p)
        if p is None:
            return self._thm10(pairs, q)
        return self._thm11(pairs, p, q)

    def _sub(self, pairs: Pairs, p=None, q=None) -> Interval:
        return self.bound(CounterfactualQuery(pairs, p, q))

    # -- public per-formula entry points ------------------------------------
    def bound_thm4(self, i: int, j: int) -> Interval:
        """P(Y_{x_j}=y_i, Y=y_i)."""
        return self._sub(((j, i),), q=i)

    def bound_thm5(self, i: int, k: int, j: int) -> Interval:
        """P(Y_{x_j}=y_i, Y=y_k) with i != k."""
        if i == k:
            raise ValueError("bound_thm5 needs i != k; use bound_thm4")
        return self._sub(((j, i),), q=k)

    def bound_thm6(self, i: int, j: int, k: int) -> Interval:
        """P(Y_{x_j}=y_i, X=x_k) with j != k."""
        if j == k:
            raise ValueError("bound_thm6 needs j != k")
        return self._sub(((j, i),), p=k)

    def bound_thm7(self, i: int, k: int, j: int, p: int) -> Interval:
        """P(Y_{x_j}=y_i, Y=y_k, X=x_p) with j != p."""
        if j == p:
            raise ValueError("bound_thm7 needs j != p")
        return self._sub(((j, i),), p=p, q=k)

    def bound_thm8(self, pairs) -> Interval:
        return self._sub(tuple(pairs))

    def bound_thm9(self, pairs, p: int) -> Interval:
        return self._sub(tuple(pairs), p=p)

    def bound_thm10(self, pairs, q: int) -> Interval:
        return self._sub(tuple(pairs), q=q)

    def bound_thm11(self, pairs, p: int, q: int) -> Interval:
        return self._sub(tuple(pairs), p=p, q=q)

    # -- single counterfactual pair ------------------------------------------
    def _thm4(self, i, j):
        pe, py = self._pe(j, i), self.py[i]
        return _interval([self._po(j, i), pe + py - 1], [pe, py])

    def _thm5(self, i, k, j):
        pe = self._pe(j, i)
        spread = pe - 1 + self.px[j] - self._po(j, i)
        summed = sum((max(ZERO, spread + self._po(p, k)) for p in range(1, self.m + 1) if p != j), ZERO)
        return _interval([pe + self.py[k] - 1, summed],
                         [pe - self._po(j, i), self.py[k] - self._po(j, k)])

    def _thm6(self, i, j, k):
        pe, po = self._pe(j, i), self._po(j, i)
        return _interval([pe - po - 1 + self.px[j] + self.px[k]], [pe - po, self.px[k]])

    def _thm7(self, i, k, j, p):
        pe, po = self._pe(j, i), self._po(j, i)
        return _interval([pe + self._po(p, k) - 1 + self.px[j] - po], [pe - po, self._po(p, k)])

    # -- several counterfactual pairs ----------------------------------------
    def _fixed_terms(self, pairs: Pairs):
        """Candidates shared by the multi-pair formulas: sum, min, and leave-one-out."""
        k = len(pairs)
        total = sum((self._pe(j, i) for j, i in pairs), ZERO)
        smallest = min(self._pe(j, i) for j, i in pairs)
        rest = [self._sub(_without(pairs, t)) for t in range(k)]
        return k, total, smallest, rest

    def _decomposition(self, pairs: Pairs, q=None):
        """Split the event over the natural treatment X = x_p.

        For p equal to a pair's treatment j_r, consistency forces Y = y_{i_r},
        so the slice is the remaining pairs with (x_{j_r}, y_{i_r}) observed;
        when an observed y_q disagrees with i_r that slice is empty.
        """
        lo = hi = ZERO
        treatments = {j for j, _ in pairs}
        for r, (j, i) in enumerate(pairs):
            if q is not None and q != i:
                continue
            b = self._sub(_without(pairs, r), p=j, q=i)
            lo, hi = lo + b.lower, hi + b.upper
        for p in range(1, self.m + 1):
            if p in treatments:
                continue
            b = self._sub(pairs, p=p, q=q)
            lo, hi = lo + b.lower, hi + b.upper
        return lo, hi

    def _thm8(self, pairs):
        k, total, smallest, rest = self._fixed_terms(pairs)
        loo_lo = max(rest[t].lower + self._pe(j, i) - 1 for t, (j, i) in enumerate(pairs))
        dec_lo, dec_hi = self._decomposition(pairs)
        return _interval([total - k + 1, loo_lo, dec_lo],
                         [smallest, min(b.upper for b in rest), dec_hi])

    def _thm9(self, pairs, p):
        k, total, smallest, rest = self._fixed_terms(pairs)
        singles = [self._sub(((j, i),), p=p) for j, i in pairs]
        return _interval(
            [total + self.px[p] - k,
             max(rest[t].lower + singles[t].lower - 1 for t in range(k))],
            [smallest, self.px[p], min(b.upper for b in rest), min(b.upper for b in singles)])

    def _thm10(self, pairs, q):
        k, total, smallest, rest = self._fixed_terms(pairs)
        singles = [self._sub(((j, i),), q=q) for j, i in pairs]
        dec_lo, dec_hi = self._decomposition(pairs, q)
        return _interval(
            [total + self.py[q] - k,
             max(rest[t].lower + singles[t].lower - 1 for t in range(k)),
             dec_lo],
            [smallest, self.py[q], min(b.upper for b in rest), min(b.upper for b in singles), dec_hi])

    def _thm11(self, pairs, p, q):
        k, total, smallest, rest = self._fixed_terms(pairs)
        singles = [self._sub(((j, i),), p=p, q=q) for j, i in pairs]
        pxy = self._po(p, q)
        return _interval(
            [total + pxy - k,
             max(rest[t].lower + singles[t].lower - 1 for t in range(k))],
            [smallest, pxy, min(b.upper for b in rest), min(b.upper for b in singles)])

    # -- full response types -------------------------------------------------
    def bounds_for_all_full_joints(self, limit: int = MAX_RESPONSE_TYPES) -> dict[Assignment, Interval]:
        """Interval for every response type ``(i_1, ..., i_m)`` in canonical order."""
        if self.n**self.m > limit:
            raise SizeLimitExceeded(f"n**m = {self.n**self.m} exceeds the limit {limit}")
        return {a: self.bound(CounterfactualQuery.joint(a)) for a in all_assignments(self.m, self.n)}


def bounds_for_all_full_joints(exp: ExperimentalDistribution, obs: ObservationalDistribution,
                               **kwargs) -> dict[Assignment, Interval]:
    return BoundsEvaluator(exp, obs, **kwargs).bounds_for_all_full_joints()
