"""Domain types shared by the bounds engine.

Every probability is a :class:`fractions.Fraction`. Treatment and outcome
indices are 1-based at every public surface: ``x_1..x_m`` and ``y_1..y_n``.
A response type is a plain tuple ``(i_1, ..., i_m)`` giving the outcome under
each treatment.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Iterable, Iterator, Sequence

# n**m guard; the reduction searches are exponential in the number of terms.
MAX_RESPONSE_TYPES = 4096

Assignment = tuple[int, ...]


class UnitSelectionError(Exception):
    """Base class for errors raised by this package."""


class ArityMismatch(UnitSelectionError, ValueError):
    pass


class ZeroTotal(UnitSelectionError, ValueError):
    pass


class InvalidDistribution(UnitSelectionError, ValueError):
    pass


class InvalidData(UnitSelectionError, ValueError):
    """Experimental and observational tables are jointly inconsistent."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(f"data fail validation: {len(report.violations)} violation(s)")


class SizeLimitExceeded(UnitSelectionError, ValueError):
    pass


class DatasetError(UnitSelectionError, ValueError):
    """Malformed dataset file."""


def to_rational(value) -> Fraction:
    """Parse ``value`` into an exact Fraction.

    Strings may be ``"p/q"`` or decimals (``"0.087"`` is 87/1000). Floats go
    through their shortest repr so ``0.1`` means 1/10, not the binary double.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def format_decimal(value: Fraction, precision: int = 3) -> str:
    """Round ``value`` half away from zero at ``precision`` places, exactly."""
    value = Fraction(value)
    magnitude = abs(value) * 10**precision
    scaled = int(magnitude + Fraction(1, 2))
    sign = "-" if value < 0 and scaled else ""
    digits = str(scaled).rjust(precision + 1, "0")
    if precision == 0:
        return sign + digits
    return f"{sign}{digits[:-precision]}.{digits[-precision:]}"


def check_size(m: int, n: int, limit: int = MAX_RESPONSE_TYPES) -> None:
    if m < 2 or n < 2:
        raise ArityMismatch(f"need m >= 2 and n >= 2, got m={m}, n={n}")
    if n**m > limit:
        raise SizeLimitExceeded(f"n**m = {n**m} exceeds the limit {limit}")


# ---------------------------------------------------------------------------
# Response types and their canonical order
# ---------------------------------------------------------------------------

def term_index(assignment: Sequence[int], n: int) -> int:
    """1-based position of a response type; the last treatment varies fastest."""
    index = 0
    for outcome in assignment:
        if not 1 <= outcome <= n:
            raise ValueError(f"outcome {outcome} outside 1..{n}")
        index = index * n + (outcome - 1)
    return index + 1


def assignment_at(index: int, m: int, n: int) -> Assignment:
    """Inverse of :func:`term_index`."""
    if not 1 <= index <= n**m:
        raise ValueError(f"index {index} outside 1..{n**m}")
    rest = index - 1
    digits = []
    for _ in range(m):
        rest, d = divmod(rest, n)
        digits.append(d + 1)
    return tuple(reversed(digits))


def all_assignments(m: int, n: int) -> Iterator[Assignment]:
    """Every response type in canonical (term_index) order."""
    return itertools.product(range(1, n + 1), repeat=m)


# ---------------------------------------------------------------------------
# Data tables
# ---------------------------------------------------------------------------

def _as_table(rows) -> tuple[tuple[Fraction, ...], ...]:
    table = tuple(tuple(to_rational(v) for v in row) for row in rows)
    if not table or len({len(r) for r in table}) != 1:
        raise InvalidDistribution("table must be a non-empty rectangular grid")
    for row in table:
        for v in row:
            if not 0 <= v <= 1:
                raise InvalidDistribution(f"probability {v} outside [0, 1]")
    return table


@dataclass(frozen=True)
class ExperimentalDistribution:
    """``table[j-1][i-1] = P(y_i | do(x_j))``; one row per treatment."""

    table: tuple[tuple[Fraction, ...], ...]
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "table", _as_table(self.table))
        if self.check:
            for j, row in enumerate(self.table, start=1):
                if sum(row) != 1:
                    raise InvalidDistribution(f"row x_{j} sums to {sum(row)}, not 1")

    @property
    def m(self) -> int:
        return len(self.table)

    @property
    def n(self) -> int:
        return len(self.table[0])

    def p(self, j: int, i: int) -> Fraction:
        """P(y_i | do(x_j))."""
        return self.table[j - 1][i - 1]


@dataclass(frozen=True)
class ObservationalDistribution:
    """``table[j-1][i-1] = P(x_j, y_i)``; all entries sum to one."""

    table: tuple[tuple[Fraction, ...], ...]
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "table", _as_table(self.table))
        if self.check:
            total = sum(sum(row) for row in self.table)
            if total != 1:
                raise InvalidDistribution(f"joint table sums to {total}, not 1")

    @property
    def m(self) -> int:
        return len(self.table)

    @property
    def n(self) -> int:
        return len(self.table[0])

    def joint(self, j: int, i: int) -> Fraction:
        """P(x_j, y_i)."""
        return self.table[j - 1][i - 1]

    def px(self, j: int) -> Fraction:
        return sum(self.table[j - 1], Fraction(0))

    def py(self, i: int) -> Fraction:
        return sum((row[i - 1] for row in self.table), Fraction(0))


def from_counts(exp_counts, obs_counts):
    """Normalize count tables: experimental per row, observational by grand total."""
    exp_rows = []
    for j, row in enumerate(exp_counts, start=1):
        row = [_count(c) for c in row]
        total = sum(row)
        if total == 0:
            raise ZeroTotal(f"experimental row x_{j} has zero total")
        exp_rows.append([Fraction(c, total) for c in row])
    obs_rows = [[_count(c) for c in row] for row in obs_counts]
    grand = sum(sum(row) for row in obs_rows)
    if grand == 0:
        raise ZeroTotal("observational table has zero total")
    obs = ObservationalDistribution([[Fraction(c, grand) for c in row] for row in obs_rows])
    return ExperimentalDistribution(exp_rows), obs


def _count(c) -> int:
    if isinstance(c, bool) or not isinstance(c, int) or c < 0:
        raise ValueError(f"counts must be nonnegative integers, got {c!r}")
    return c


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    constraint: str  # "lower", "upper", "row_sum" or "grand_sum"
    treatment: int | None
    outcome: int | None
    slack: Fraction  # amount by which the constraint is violated, > 0


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(exp: ExperimentalDistribution, obs: ObservationalDistribution) -> ValidationReport:
    """Check the sum invariants and ``P(x,y) <= P(y_x) <= P(x,y) + 1 - P(x)``."""
    if (exp.m, exp.n) != (obs.m, obs.n):
        raise ArityMismatch(f"experimental is {exp.m}x{exp.n}, observational is {obs.m}x{obs.n}")
    found = []
    for j in range(1, exp.m + 1):
        total = sum(exp.table[j - 1])
        if total != 1:
            found.append(Violation("row_sum", j, None, abs(total - 1)))
    grand = sum(sum(row) for row in obs.table)
    if grand != 1:
        found.append(Violation("grand_sum", None, None, abs(grand - 1)))
    for j in range(1, exp.m + 1):
        px = obs.px(j)
        for i in range(1, exp.n + 1):
            causal, joint = exp.p(j, i), obs.joint(j, i)
            if joint > causal:
                found.append(Violation("lower", j, i, joint - causal))
            if causal > joint + 1 - px:
                found.append(Violation("upper", j, i, causal - (joint + 1 - px)))
    return ValidationReport(tuple(found))


def require_valid(exp: ExperimentalDistribution, obs: ObservationalDistribution) -> None:
    report = validate(exp, obs)
    if not report.ok:
        raise InvalidData(report)


# ---------------------------------------------------------------------------
# Benefit functions and intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BenefitTerm:
    coefficient: Fraction
    assignment: Assignment


@dataclass(frozen=True)
class BenefitFunction:
    m: int
    n: int
    terms: tuple[BenefitTerm, ...]

    def __post_init__(self):
        seen = set()
        for term in self.terms:
            a = term.assignment
            if len(a) != self.m or not all(1 <= o <= self.n for o in a):
                raise ValueError(f"assignment {a} invalid for m={self.m}, n={self.n}")
            if a in seen:
                raise ValueError(f"duplicate assignment {a}")
            seen.add(a)

    @classmethod
    def from_vector(cls, m: int, n: int, vector: Iterable) -> "BenefitFunction":
        vector = [to_rational(v) for v in vector]
        if len(vector) != n**m:
            raise ArityMismatch(f"benefit vector has {len(vector)} entries, expected {n**m}")
        terms = tuple(BenefitTerm(c, a) for c, a in zip(vector, all_assignments(m, n)))
        return cls(m, n, terms)

    @property
    def vector(self) -> tuple[Fraction, ...]:
        """Coefficients in canonical order; absent terms count as 0."""
        out = [Fraction(0)] * self.n**self.m
        for t in self.terms:
            out[term_index(t.assignment, self.n) - 1] = t.coefficient
        return tuple(out)

    def evaluate(self, probabilities) -> Fraction:
        """Sum of coefficient * probability, ``probabilities`` keyed by assignment."""
        return sum((t.coefficient * probabilities[t.assignment] for t in self.terms), Fraction(0))


@dataclass(frozen=True)
class Interval:
    lower: Fraction
    upper: Fraction

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper

    def contains(self, value) -> bool:
        if isinstance(value, Interval):
            return self.lower <= value.lower and value.upper <= self.upper
        return self.lower <= value <= self.upper

    def format(self, precision: int = 3) -> str:
        return f"[{format_decimal(self.lower, precision)}, {format_decimal(self.upper, precision)}]"

    def __str__(self):
        return f"[{self.lower}, {self.upper}]"


def point(value) -> Interval:
    value = Fraction(value)
    return Interval(value, value)


def common_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = lcm(d, v.denominator)
    return d


# ---------------------------------------------------------------------------
# Dataset files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    exp: ExperimentalDistribution
    obs: ObservationalDistribution
    benefit: BenefitFunction | None = None

    @property
    def m(self) -> int:
        return self.exp.m

    @property
    def n(self) -> int:
        return self.exp.n


def parse_dataset(doc: dict, *, check: bool = False) -> Dataset:
    """Build a Dataset from the decoded JSON document.

    With ``check=False`` sum invariants are left to :func:`validate` so that a
    bad total shows up as a violation rather than a parse error.
    """
    try:
        m, n = doc["m"], doc["n"]
        if not isinstance(m, int) or not isinstance(n, int):
            raise DatasetError("m and n must be integers")
        check_size(m, n)
        exp_spec, obs_spec = doc["experimental"], doc["observational"]
        if "counts" in exp_spec or "counts" in obs_spec:
            if "counts" not in exp_spec or "counts" not in obs_spec:
                raise DatasetError("mixing counts and probs is not supported")
            exp, obs = from_counts(exp_spec["counts"], obs_spec["counts"])
        else:
            exp = ExperimentalDistribution(exp_spec["probs"], check=check)
            obs = ObservationalDistribution(obs_spec["probs"], check=check)
        for name, t in (("experimental", exp), ("observational", obs)):
            if (t.m, t.n) != (m, n):
                raise DatasetError(f"{name} table is {t.m}x{t.n}, declared {m}x{n}")
        benefit = None
        if doc.get("benefit_vector") is not None:
            benefit = BenefitFunction.from_vector(m, n, doc["benefit_vector"])
    except DatasetError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"{type(exc).__name__}: {exc}") from exc
    return Dataset(exp, obs, benefit)


def load_dataset(path, *, check: bool = False) -> Dataset:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DatasetError(f"{path}: top level must be an object")
    try:
        return parse_dataset(doc, check=check)
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def dataset_to_json(ds: Dataset) -> dict:
    """Probability form of a dataset, rationals written as ``"p/q"`` strings."""
    doc = {
        "m": ds.m,
        "n": ds.n,
        "experimental": {"probs": [[str(v) for v in row] for row in ds.exp.table]},
        "observational": {"probs": [[str(v) for v in row] for row in ds.obs.table]},
    }
    if ds.benefit is not None:
        doc["benefit_vector"] = [str(v) for v in ds.benefit.vector]
    return doc
