"""Simulated populations: bounds against the known real benefit.

Uniform draws live on a rational grid (integers over ``grid``), so every
quantity stays an exact Fraction and containment checks need no tolerance.
Each population gets its own numpy substream keyed by ``(seed, id)``, which
makes a parallel run identical to a serial one.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    Assignment,
    BenefitFunction,
    ExperimentalDistribution,
    ObservationalDistribution,
    UnitSelectionError,
    all_assignments,
    format_decimal,
    to_rational,
    validate,
)
from .engine import EngineConfig, bound_benefit

log = logging.getLogger(__name__)

DEFAULT_GRID = 2**32

STUDY_VECTORS = {
    "benefited-minus-harmed": (0, 1, 1, -1, 0, 1, -1, -1, 0),
    "benefited-minus-unbenefited": (-1, 1, 1, -1, -1, 1, -1, -1, -1),
    "benefited": (0, 1, 1, 0, 0, 1, 0, 0, 0),
    "harmed": (0, 0, 0, -1, 0, 0, -1, -1, 0),
}


class Reject(Exception):
    """The drawn observational table is unusable; draw a new population."""


class RejectionCapExceeded(UnitSelectionError, RuntimeError):
    pass


@dataclass(frozen=True)
class PopulationFractions:
    m: int
    n: int
    fractions: tuple[Fraction, ...]  # canonical response-type order

    def __post_init__(self):
        if len(self.fractions) != self.n**self.m:
            raise ValueError("need one fraction per response type")
        if any(f < 0 for f in self.fractions) or sum(self.fractions) != 1:
            raise ValueError("fractions must be nonnegative and sum to 1")

    def as_dict(self) -> dict[Assignment, Fraction]:
        return dict(zip(all_assignments(self.m, self.n), self.fractions))


@dataclass
class SimConfig:
    vector: Sequence = STUDY_VECTORS["benefited-minus-harmed"]
    count: int = 1000
    seed: int = 0
    max_rejections: int = 10_000  # per population
    grid: int = DEFAULT_GRID
    workers: int = 1
    engine: EngineConfig = field(default_factory=EngineConfig)

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("population count must be at least 1")


@dataclass(frozen=True)
class SimRecord:
    id: int
    lower: Fraction
    upper: Fraction
    real: Fraction
    rejections: int = 0

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    @property
    def gap(self) -> Fraction:
        return self.upper - self.lower

    @property
    def contained(self) -> bool:
        return self.lower <= self.real <= self.upper


def population_rng(seed: int, pid: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, pid]))


def _uniform(rng: np.random.Generator, lo: Fraction, hi: Fraction, grid: int) -> Fraction:
    """A grid point of [lo, hi]; rejects an empty range."""
    if lo > hi:
        raise Reject(f"empty range [{lo}, {hi}]")
    return lo + (hi - lo) * Fraction(int(rng.integers(0, grid, endpoint=True)), grid)


def generate_fractions(rng: np.random.Generator, m: int = 2, n: int = 3,
                       grid: int = DEFAULT_GRID) -> PopulationFractions:
    """Sorted uniform cuts of [0, 1]; consecutive differences are the fractions."""
    cuts = sorted(int(c) for c in rng.integers(0, grid, size=n**m - 1, endpoint=True))
    cuts.append(grid)
    fractions = [Fraction(cuts[0], grid)]
    fractions += [Fraction(b - a, grid) for a, b in zip(cuts, cuts[1:])]
    return PopulationFractions(m, n, tuple(fractions))


def derive_experimental(f: PopulationFractions) -> ExperimentalDistribution:
    """P(y_i | do(x_j)) is the mass of response types with outcome i at x_j."""
    table = [[Fraction(0)] * f.n for _ in range(f.m)]
    for a, share in f.as_dict().items():
        for j, i in enumerate(a):
            table[j][i - 1] += share
    return ExperimentalDistribution(table)


def sample_observational(f: PopulationFractions, exp: ExperimentalDistribution,
                         rng: np.random.Generator, grid: int = DEFAULT_GRID) -> ObservationalDistribution:
    """Sequential conditional draws of the 2x3 joint table, then validation.

    The upper limit on P(x_1) pairs P(x_1,y_2) with P(y_1|do(x_2)) exactly as
    the published generator does; the closing validation makes that choice
    affect only how often a draw is rejected. Raises :class:`Reject`.
    """
    if (f.m, f.n) != (2, 3):
        raise ValueError("the observational sampler covers m=2, n=3 only")
    p = exp.p
    x1y1 = _uniform(rng, Fraction(0), p(1, 1), grid)
    x1y2 = _uniform(rng, Fraction(0), p(1, 2), grid)
    x1 = _uniform(rng, x1y1 + x1y2, min(x1y1 + 1 - p(1, 1), x1y2 + 1 - p(2, 1)), grid)
    x1y3 = x1 - x1y1 - x1y2
    x2 = 1 - x1
    x2y1 = _uniform(rng, Fraction(0), min(p(2, 1), x2), grid)
    x2y2 = _uniform(rng, Fraction(0), min(p(2, 2), x2 - x2y1), grid)
    x2y3 = x2 - x2y1 - x2y2
    obs = ObservationalDistribution([[x1y1, x1y2, x1y3], [x2y1, x2y2, x2y3]])
    if not validate(exp, obs).ok:
        raise Reject("general relation violated")
    return obs


def sample_consistent(rng: np.random.Generator, m: int, n: int, grid: int = DEFAULT_GRID):
    """Draw a joint over (response type, natural treatment) and derive both tables.

    Unlike :func:`sample_observational` this guarantees the fractions are
    consistent with the observational table, for any arity.
    """
    cells = n**m * m
    cuts = sorted(int(c) for c in rng.integers(0, grid, size=cells - 1, endpoint=True)) + [grid]
    mass = [Fraction(cuts[0], grid)] + [Fraction(b - a, grid) for a, b in zip(cuts, cuts[1:])]
    types = list(all_assignments(m, n))
    shares = [Fraction(0)] * len(types)
    obs = [[Fraction(0)] * n for _ in range(m)]
    for k, w in enumerate(mass):
        t, x = divmod(k, m)
        shares[t] += w
        obs[x][types[t][x] - 1] += w
    f = PopulationFractions(m, n, tuple(shares))
    return f, derive_experimental(f), ObservationalDistribution(obs)


def real_benefit(f: PopulationFractions, vector: Sequence) -> Fraction:
    vector = [to_rational(v) for v in vector]
    if len(vector) != len(f.fractions):
        raise ValueError(f"vector has {len(vector)} entries, expected {len(f.fractions)}")
    return sum((a * s for a, s in zip(vector, f.fractions)), Fraction(0))


def draw_population(cfg: SimConfig, pid: int):
    """Redraw until a population passes validation; returns (f, exp, obs, rejections)."""
    rng = population_rng(cfg.seed, pid)
    for attempt in range(cfg.max_rejections + 1):
        f = generate_fractions(rng, grid=cfg.grid)
        exp = derive_experimental(f)
        try:
            return f, exp, sample_observational(f, exp, rng, cfg.grid), attempt
        except Reject:
            continue
    raise RejectionCapExceeded(f"population {pid}: {cfg.max_rejections} rejections")


def simulate_population(cfg: SimConfig, pid: int) -> SimRecord:
    f, exp, obs, rejections = draw_population(cfg, pid)
    benefit = BenefitFunction.from_vector(2, 3, cfg.vector)
    engine = EngineConfig(cfg.engine.memoize, cfg.engine.max_states)
    bounds = bound_benefit(benefit, exp, obs, engine)
    return SimRecord(pid, bounds.lower, bounds.upper, real_benefit(f, cfg.vector), rejections)


def _run_chunk(args):
    cfg, ids = args
    return [simulate_population(cfg, pid) for pid in ids]


def run_study(cfg: SimConfig):
    """Records for populations ``0..count-1`` plus the summary dict."""
    ids = list(range(cfg.count))
    if cfg.workers > 1:
        chunks = [ids[k::cfg.workers] for k in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            records = [r for part in pool.map(_run_chunk, [(cfg, c) for c in chunks]) for r in part]
        records.sort(key=lambda r: r.id)
    else:
        records = [simulate_population(cfg, pid) for pid in ids]
    return records, summarize(records, cfg)


def summarize(records: Sequence[SimRecord], cfg: SimConfig) -> dict:
    total_gap = sum((r.gap for r in records), Fraction(0))
    violations = [r.id for r in records if not r.contained]
    if violations:
        log.info("real benefit outside bounds for %d population(s)", len(violations))
    return {
        "vector": [str(to_rational(v)) for v in cfg.vector],
        "count": len(records),
        "avg_gap": total_gap / len(records),
        "violations": len(violations),
        "violating_ids": violations,
        "rejections": sum(r.rejections for r in records),
        "seed": cfg.seed,
    }


def summary_json(summary: dict, precision: int = 6) -> dict:
    out = dict(summary)
    out["avg_gap"] = format_decimal(summary["avg_gap"], precision)
    return out


CSV_HEADER = ("id", "lower", "upper", "midpoint", "real", "gap")


def write_records_csv(records: Sequence[SimRecord], path, precision: int = 6, limit: int | None = None):
    """Figure-ready rows; ``limit`` keeps only the first records by id."""
    rows = records if limit is None else records[:limit]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([r.id] + [format_decimal(v, precision)
                                      for v in (r.lower, r.upper, r.midpoint, r.real, r.gap)])


def write_summary_json(summary: dict, path, precision: int = 6):
    Path(path).write_text(json.dumps(summary_json(summary, precision), indent=2) + "\n", encoding="utf-8")
