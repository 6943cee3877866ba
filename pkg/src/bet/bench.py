"""Monte-Carlo power studies and the all-pairs screening engine.

Work is split into contiguous static blocks and reduced in block order, and
every replicate draws from its own keyed substream, so the output does not
depend on the number of workers.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import TiesPresent
from .expansion import (EMPIRICAL, SampleSet, binary_expand, empirical_copula,
                        expand_variable, has_ties)
from .generators import SCENARIOS, ScenarioSpec, sample_null, sample_scenario, substream
from .inference import bonferroni, chisq_test, max_bet_from_stats, two_stage_bet
from .interactions import ContingencyTable, contingency, symmetry_from_table

log = logging.getLogger(__name__)

METHODS = ("bet-two-stage", "chisq")
POWER_FIELDS = ("scenario", "method", "level", "n", "alpha", "reps", "power", "se")
SCREEN_FIELDS = ("var_a", "var_b", "s", "interaction", "p_raw", "p_adjusted", "significant")

BET_DMAX = 4
CHISQ_DEPTH = 4


def _blocks(n_items: int, workers: int) -> list[range]:
    workers = max(1, min(workers, n_items)) if n_items else 1
    size, extra = divmod(n_items, workers)
    out, start = [], 0
    for w in range(workers):
        stop = start + size + (1 if w < extra else 0)
        out.append(range(start, stop))
        start = stop
    return out


def _run_blocks(fn, args_per_block, workers: int) -> list:
    if workers <= 1 or len(args_per_block) <= 1:
        return [fn(*a) for a in args_per_block]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args_per_block)))


# -- power -------------------------------------------------------------------

@dataclass(frozen=True)
class PowerRow:
    scenario: str
    method: str
    level: int
    n: int
    alpha: float
    reps: int
    power: float
    se: float

    def as_record(self) -> list:
        return [self.scenario, self.method, self.level, self.n, repr(self.alpha),
                self.reps, repr(self.power), repr(self.se)]


def _draw(scenario: str, level: int, n: int, rng) -> SampleSet:
    if scenario == "null":
        return sample_null(n, rng)
    return sample_scenario(ScenarioSpec(scenario, level), n, rng)


def replicate_pvalue(sample: SampleSet, method: str, rng=None) -> float:
    """Overall p-value of one benchmark method on one sample (empirical ranks)."""
    cop = empirical_copula(sample, ties="random", seed=rng)
    if method == "bet-two-stage":
        bu, bv = binary_expand(cop, BET_DMAX)
        return two_stage_bet(bu, bv, BET_DMAX, EMPIRICAL).p_adjusted
    if method == "chisq":
        bu, bv = binary_expand(cop, CHISQ_DEPTH)
        return chisq_test(contingency(bu, bv, CHISQ_DEPTH, CHISQ_DEPTH)).p
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def _scenario_key(scenario: str) -> int:
    return len(SCENARIOS) if scenario == "null" else SCENARIOS.index(scenario)


def _power_block(scenario, method, level, n, alpha, seed, reps: range) -> int:
    key = _scenario_key(scenario)
    hits = 0
    for rep in reps:
        rng = substream(seed, key, level, rep)
        sample = _draw(scenario, level, n, rng)
        hits += replicate_pvalue(sample, method, rng) <= alpha
    return hits


def power_curve(scenario: str, method: str, level: int, n: int = 128, alpha: float = 0.1,
                reps: int = 1000, seed: int = 0, workers: int = 1) -> PowerRow:
    """Rejection rate of ``method`` over ``reps`` draws of one scenario cell.

    ``scenario`` is one of :data:`~bet.generators.SCENARIOS` or ``"null"``
    (independent uniforms; ``level`` is then only a stream key).
    """
    if scenario != "null":
        ScenarioSpec(scenario, level)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    blocks = _blocks(reps, workers)
    hits = sum(_run_blocks(_power_block,
                           [(scenario, method, level, n, alpha, seed, b) for b in blocks],
                           workers))
    power = hits / reps
    return PowerRow(scenario, method, level, n, alpha, reps, power,
                    math.sqrt(power * (1.0 - power) / reps))


def power_grid(scenarios: Sequence[str], methods: Sequence[str], levels: Sequence[int],
               n: int = 128, alpha: float = 0.1, reps: int = 1000, seed: int = 0,
               workers: int = 1) -> list[PowerRow]:
    return [power_curve(s, m, lv, n, alpha, reps, seed, workers)
            for s in scenarios for m in methods for lv in levels]


def write_power_csv(rows: Sequence[PowerRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(POWER_FIELDS)
    for r in rows:
        w.writerow(r.as_record())


# -- screening ----------------------------------------------------------------

@dataclass(frozen=True)
class ScreenRow:
    var_a: str
    var_b: str
    s: int
    interaction: str
    p_raw: float
    p_adjusted: float
    significant: bool

    def as_record(self) -> list:
        return [self.var_a, self.var_b, self.s, self.interaction, repr(self.p_raw),
                repr(self.p_adjusted), "true" if self.significant else "false"]


@dataclass(frozen=True)
class ScreenReport:
    names: tuple
    rows: tuple
    alpha: float
    depth: int
    n_pairs: int
    dropped: tuple = field(default=())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SCREEN_FIELDS)
        for r in self.rows:
            w.writerow(r.as_record())
        return buf.getvalue()

    def flagged(self) -> list[ScreenRow]:
        return [r for r in self.rows if r.significant]


def _screen_block(cells: np.ndarray, n: int, depth: int, method: str,
                  pairs: list) -> list[tuple]:
    size = 1 << (2 * depth)
    out = []
    for i, j in pairs:
        table = ContingencyTable(depth, depth,
                                 np.bincount((cells[i] << depth) | cells[j], minlength=size))
        res = max_bet_from_stats(symmetry_from_table(table), EMPIRICAL, method)
        out.append((i, j, res.strongest.s, res.strongest.index.label, res.p_adjusted))
    return out


def screen_all_pairs(matrix, names: Optional[Sequence[str]] = None, depth: int = 2,
                     alpha: float = 0.1, method: str = "normal", workers: int = 1,
                     ties: str = "error", seed: int = 0) -> ScreenReport:
    """Max BET at depth ``(depth, depth)`` over every pair of rows of ``matrix``.

    ``matrix`` has one row per variable and one column per observation. Each
    pair's Max BET p-value is Bonferroni-adjusted again over all pairs.
    Variables with tied values are dropped (and logged) under
    ``ties="error"``; ``ties="random"`` breaks them with ``seed`` instead.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("matrix must be two-dimensional (variables x observations)")
    p_vars, n = matrix.shape
    names = tuple(names) if names is not None else tuple(f"var{i + 1}" for i in range(p_vars))
    if len(names) != p_vars:
        raise ValueError("names and matrix rows differ in number")
    kept, dropped, cells = [], [], []
    for i in range(p_vars):
        row = matrix[i]
        if ties == "error" and has_ties(row):
            log.warning("dropping %s: tied values", names[i])
            dropped.append(names[i])
            continue
        bits = expand_variable(row, depth, ties=ties, seed=substream(seed, i))
        kept.append(i)
        cells.append(bits.cell_indices())
    if len(kept) < 2:
        raise TiesPresent("fewer than two variables remain after the tie check")
    cells = np.array(cells)
    pairs = list(combinations(range(len(kept)), 2))
    blocks = _blocks(len(pairs), workers)
    chunks = _run_blocks(_screen_block,
                         [(cells, n, depth, method, [pairs[k] for k in b]) for b in blocks],
                         workers)
    n_pairs = len(pairs)
    rows = []
    for chunk in chunks:
        for i, j, s, label, p in chunk:
            adj = bonferroni(p, n_pairs)
            rows.append((adj, i, j, ScreenRow(names[kept[i]], names[kept[j]], s, label,
                                              p, adj, adj <= alpha)))
    rows.sort(key=lambda t: t[:3])
    return ScreenReport(tuple(names[k] for k in kept), tuple(r[-1] for r in rows), alpha,
                        depth, n_pairs, tuple(dropped))
