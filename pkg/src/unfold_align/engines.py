"""Uniform entry point over the three alignment engines."""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .aligner import AlignmentOrder, UAlignment, decompose, run_to_alignment_order
from .baseline import astar_alignment, replay_sequence
from .errors import BudgetExceeded
from .petri import SystemNet
from .product import CostModel, build_extended_product
from .ptrace import PTrace, group_variants, ptrace_to_trace_net
from .unfolder import COST, HEURISTIC, AlignmentRun, Budget, unfold

UNFOLD_COST = "unfold-cost"
UNFOLD_HEURISTIC = "unfold-heuristic"
CLASSIC_PA = "classic-pa"
ENGINES = (UNFOLD_COST, UNFOLD_HEURISTIC, CLASSIC_PA)


@dataclass
class Outcome:
    cost: Fraction
    run: AlignmentRun
    order: AlignmentOrder
    ualignment: UAlignment
    stats: dict
    wall_ms: float


def align_spn(spn, cm: CostModel, engine: str, budget: Optional[Budget] = None) -> Outcome:
    """Align on a prebuilt extended product; wall time covers the search and the replay step."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    t0 = time.perf_counter()
    if engine == CLASSIC_PA:
        res = astar_alignment(spn, cm, budget)
        run = replay_sequence(spn, res.sequence, res.cost)
        cost, stats = res.cost, res.stats
    else:
        res = unfold(spn, cm, order=COST if engine == UNFOLD_COST else HEURISTIC, budget=budget)
        run, cost, stats = res.runs[0], res.lowest_cost, res.stats
    order = run_to_alignment_order(run)
    wall = (time.perf_counter() - t0) * 1000.0
    return Outcome(cost, run, order, decompose(order, cm), stats, wall)


def run_engine(rho: PTrace, model: SystemNet, cm: Optional[CostModel] = None, engine: str = UNFOLD_HEURISTIC,
               budget: Optional[Budget] = None) -> Outcome:
    spn = build_extended_product(ptrace_to_trace_net(rho), model)
    return align_spn(spn, cm or CostModel(), engine, budget)


@dataclass
class VariantResult:
    case: str
    cases: list
    outcome: Optional[Outcome]  # None when the budget ran out
    error: Optional[str] = None

    @property
    def timed_out(self) -> bool:
        return self.outcome is None


def _align_variant(args):
    rep, cases, model, cm, engine, budget = args
    try:
        return VariantResult(rep.case_id, cases, run_engine(rep, model, cm, engine, budget))
    except BudgetExceeded as exc:
        return VariantResult(rep.case_id, cases, None, str(exc))


def max_workers(requested: int = 1) -> int:
    """Requested worker count, capped by ``UNFOLD_ALIGN_THREADS`` when set."""
    cap = os.environ.get("UNFOLD_ALIGN_THREADS")
    n = max(1, requested)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"UNFOLD_ALIGN_THREADS must be an integer, got {cap!r}") from None
    return n


def align_log(model: SystemNet, traces, cm: Optional[CostModel] = None, engine: str = UNFOLD_HEURISTIC,
              budget: Optional[Budget] = None, workers: int = 1) -> list:
    """Align each variant once; results are ordered by the smallest case id of the variant."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    cm = cm or CostModel()
    jobs = [(rep, sorted(t.case_id for t in members), model, cm, engine, budget)
            for rep, members in group_variants(traces)]
    workers = max_workers(workers)
    if workers == 1 or len(jobs) < 2:
        return [_align_variant(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_align_variant, jobs))
