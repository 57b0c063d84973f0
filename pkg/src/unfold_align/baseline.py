"""Two-step reference method: A* over the product's reachability graph, then replay into a partial order."""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .aligner import AlignmentOrder, run_to_alignment_order
from .errors import BudgetExceeded, InvalidSequence, NoPath
from .heuristic import INF, MarkingEquation
from .petri import fire
from .product import CostModel, MoveNet
from .unfolder import AlignmentRun, Budget


@dataclass
class AStarResult:
    sequence: list  # product transition indices, ending with t*
    cost: Fraction
    stats: dict

    def moves(self, spn: MoveNet) -> list:
        return [spn.moves[t] for t in self.sequence]


def astar_alignment(spn: MoveNet, cm: Optional[CostModel] = None, budget: Optional[Budget] = None,
                    heuristic: Optional[MarkingEquation] = None) -> AStarResult:
    """Cheapest firing sequence from the initial marking until ``t*`` has fired.

    Ties on ``f`` go to the lower heuristic value, then first-in-first-out.
    """
    if not spn.extended:
        raise ValueError("astar_alignment needs an extended product net")
    cm = cm or CostModel()
    budget = budget or Budget(timeout=None)
    net = spn.net
    costs = spn.int_costs(cm)
    heur = heuristic or MarkingEquation(spn, cm)
    goal = spn.target_place
    start = time.perf_counter()
    deadline = None if budget.timeout is None else start + budget.timeout
    counter = itertools.count()
    m0 = net.m_init
    h0 = heur.value(m0)
    stats = {"expanded": 0, "generated": 1, "queue_peak": 1}
    if h0 == INF:
        raise NoPath("initial marking cannot reach the target", stats=stats)
    g = {m0: 0}
    parent = {m0: None}
    heap = [(h0, h0, next(counter), m0)]
    closed = set()
    while heap:
        if deadline is not None and stats["expanded"] % 64 == 0 and time.perf_counter() > deadline:
            stats["wall_ms"] = (time.perf_counter() - start) * 1000.0
            raise BudgetExceeded("wall-clock budget exceeded", stats=stats)
        if budget.max_events is not None and stats["generated"] > budget.max_events:
            raise BudgetExceeded("state budget exceeded", stats=stats)
        f, h, _, m = heapq.heappop(heap)
        if m in closed:
            continue
        closed.add(m)
        stats["expanded"] += 1
        if goal in m:
            seq = []
            cur = m
            while parent[cur] is not None:
                cur, t = parent[cur]
                seq.append(t)
            seq.reverse()
            stats["states"] = len(g)
            stats["wall_ms"] = (time.perf_counter() - start) * 1000.0
            stats["lp_solved"] = heur.solved
            stats["lp_derived"] = heur.derived
            return AStarResult(seq, Fraction(g[m], cm.scale()), stats)
        gm = g[m]
        cand = set()
        for p in m:
            cand.update(net.consumers[p])
        for t in sorted(cand):
            if not net.pre[t] <= m:
                continue
            m2 = fire(net, m, t)
            if m2 in closed:
                continue
            g2 = gm + costs[t]
            if g2 >= g.get(m2, INF):
                continue
            h2 = heur.value_after(m, t, m2)
            if h2 == INF:
                continue
            g[m2] = g2
            parent[m2] = (m, t)
            stats["generated"] += 1
            heapq.heappush(heap, (g2 + h2, h2, next(counter), m2))
        stats["queue_peak"] = max(stats["queue_peak"], len(heap))
    raise NoPath(stats=stats)


def replay_sequence(spn: MoveNet, seq: Sequence[int], cost: Optional[Fraction] = None) -> AlignmentRun:
    """Replay a firing sequence into a causal net; every produced token gets a fresh condition."""
    net = spn.net
    cond_place, cond_pre = [], []
    holder = {}
    for p in sorted(net.m_init):
        holder[p] = len(cond_place)
        cond_place.append(p)
        cond_pre.append(-1)
    ev_pre, ev_post = [], []
    m = net.m_init
    for i, t in enumerate(seq):
        try:
            m = fire(net, m, t)
        except Exception as exc:
            raise InvalidSequence(f"step {i}: {exc}") from None
        ev_pre.append(tuple(holder.pop(p) for p in sorted(net.pre[t])))
        out = []
        for p in sorted(net.post[t]):
            holder[p] = len(cond_place)
            out.append(holder[p])
            cond_place.append(p)
            cond_pre.append(i)
        ev_post.append(tuple(out))
    if not seq or seq[-1] != spn.target:
        raise InvalidSequence("sequence must end with the target transition")
    # keep only conditions on a path to the target, as in a local distributed run
    used = {b for pre in ev_pre for b in pre}
    sink = ev_post[-1][0]
    keep = sorted(used | {sink})
    cmap = {b: i for i, b in enumerate(keep)}
    return AlignmentRun(
        spn=spn,
        net=net,
        ev_trans=tuple(seq),
        ev_pre=tuple(tuple(cmap[b] for b in pre) for pre in ev_pre),
        ev_post=tuple(tuple(cmap[b] for b in post if b in cmap) for post in ev_post),
        cond_place=tuple(cond_place[b] for b in keep),
        cond_pre=tuple(cond_pre[b] for b in keep),
        target=len(seq) - 1,
        sink=cmap[sink],
        cost=cost if cost is not None else sum((spn.costs(CostModel())[t] for t in seq), Fraction(0)),
    )


def replay_to_partial_order(spn: MoveNet, seq: Sequence[int]) -> AlignmentOrder:
    return run_to_alignment_order(replay_sequence(spn, seq))
