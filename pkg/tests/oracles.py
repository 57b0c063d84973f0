"""Independent reference computations used by the tests.

Nothing here goes through the product construction or the unfolder.
"""
from __future__ import annotations

import heapq
import itertools
from fractions import Fraction

from unfold_align.petri import TAU, SystemNet


def _model_moves(net: SystemNet, m: frozenset):
    for t in range(net.n_transitions):
        if net.pre[t] <= m:
            yield t, (m - net.pre[t]) | net.post[t]


def alignment_cost(model: SystemNet, trace, log_cost=Fraction(1), model_cost=Fraction(1),
                   tau_cost=Fraction(1, 10000)) -> Fraction:
    """Dijkstra over (consumed trace-event down-set, model marking)."""
    n = trace.n
    preds = [0] * n
    for a, b in trace.closure():
        preds[b] |= 1 << a
    full = (1 << n) - 1
    start = (0, model.m_init)
    dist = {start: Fraction(0)}
    tie = itertools.count()
    heap = [(Fraction(0), next(tie), start)]
    while heap:
        d, _, (done, m) = heapq.heappop(heap)
        if d > dist[(done, m)]:
            continue
        if done == full and m == model.m_final:
            return d
        succ = []
        for v in range(n):
            if not done >> v & 1 and preds[v] & done == preds[v]:
                succ.append(((done | 1 << v, m), log_cost))
                for t, m2 in _model_moves(model, m):
                    if model.labels[t] == trace.labels[v]:
                        succ.append(((done | 1 << v, m2), Fraction(0)))
        for t, m2 in _model_moves(model, m):
            succ.append(((done, m2), tau_cost if model.labels[t] is TAU else model_cost))
        for state, c in succ:
            nd = d + c
            if nd < dist.get(state, nd + 1):
                dist[state] = nd
                heapq.heappush(heap, (nd, next(tie), state))
    raise ValueError("final marking unreachable")


def linearization_cost(model: SystemNet, trace, **kw) -> Fraction:
    """Cheapest sequential alignment over all linear extensions of the trace (tiny inputs only)."""
    from unfold_align.ptrace import PTrace

    best = None
    for lin in trace.linearizations():
        chain = PTrace.from_order("lin", [trace.event_ids[i] for i in lin], [trace.labels[i] for i in lin],
                                  [(k, k + 1) for k in range(len(lin) - 1)])
        c = alignment_cost(model, chain, **kw)
        best = c if best is None or c < best else best
    return best


def reachability_graph(net: SystemNet):
    """All reachable markings with their outgoing ``(t, m2)`` edges."""
    seen = {net.m_init}
    edges = {}
    stack = [net.m_init]
    while stack:
        m = stack.pop()
        out = []
        for t in range(net.n_transitions):
            if net.pre[t] <= m:
                m2 = (m - net.pre[t]) | net.post[t]
                out.append((t, m2))
                if m2 not in seen:
                    seen.add(m2)
                    stack.append(m2)
        edges[m] = out
    return edges


def remaining_costs(net: SystemNet, costs, goal) -> dict:
    """Exact cheapest cost from every reachable marking to any marking satisfying ``goal``."""
    graph = reachability_graph(net)
    rev = {m: [] for m in graph}
    for m, out in graph.items():
        for t, m2 in out:
            rev[m2].append((m, costs[t]))
    dist = {}
    tie = itertools.count()
    heap = [(Fraction(0), next(tie), m) for m in graph if goal(m)]
    for _, _, m in heap:
        dist[m] = Fraction(0)
    heapq.heapify(heap)
    while heap:
        d, _, m = heapq.heappop(heap)
        if d > dist[m]:
            continue
        for m0, c in rev[m]:
            nd = d + c
            if nd < dist.get(m0, nd + 1):
                dist[m0] = nd
                heapq.heappush(heap, (nd, next(tie), m0))
    return {m: dist.get(m) for m in graph}


def lp_highs(A, b, c):
    """Floating-point LP optimum through HiGHS; ``None`` when infeasible or unbounded."""
    import numpy as np
    from scipy.optimize import linprog

    res = linprog(np.asarray(c, float), A_eq=np.asarray(A, float), b_eq=np.asarray(b, float),
                  bounds=(0, None), method="highs")
    return float(res.fun) if res.status == 0 else None
