"""Marking-equation lower bound on the remaining alignment cost."""
from __future__ import annotations

import math
from fractions import Fraction

from . import lp
from .product import CostModel, MoveNet

INF = math.inf


class MarkingEquation:
    """Cached LP relaxation ``min c.x  s.t.  m + N x = m_final, x >= 0``.

    Values are in scaled integer cost units (see :meth:`CostModel.scale`). When
    the cached solution vector of ``m`` fires ``t`` at least once, the value
    for the successor marking follows without solving: ``x - e_t`` stays
    feasible and optimal there.
    """

    def __init__(self, spn: MoveNet, cm: CostModel):
        net = spn.net
        self.net = net
        self.costs = spn.int_costs(cm)
        self.final = net.m_final
        self.rows = []
        for p in range(net.n_places):
            row = [0] * net.n_transitions
            for t in net.producers[p]:
                row[t] += 1
            for t in net.consumers[p]:
                row[t] -= 1
            self.rows.append(row)
        self.cache = {}
        self.solved = 0
        self.derived = 0

    def _solve(self, m: frozenset):
        b = [(1 if p in self.final else 0) - (1 if p in m else 0) for p in range(self.net.n_places)]
        res = lp.solve(self.rows, b, self.costs)
        self.solved += 1
        if not res.feasible:
            return INF, None
        return res.value, res.x

    def value(self, m: frozenset):
        hit = self.cache.get(m)
        if hit is None:
            hit = self.cache[m] = self._solve(m)
        return hit[0]

    def value_after(self, m_before: frozenset, t: int, m_after: frozenset):
        """Value at ``m_after`` reached from ``m_before`` by firing ``t``."""
        hit = self.cache.get(m_after)
        if hit is not None:
            return hit[0]
        parent = self.cache.get(m_before)
        if parent is not None and parent[1] is not None and parent[1][t] >= 1:
            x = list(parent[1])
            x[t] -= 1
            val = parent[0] - self.costs[t]
            self.cache[m_after] = (val, x)
            self.derived += 1
            return val
        return self.value(m_after)


def estimate_remaining(spn: MoveNet, m: frozenset, cm: CostModel):
    """Marking-equation underestimate in cost units; ``math.inf`` when infeasible."""
    val = MarkingEquation(spn, cm).value(frozenset(m))
    return val if val == INF else Fraction(val) / cm.scale()
