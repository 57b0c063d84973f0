"""Complete-finite-prefix unfolding of (extended) synchronous product nets.

The prefix is an append-only arena. Condition and event sets, concurrency
relations and local configurations are Python-int bitsets indexed by
condition/event id; event ids double as the insertion order used to break
ties between equally cheap configurations.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from . import graphs
from .errors import BudgetExceeded, InvalidConfiguration, ModelNotEasySound, UnsafeMarking
from .heuristic import INF, MarkingEquation
from .petri import SystemNet, fire
from .product import CostModel, MoveNet

COST = "cost"
HEURISTIC = "heuristic"


def bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@dataclass
class Budget:
    max_events: Optional[int] = None
    timeout: Optional[float] = 3.0


class Prefix:
    """Branching process under construction."""

    def __init__(self, net: SystemNet, costs):
        self.net = net
        self.tcost = costs
        # conditions
        self.cond_place = []
        self.cond_pre = []
        self.cond_co = []
        self.place_conds = [0] * net.n_places
        self.initial = 0
        # events
        self.ev_trans = []
        self.ev_preset = []
        self.ev_postset = []
        self.ev_premask = []
        self.ev_postmask = []
        self.ev_local = []
        self.ev_cost = []
        self.ev_size = []
        self.ev_mark = []
        self.ev_key = []
        self.cutoff = 0
        self.appended = 0
        self.imarks = {net.m_init: -1}

    @property
    def n_conditions(self) -> int:
        return len(self.cond_place)

    @property
    def n_events(self) -> int:
        return len(self.ev_trans)

    def add_condition(self, place: int, producer: int) -> int:
        b = len(self.cond_place)
        self.cond_place.append(place)
        self.cond_pre.append(producer)
        self.cond_co.append(0)
        self.place_conds[place] |= 1 << b
        return b

    def init_conditions(self) -> int:
        ids = [self.add_condition(p, -1) for p in sorted(self.net.m_init)]
        mask = 0
        for b in ids:
            mask |= 1 << b
        for b in ids:
            self.cond_co[b] = mask & ~(1 << b)
        self.initial = mask
        return mask

    def append_postset(self, e: int) -> int:
        """Add a condition per output place of ``e`` and update the concurrency relation."""
        common = -1
        for x in self.ev_preset[e]:
            common &= self.cond_co[x]
        common = max(common, 0)
        new = [self.add_condition(p, e) for p in sorted(self.net.post[self.ev_trans[e]])]
        ymask = 0
        for y in new:
            ymask |= 1 << y
        for y in new:
            self.cond_co[y] = common | (ymask & ~(1 << y))
        for b in bits(common):
            self.cond_co[b] |= ymask
        self.ev_postset[e] = tuple(new)
        self.ev_postmask[e] = ymask
        self.appended |= 1 << e
        return ymask

    def extensions(self, ymask: int):
        """Candidate ``(t, preset)`` pairs whose preset is a co-set meeting ``ymask``.

        Each preset is reported once, from its lowest-numbered new condition.
        """
        net = self.net
        out = []
        for y in bits(ymask):
            py = self.cond_place[y]
            allowed = ~(ymask & ((1 << y) - 1))
            for t in net.consumers[py]:
                slots = sorted(p for p in net.pre[t] if p != py)
                self._fill(t, slots, 0, self.cond_co[y] & allowed, [y], out)
        return out

    def _fill(self, t, slots, i, mask, chosen, out):
        if i == len(slots):
            out.append((t, tuple(sorted(chosen))))
            return
        for c in bits(mask & self.place_conds[slots[i]]):
            chosen.append(c)
            self._fill(t, slots, i + 1, mask & self.cond_co[c], chosen, out)
            chosen.pop()

    def new_event(self, t: int, preset: tuple):
        """Register a candidate event; returns its id. Its postset is added later."""
        e = len(self.ev_trans)
        past = 0
        premask = 0
        for b in preset:
            premask |= 1 << b
            prod = self.cond_pre[b]
            if prod >= 0:
                past |= self.ev_local[prod]
        cost = self.tcost[t]
        produced = self.initial
        consumed = premask
        size = 1
        for f in bits(past):
            cost += self.tcost[self.ev_trans[f]]
            produced |= self.ev_postmask[f]
            consumed |= self.ev_premask[f]
            size += 1
        places = [self.cond_place[b] for b in bits(produced & ~consumed)]
        places.extend(self.net.post[t])
        mark = frozenset(places)
        if len(mark) != len(places):
            raise UnsafeMarking(f"configuration ending in {self.net.trans_names[t]} is not 1-safe")
        self.ev_trans.append(t)
        self.ev_preset.append(preset)
        self.ev_postset.append(None)
        self.ev_premask.append(premask)
        self.ev_postmask.append(0)
        self.ev_local.append(past | (1 << e))
        self.ev_cost.append(cost)
        self.ev_size.append(size)
        self.ev_mark.append(mark)
        self.ev_key.append(None)
        return e

    def pre_marking(self, e: int) -> frozenset:
        t = self.ev_trans[e]
        return (self.ev_mark[e] - self.net.post[t]) | self.net.pre[t]

    # -- queries on configurations ----------------------------------------------

    def local_configuration(self, e: int) -> frozenset:
        return frozenset(bits(self.ev_local[e]))

    def is_configuration(self, events: Iterable[int]) -> bool:
        mask = 0
        for e in events:
            mask |= 1 << e
        used = 0
        for e in bits(mask):
            if self.ev_local[e] & ~mask:
                return False
            if used & self.ev_premask[e]:
                return False
            used |= self.ev_premask[e]
        return True

    def mark_of(self, events: Iterable[int]) -> frozenset:
        events = list(events)
        if not self.is_configuration(events):
            raise InvalidConfiguration(f"{sorted(events)} is not causally closed and conflict-free")
        produced, consumed = self.initial, 0
        tail = []
        for e in events:
            consumed |= self.ev_premask[e]
            if self.ev_postset[e] is None:
                tail.append(self.ev_trans[e])
            else:
                produced |= self.ev_postmask[e]
        places = [self.cond_place[b] for b in bits(produced & ~consumed)]
        for t in tail:
            places.extend(self.net.post[t])
        return frozenset(places)

    def config_cost(self, events: Iterable[int]) -> int:
        return sum(self.tcost[self.ev_trans[e]] for e in events)

    def cost_key(self, events: Iterable[int]) -> tuple:
        ev = sorted(events)
        return (self.config_cost(ev), len(ev), tuple(ev))

    def co(self, b1: int, b2: int) -> bool:
        return bool(self.cond_co[b1] >> b2 & 1)


# -- orders ---------------------------------------------------------------------

def _cmp(a, b) -> int:
    return (a > b) - (a < b)


def order_cost(prefix: Prefix, a: Iterable[int], b: Iterable[int]) -> int:
    """-1 if ``a`` precedes ``b`` in the cost order, 1 if it follows, 0 on equal keys."""
    return _cmp(prefix.cost_key(a), prefix.cost_key(b))


def order_heuristic(prefix: Prefix, a, b, est: Callable[[frozenset], object]) -> int:
    a, b = list(a), list(b)
    fa = prefix.config_cost(a) + est(prefix.mark_of(a))
    fb = prefix.config_cost(b) + est(prefix.mark_of(b))
    if fa != fb:
        return -1 if fa < fb else 1
    return order_cost(prefix, a, b)


def is_cutoff(prefix: Prefix, e: int) -> bool:
    """True iff ``Mark([e])`` is already represented by a configuration ordered before ``[e]``."""
    rep = prefix.imarks.get(prefix.ev_mark[e])
    if rep is None:
        return False
    if rep >= 0:
        assert prefix.ev_key[rep] < prefix.ev_key[e], "imarks representative must precede the event"
    return True


# -- alignment runs ---------------------------------------------------------------

@dataclass
class AlignmentRun:
    """Causal net ending in the target event.

    ``ev_trans[i]`` is the product transition of run event ``i``; conditions
    map to places through ``cond_place``. ``target`` indexes the target event
    and ``sink`` its single output condition.
    """

    spn: Optional[MoveNet]
    net: SystemNet
    ev_trans: tuple
    ev_pre: tuple
    ev_post: tuple
    cond_place: tuple
    cond_pre: tuple
    target: int
    sink: int
    cost: Fraction

    @property
    def n_events(self):
        return len(self.ev_trans)


def run_from_prefix(prefix: Prefix, e_star: int, spn: Optional[MoveNet], cost: Fraction) -> AlignmentRun:
    events = list(bits(prefix.ev_local[e_star]))
    emap = {e: i for i, e in enumerate(events)}
    conds = sorted({b for e in events for b in prefix.ev_preset[e]})
    cmap = {b: i for i, b in enumerate(conds)}
    cond_place = [prefix.cond_place[b] for b in conds]
    cond_pre = [emap.get(prefix.cond_pre[b], -1) for b in conds]
    ev_post = []
    for e in events:
        if e == e_star:
            continue
        ev_post.append(tuple(cmap[b] for b in prefix.ev_postset[e] if b in cmap))
    # target output condition
    sink = len(cond_place)
    t_star = prefix.ev_trans[e_star]
    cond_place.append(min(prefix.net.post[t_star]))
    cond_pre.append(emap[e_star])
    ev_post.insert(emap[e_star], (sink,))
    return AlignmentRun(
        spn=spn,
        net=prefix.net,
        ev_trans=tuple(prefix.ev_trans[e] for e in events),
        ev_pre=tuple(tuple(cmap[b] for b in prefix.ev_preset[e]) for e in events),
        ev_post=tuple(ev_post),
        cond_place=tuple(cond_place),
        cond_pre=tuple(cond_pre),
        target=emap[e_star],
        sink=sink,
        cost=cost,
    )


def check_run(run: AlignmentRun) -> list:
    """Causal-net axioms, homomorphism and single-sink checks; returns violations."""
    out = []
    net = run.net
    nc = len(run.cond_place)
    producers = [[] for _ in range(nc)]
    consumers = [[] for _ in range(nc)]
    for e in range(run.n_events):
        for b in run.ev_pre[e]:
            consumers[b].append(e)
        for b in run.ev_post[e]:
            producers[b].append(e)
    for b in range(nc):
        if len(producers[b]) > 1:
            out.append(f"(a) condition {b} has {len(producers[b])} producers")
        if len(consumers[b]) > 1:
            out.append(f"(e) condition {b} has {len(consumers[b])} consumers")
        if producers[b] and run.cond_pre[b] != producers[b][0]:
            out.append(f"condition {b} producer bookkeeping mismatch")
    # node ids: conditions 0..nc-1, events nc..
    edges = [(b, nc + e) for e in range(run.n_events) for b in run.ev_pre[e]]
    edges += [(nc + e, b) for e in range(run.n_events) for b in run.ev_post[e]]
    if not graphs.is_acyclic(nc + run.n_events, edges):
        out.append("(c) run contains a cycle")
    # (b) self-conflict is impossible once (e) holds; (d) holds for finite nets
    for e, t in enumerate(run.ev_trans):
        if frozenset(run.cond_place[b] for b in run.ev_pre[e]) != net.pre[t] or len(run.ev_pre[e]) != len(net.pre[t]):
            out.append(f"event {e}: preset does not map onto •{net.trans_names[t]}")
        if frozenset(run.cond_place[b] for b in run.ev_post[e]) != net.post[t] or len(run.ev_post[e]) != len(net.post[t]):
            out.append(f"event {e}: postset does not map onto {net.trans_names[t]}•")
    sinks = [b for b in range(nc) if not consumers[b]]
    if sinks != [run.sink] or run.cond_pre[run.sink] != run.target:
        out.append(f"expected single sink condition produced by the target, found {sinks}")
    initial = sorted(run.cond_place[b] for b in range(nc) if not producers[b])
    if initial != sorted(net.m_init):
        out.append("minimal conditions do not map onto the initial marking")
    return out


def replay_run(run: AlignmentRun) -> frozenset:
    """Fire the run's transitions in a topological order from the initial marking."""
    edges = []
    for e in range(run.n_events):
        for b in run.ev_pre[e]:
            if run.cond_pre[b] >= 0:
                edges.append((run.cond_pre[b], e))
    m = run.net.m_init
    for e in graphs.topological_order(run.n_events, edges):
        m = fire(run.net, m, run.ev_trans[e])
    return m


# -- the search ---------------------------------------------------------------------

@dataclass
class UnfoldResult:
    runs: list
    lowest_cost: Optional[Fraction]
    stats: dict
    prefix: Prefix = field(repr=False)


class Unfolder:
    """Prioritised prefix construction with cut-off detection.

    ``target`` is the transition whose events end the search (``t*`` for an
    extended product); ``None`` unfolds until the queue is drained, which
    yields a complete finite prefix of ``net``.
    """

    def __init__(self, net: SystemNet, costs, *, target: Optional[int] = None, order: str = COST,
                 heuristic: Optional[MarkingEquation] = None, budget: Optional[Budget] = None,
                 cutoffs: bool = True):
        if order not in (COST, HEURISTIC):
            raise ValueError(f"unknown order {order!r}")
        if order == HEURISTIC and heuristic is None:
            raise ValueError("the heuristic order needs a marking-equation estimator")
        self.prefix = Prefix(net, costs)
        self.target = target
        self.order = order
        self.heuristic = heuristic
        self.budget = budget or Budget(timeout=None)
        self.use_cutoffs = cutoffs
        self.queue = []
        self.stats = {"events": 0, "appended": 0, "conditions": 0, "cutoffs": 0, "discarded": 0,
                      "popped": 0, "queue_peak": 0, "equal_keys": 0}

    def _key(self, e: int) -> tuple:
        px = self.prefix
        ck = (px.ev_cost[e], px.ev_size[e], tuple(bits(px.ev_local[e])))
        if self.order == COST:
            return ck
        t = px.ev_trans[e]
        est = self.heuristic.value_after(px.pre_marking(e), t, px.ev_mark[e])
        if est == INF:
            return (1, 0) + ck
        return (0, px.ev_cost[e] + est) + ck

    def _primary(self, key: tuple):
        return key[0] if self.order == COST else (key[0], key[1])

    def _enqueue(self, cands):
        px = self.prefix
        for t, preset in cands:
            e = px.new_event(t, preset)
            key = self._key(e)
            px.ev_key[e] = key
            heapq.heappush(self.queue, (key, e))
        self.stats["queue_peak"] = max(self.stats["queue_peak"], len(self.queue))

    def run(self, stop_at_first: bool = True, early_exit: bool = True):
        """Returns ``(target events popped, stats)``."""
        px = self.prefix
        start = time.perf_counter()
        deadline = None if self.budget.timeout is None else start + self.budget.timeout
        self._enqueue(px.extensions(px.init_conditions()))
        found = []
        best = None
        last_key = None
        while self.queue:
            if deadline is not None and self.stats["popped"] % 64 == 0 and time.perf_counter() > deadline:
                raise BudgetExceeded("wall-clock budget exceeded", stats=self._finish_stats(start))
            if self.budget.max_events is not None and px.n_events > self.budget.max_events:
                raise BudgetExceeded("event budget exceeded", stats=self._finish_stats(start))
            key, e = heapq.heappop(self.queue)
            self.stats["popped"] += 1
            if last_key is not None and key == last_key:
                self.stats["equal_keys"] += 1
            last_key = key
            t = px.ev_trans[e]
            if t == self.target:
                if best is None:
                    best = key
                elif early_exit and self._primary(key) > self._primary(best):
                    break
                found.append(e)
                if stop_at_first:
                    break
                continue
            if best is not None and early_exit and self._primary(key) > self._primary(best):
                break
            if px.ev_local[e] & px.cutoff:
                self.stats["discarded"] += 1
                continue
            ymask = px.append_postset(e)
            if self.use_cutoffs and is_cutoff(px, e):
                px.cutoff |= 1 << e
                self.stats["cutoffs"] += 1
                continue
            px.imarks.setdefault(px.ev_mark[e], e)
            self._enqueue(px.extensions(ymask))
        stats = self._finish_stats(start)
        return found, stats

    def _finish_stats(self, start) -> dict:
        px = self.prefix
        self.stats["events"] = px.n_events
        self.stats["appended"] = bin(px.appended).count("1")
        self.stats["conditions"] = px.n_conditions
        self.stats["wall_ms"] = (time.perf_counter() - start) * 1000.0
        if self.heuristic is not None:
            self.stats["lp_solved"] = self.heuristic.solved
            self.stats["lp_derived"] = self.heuristic.derived
        return dict(self.stats)


def unfold(spn: MoveNet, cm: Optional[CostModel] = None, order: str = COST, stop_at_first: bool = True,
           budget: Optional[Budget] = None, early_exit: bool = True, cutoffs: bool = True) -> UnfoldResult:
    """Search the extended product for minimum-cost runs ending in ``t*``.

    Raises :class:`ModelNotEasySound` when the queue drains without a target
    event and :class:`BudgetExceeded` when ``budget`` runs out.
    """
    if not spn.extended:
        raise ValueError("unfold needs an extended product net (see extend_with_target)")
    cm = cm or CostModel()
    costs = spn.int_costs(cm)
    heur = MarkingEquation(spn, cm) if order == HEURISTIC else None
    eng = Unfolder(spn.net, costs, target=spn.target, order=order, heuristic=heur, budget=budget,
                   cutoffs=cutoffs)
    found, stats = eng.run(stop_at_first=stop_at_first, early_exit=early_exit)
    px = eng.prefix
    if not found:
        raise ModelNotEasySound(stats=stats)
    scale = cm.scale()
    lowest = min(px.ev_cost[e] for e in found)
    runs = [run_from_prefix(px, e, spn, Fraction(px.ev_cost[e], scale)) for e in found if px.ev_cost[e] == lowest]
    return UnfoldResult(runs, Fraction(lowest, scale), stats, px)


def unfold_net(net: SystemNet, costs=None, order: str = COST, budget: Optional[Budget] = None) -> Prefix:
    """Complete finite prefix of an arbitrary 1-safe net (unit costs by default)."""
    costs = costs if costs is not None else (1,) * net.n_transitions
    eng = Unfolder(net, costs, order=order, budget=budget)
    eng.run(stop_at_first=False, early_exit=False)
    return eng.prefix


def prefix_markings(prefix: Prefix) -> set:
    """Markings of all configurations of the prefix built from appended events."""
    start = prefix.initial
    seen = {start}
    todo = [start]
    cands = [e for e in range(prefix.n_events) if prefix.ev_postset[e] is not None]
    while todo:
        cut = todo.pop()
        for e in cands:
            pm = prefix.ev_premask[e]
            if cut & pm == pm:
                nxt = (cut & ~pm) | prefix.ev_postmask[e]
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    return {frozenset(prefix.cond_place[b] for b in bits(c)) for c in seen}


def possible_extensions(prefix: Prefix, new_conditions: Iterable[int]) -> list:
    mask = 0
    for b in new_conditions:
        mask |= 1 << b
    return prefix.extensions(mask)


def to_dot(prefix: Prefix) -> str:
    """Prefix dump in Graphviz format; cut-off events are drawn dashed."""
    net = prefix.net
    lines = ["digraph prefix {", "  rankdir=TB;"]
    for b, p in enumerate(prefix.cond_place):
        lines.append(f'  c{b} [shape=circle,label="c{b}\\n{net.place_names[p]}"];')
    for e, t in enumerate(prefix.ev_trans):
        if prefix.ev_postset[e] is None:
            continue
        style = ",style=dashed" if prefix.cutoff >> e & 1 else ""
        lines.append(f'  e{e} [shape=box,label="e{e}\\n{net.trans_names[t]}"{style}];')
        for b in prefix.ev_preset[e]:
            lines.append(f"  c{b} -> e{e};")
        for b in prefix.ev_postset[e]:
            lines.append(f"  e{e} -> c{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(prefix: Prefix) -> dict:
    net = prefix.net
    return {
        "conditions": [{"id": b, "place": net.place_names[p], "producer": prefix.cond_pre[b]}
                       for b, p in enumerate(prefix.cond_place)],
        "events": [{"id": e, "transition": net.trans_names[t], "preset": list(prefix.ev_preset[e]),
                    "postset": list(prefix.ev_postset[e] or []), "cutoff": bool(prefix.cutoff >> e & 1),
                    "appended": prefix.ev_postset[e] is not None}
                   for e, t in enumerate(prefix.ev_trans)],
    }
