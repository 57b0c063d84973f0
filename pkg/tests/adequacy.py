"""Random configurations of finished prefixes and isomorphic extensions of them.

Used to check the three properties an adequate order must have: it refines
strict inclusion, it is total on distinct configurations, and it survives
appending the same extension to two configurations with equal markings.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from unfold_align.petri import enabled
from unfold_align.product import CostModel, build_extended_product
from unfold_align.ptrace import ptrace_to_trace_net
from unfold_align.unfolder import Prefix, bits, order_cost, unfold_net

from instances import random_instance, random_safe_net


def appended(px: Prefix) -> list:
    return [e for e in range(px.n_events) if px.ev_postset[e] is not None]


def cut_of(px: Prefix, events) -> int:
    produced, consumed = px.initial, 0
    for e in events:
        produced |= px.ev_postmask[e]
        consumed |= px.ev_premask[e]
    return produced & ~consumed


def random_configuration(px: Prefix, rng: random.Random, max_steps: int = 10) -> frozenset:
    """Random walk over appended events whose preset lies in the current cut."""
    pool = appended(px)
    cut, events = px.initial, set()
    for _ in range(rng.randint(1, max_steps)):
        ready = [e for e in pool if e not in events and cut & px.ev_premask[e] == px.ev_premask[e]]
        if not ready:
            break
        e = rng.choice(ready)
        events.add(e)
        cut = (cut & ~px.ev_premask[e]) | px.ev_postmask[e]
    return frozenset(events)


def proper_subconfiguration(px: Prefix, c: frozenset, rng: random.Random) -> frozenset:
    """Drop one or more maximal events."""
    c = set(c)
    for _ in range(rng.randint(1, len(c))):
        used = 0
        for e in c:
            used |= px.ev_premask[e]
        maximal = [e for e in c if not px.ev_postmask[e] & used]
        c.discard(rng.choice(sorted(maximal)))
        if not c:
            break
    return frozenset(c)


def extend(px: Prefix, c: frozenset, transitions) -> frozenset:
    """Append fresh events for ``transitions`` on top of ``c``; ids exceed every existing one."""
    cut = cut_of(px, c)
    new = set()
    for t in transitions:
        preset = []
        for p in sorted(px.net.pre[t]):
            (b,) = [b for b in bits(cut) if px.cond_place[b] == p]
            preset.append(b)
        e = px.new_event(t, tuple(sorted(preset)))
        px.append_postset(e)
        cut = (cut & ~px.ev_premask[e]) | px.ev_postmask[e]
        new.add(e)
    return c | new


def random_firing(net, m, rng: random.Random, length: int) -> list:
    seq = []
    for _ in range(length):
        en = sorted(enabled(net, m))
        if not en:
            break
        t = rng.choice(en)
        seq.append(t)
        m = (m - net.pre[t]) | net.post[t]
    return seq


@dataclass
class Tally:
    configurations: int = 0
    subset_checks: int = 0
    totality_checks: int = 0
    extension_checks: int = 0
    counterexamples: list = field(default_factory=list)


def check_adequacy(n_configurations: int = 500, per_prefix: int = 10, seed: int = 0) -> Tally:
    tally = Tally()
    k = 0
    while tally.configurations < n_configurations:
        rng = random.Random(seed * 100_003 + k)
        if k % 2:
            model, trace = random_instance(seed * 100_003 + k)
            spn = build_extended_product(ptrace_to_trace_net(trace), model)
            net, costs = spn.net, spn.int_costs(CostModel())
        else:
            net = random_safe_net(seed * 100_003 + k)
            costs = tuple(rng.randint(0, 3) for _ in range(net.n_transitions))
        k += 1
        px = unfold_net(net, costs)
        configs = [random_configuration(px, rng) for _ in range(per_prefix)]
        tally.configurations += len(configs)
        for c in configs:
            if c:
                sub = proper_subconfiguration(px, c, rng)
                tally.subset_checks += 1
                if order_cost(px, sub, c) != -1:
                    tally.counterexamples.append(("subset", k, sorted(sub), sorted(c)))
        for a, b in itertools.combinations(configs, 2):
            if a == b:
                continue
            tally.totality_checks += 1
            if order_cost(px, a, b) == 0 or order_cost(px, a, b) != -order_cost(px, b, a):
                tally.counterexamples.append(("total", k, sorted(a), sorted(b)))
        # equal-marking pairs: every cut-off against its representative, plus random collisions
        pairs = []
        for e in bits(px.cutoff):
            rep = px.imarks[px.ev_mark[e]]
            pairs.append((frozenset() if rep < 0 else px.local_configuration(rep), px.local_configuration(e)))
        by_mark = {}
        for c in configs:
            by_mark.setdefault(px.mark_of(c), []).append(c)
        for group in by_mark.values():
            pairs += [(a, b) for a, b in zip(group, group[1:]) if a != b]
        for a, b in pairs:
            before = order_cost(px, a, b)
            seq = random_firing(net, px.mark_of(a), rng, rng.randint(1, 3))
            if not seq:
                continue
            ea, eb = extend(px, a, seq), extend(px, b, seq)
            tally.extension_checks += 1
            if px.mark_of(ea) != px.mark_of(eb) or order_cost(px, ea, eb) != before:
                tally.counterexamples.append(("extension", k, sorted(a), sorted(b), seq))
    return tally
