"""Synthetic block-structured models, simulated p-trace logs, noise, and the benchmark harness."""
from __future__ import annotations

import csv
import io
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .engines import ENGINES, align_spn
from .errors import BudgetExceeded
from .petri import TAU, SystemNet, enabled, fire
from .product import CostModel, build_extended_product
from .ptrace import PTrace, RawEvent, derive_ptrace, ptrace_to_trace_net
from .unfolder import Budget

SEQ, XOR, AND, LOOP = "seq", "xor", "and", "loop"
NOISE_OPS = ("remove_event", "swap_order", "insert_alien_event")
BASE_TIME = 1_700_000_000_000


@dataclass(frozen=True)
class GenSpec:
    n_activities: int = 6
    parallelism_pct: float = 50
    seed: int = 0
    no_loops: bool = True
    no_duplicates: bool = True

    def __post_init__(self):
        if self.n_activities < 1:
            raise ValueError("need at least one activity")
        if not 0 <= self.parallelism_pct <= 100:
            raise ValueError("parallelism_pct must lie in [0, 100]")


@dataclass(frozen=True)
class NoiseSpec:
    noise_pct: float = 0
    seed: int = 0
    ops: tuple = ((NOISE_OPS[0], 1.0), (NOISE_OPS[1], 1.0), (NOISE_OPS[2], 1.0))


@dataclass
class BenchRecord:
    engine: str
    parallelism: float
    noise: float
    trace: str
    cost: Optional[Fraction]
    wall_ms: float
    timed_out: bool
    events: int = 0
    queue_peak: int = 0


# -- process trees ------------------------------------------------------------------

def _activity_names(n: int) -> list:
    names = []
    for i in range(n):
        s, k = "", i
        while True:
            s = chr(ord("a") + k % 26) + s
            k = k // 26 - 1
            if k < 0:
                break
        names.append(s)
    return names


def random_tree(spec: GenSpec, rng: Optional[random.Random] = None):
    """Nested tuples ``(op, [children])`` with string leaves; same-operator nesting is flattened."""
    rng = rng or random.Random(spec.seed)
    labels = _activity_names(spec.n_activities)
    if not spec.no_duplicates and len(labels) > 2:
        labels[-1] = labels[rng.randrange(len(labels) - 1)]
    p_and = spec.parallelism_pct / 100.0

    def build(labs):
        if len(labs) == 1:
            return labs[0]
        r = rng.random()
        if r < p_and:
            op = AND
        elif not spec.no_loops and r < p_and + (1 - p_and) * 0.15:
            op = LOOP
        else:
            op = SEQ if rng.random() < 0.5 else XOR
        if op == LOOP:
            cut = rng.randint(1, len(labs) - 1)
            return (LOOP, [build(labs[:cut]), build(labs[cut:])])
        k = rng.randint(2, min(3, len(labs)))
        cuts = sorted(rng.sample(range(1, len(labs)), k - 1))
        parts = [labs[i:j] for i, j in zip([0] + cuts, cuts + [len(labs)])]
        kids = []
        for part in parts:
            sub = build(part)
            if isinstance(sub, tuple) and sub[0] == op:
                kids.extend(sub[1])
            else:
                kids.append(sub)
        return (op, kids)

    return build(labels)


def tree_to_net(tree) -> SystemNet:
    """Compile a process tree into a sound, 1-safe workflow net."""
    places, trans, arcs = [], [], []
    counter = {"p": 0, "t": 0}

    def place():
        name = f"p{counter['p']}"
        counter["p"] += 1
        places.append(name)
        return name

    def transition(label):
        name = f"t{counter['t']}"
        counter["t"] += 1
        trans.append((name, label))
        return name

    def comp(node, p_in, p_out):
        if isinstance(node, str):
            t = transition(node)
            arcs.extend([(p_in, t), (t, p_out)])
            return
        op, kids = node
        if op == SEQ:
            cur = p_in
            for i, k in enumerate(kids):
                nxt = p_out if i == len(kids) - 1 else place()
                comp(k, cur, nxt)
                cur = nxt
        elif op == XOR:
            for k in kids:
                comp(k, p_in, p_out)
        elif op == AND:
            split, join = transition(TAU), transition(TAU)
            arcs.append((p_in, split))
            arcs.append((join, p_out))
            for k in kids:
                s, e = place(), place()
                arcs.extend([(split, s), (e, join)])
                comp(k, s, e)
        elif op == LOOP:
            enter, leave = transition(TAU), transition(TAU)
            q_in, q_out = place(), place()
            arcs.extend([(p_in, enter), (enter, q_in), (q_out, leave), (leave, p_out)])
            comp(kids[0], q_in, q_out)
            comp(kids[1], q_out, q_in)
        else:
            raise ValueError(op)

    src, snk = place(), place()
    comp(tree, src, snk)
    return SystemNet.build(places, trans, arcs, [src], [snk])


def generate_model(spec: GenSpec) -> SystemNet:
    return tree_to_net(random_tree(spec))


# -- log simulation -------------------------------------------------------------------

def _play(net: SystemNet, rng: random.Random, max_steps: int = 10_000):
    """Random firing sequence to the final marking with each event's causal predecessors."""
    m = net.m_init
    producer = {p: None for p in m}
    fired, preds = [], []
    for _ in range(max_steps):
        if m == net.m_final:
            return fired, preds
        en = sorted(enabled(net, m))
        if not en:
            raise RuntimeError("simulation deadlocked before the final marking")
        t = rng.choice(en)
        preds.append({producer[p] for p in net.pre[t] if producer[p] is not None})
        m = fire(net, m, t)
        for p in net.pre[t]:
            producer.pop(p, None)
        for p in net.post[t]:
            producer[p] = len(fired)
        fired.append(t)
    raise RuntimeError("simulation did not terminate")


def _intervals(n: int, succ: Sequence[set]) -> list:
    """Interval per node with ``a`` before ``b`` whenever ``b`` is a successor of ``a``.

    Intervals stretch up to just before the earliest successor starts, so
    unordered nodes overlap whenever an interval order allows it.
    """
    depth = [0] * n
    for v in range(n):  # nodes arrive in firing (topological) order
        for w in succ[v]:
            depth[w] = max(depth[w], depth[v] + 1)
    start = [10 * d for d in depth]
    horizon = max(start, default=0) + 5
    end = [min((start[w] for w in succ[v]), default=horizon + 1) - 1 for v in range(n)]
    return list(zip(start, end))


def simulate_trace(net: SystemNet, rng: random.Random, case_id: str, offset: int = 0) -> PTrace:
    fired, preds = _play(net, rng)
    visible = [i for i, t in enumerate(fired) if net.labels[t] is not TAU]
    # visible causal predecessors, looking through silent events
    vpred = []
    for i in range(len(fired)):
        acc = set()
        for j in preds[i]:
            acc |= {j} if net.labels[fired[j]] is not TAU else vpred[j]
        vpred.append(acc)
    pos = {v: k for k, v in enumerate(visible)}
    succ = [set() for _ in visible]
    for v in visible:
        for u in vpred[v]:
            succ[pos[u]].add(pos[v])
    ivs = _intervals(len(visible), succ)
    events = [RawEvent(case_id, net.labels[fired[v]], offset + s, offset + e, f"e{k}")
              for k, (v, (s, e)) in enumerate(zip(visible, ivs))]
    if not events:
        raise RuntimeError("simulated run has no visible events")
    return derive_ptrace(events)


def simulate_log(net: SystemNet, n_traces: int, seed: int = 0) -> list:
    rng = random.Random(seed)
    width = len(str(max(n_traces - 1, 1)))
    return [simulate_trace(net, rng, f"case_{i:0{width}d}", BASE_TIME + i * 1_000_000) for i in range(n_traces)]


# -- noise ----------------------------------------------------------------------------------

def _raw(t: PTrace) -> list:
    if t.intervals is None:
        raise ValueError("noise insertion needs interval timestamps")
    return [RawEvent(t.case_id, lab, s, e, eid) for eid, lab, (s, e) in zip(t.event_ids, t.labels, t.intervals)]


def _mutate(t: PTrace, op: str, rng: random.Random, alien: int) -> Optional[PTrace]:
    evs = _raw(t)
    if op == "remove_event":
        if len(evs) <= 1:
            return None
        del evs[rng.randrange(len(evs))]
    elif op == "swap_order":
        clo = sorted(t.closure())
        if not clo:
            return None
        a, b = clo[rng.randrange(len(clo))]
        ea, eb = evs[a], evs[b]
        evs[a] = RawEvent(ea.case_id, eb.activity, ea.start, ea.end, ea.id)
        evs[b] = RawEvent(eb.case_id, ea.activity, eb.start, eb.end, eb.id)
    elif op == "insert_alien_event":
        twin = evs[rng.randrange(len(evs))]
        ids = {e.id for e in evs}
        k = 0
        while f"x{k}" in ids:
            k += 1
        evs.append(RawEvent(t.case_id, f"alien{alien}", twin.start, twin.end, f"x{k}"))
    else:
        raise ValueError(f"unknown noise op {op!r}")
    return derive_ptrace(evs)


def inject_noise(log: Sequence[PTrace], spec: NoiseSpec, return_mutated: bool = False):
    """Apply one weighted operation to each trace selected with probability ``noise_pct``."""
    rng = random.Random(spec.seed)
    names = [op for op, _ in spec.ops]
    weights = [w for _, w in spec.ops]
    out, mutated = [], []
    for i, t in enumerate(log):
        if rng.random() < spec.noise_pct / 100.0:
            op = rng.choices(names, weights)[0]
            new = _mutate(t, op, rng, rng.randrange(1000))
            if new is not None:
                out.append(new)
                mutated.append(i)
                continue
        out.append(t)
    return (out, mutated) if return_mutated else out


# -- harness ----------------------------------------------------------------------------------

@dataclass
class Corpus:
    parallelism: float
    noise: float
    model: SystemNet
    log: list = field(default_factory=list)


def desk_corpus(parallelism: float, noise: float, n_traces: int = 50, n_activities: int = 6,
                seed: int = 0) -> Corpus:
    model = generate_model(GenSpec(n_activities, parallelism, seed))
    log = simulate_log(model, n_traces, seed + 1)
    log = inject_noise(log, NoiseSpec(noise, seed + 2))
    return Corpus(parallelism, noise, model, log)


def run_bench(corpora: Sequence[Corpus], engines: Sequence[str] = ENGINES, budget: Optional[Budget] = None,
              cm: Optional[CostModel] = None) -> list:
    """One record per (corpus, trace, engine); timeouts become records, not errors."""
    budget = budget or Budget(timeout=3.0)
    cm = cm or CostModel()
    for e in engines:
        if e not in ENGINES:
            raise ValueError(f"unknown engine {e!r}")
    records = []
    for c in corpora:
        for t in c.log:
            spn = build_extended_product(ptrace_to_trace_net(t), c.model)
            for eng in engines:
                try:
                    o = align_spn(spn, cm, eng, budget)
                except BudgetExceeded as exc:
                    st = exc.stats or {}
                    records.append(BenchRecord(eng, c.parallelism, c.noise, t.case_id, None,
                                               st.get("wall_ms", (budget.timeout or 0) * 1000.0), True,
                                               st.get("events", st.get("generated", 0)), st.get("queue_peak", 0)))
                    continue
                st = o.stats
                records.append(BenchRecord(eng, c.parallelism, c.noise, t.case_id, o.cost, o.wall_ms, False,
                                           st.get("events", st.get("generated", 0)), st.get("queue_peak", 0)))
    return records


def summarize(records: Sequence[BenchRecord]) -> list:
    groups = {}
    for r in records:
        groups.setdefault((r.parallelism, r.noise, r.engine), []).append(r)
    rows = []
    for (par, noise, eng), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], ENGINES.index(kv[0][2]))):
        walls = [r.wall_ms for r in rs]
        ok = [r for r in rs if not r.timed_out]
        rows.append({
            "parallelism": par, "noise": noise, "engine": eng, "traces": len(rs),
            "mean_ms": statistics.fmean(walls), "median_ms": statistics.median(walls),
            "aligned_pct": 100.0 * len(ok) / len(rs),
            "mean_cost": float(statistics.fmean(r.cost for r in ok)) if ok else None,
        })
    return rows


def regression_rows(summary: Sequence[dict]) -> list:
    """Least-squares line of mean wall time against noise, per (parallelism, engine)."""
    groups = {}
    for row in summary:
        groups.setdefault((row["parallelism"], row["engine"]), []).append((row["noise"], row["mean_ms"]))
    out = []
    for (par, eng), pts in sorted(groups.items(), key=lambda kv: (kv[0][0], ENGINES.index(kv[0][1]))):
        xs, ys = zip(*pts)
        if len(pts) > 1 and len(set(xs)) > 1:
            slope, intercept = statistics.linear_regression(xs, ys)
        else:
            slope, intercept = 0.0, statistics.fmean(ys)
        for x, y in pts:
            out.append({"parallelism": par, "engine": eng, "noise": x, "mean_ms": y,
                        "fit_ms": intercept + slope * x, "slope": slope, "intercept": intercept})
    return out


def _fmt(v):
    if isinstance(v, Fraction):
        return str(float(v))
    if isinstance(v, float):
        return f"{v:.3f}"
    if v is None:
        return ""
    return str(v)


BENCH_COLUMNS = ["engine", "parallelism", "noise", "trace", "cost", "wall_ms", "timed_out", "events", "queue_peak"]


def records_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in BENCH_COLUMNS])
    return buf.getvalue()


def rows_csv(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()
