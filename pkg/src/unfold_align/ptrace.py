"""Partially ordered traces: ingestion from interval events and trace-net encoding."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import graphs
from .errors import CyclicOrder, EmptyInput, InputError, MixedCaseIds, NegativeDuration
from .petri import SystemNet

log = logging.getLogger(__name__)

START_MARK = "▶"
END_MARK = "■"


@dataclass(frozen=True)
class RawEvent:
    case_id: str
    activity: str
    start: int
    end: Optional[int] = None
    id: Optional[str] = None


@dataclass(frozen=True, eq=False)
class PTrace:
    """Labeled DAG of events; ``edges`` holds the transitive reduction over event indices."""

    case_id: str
    event_ids: tuple
    labels: tuple
    edges: frozenset
    intervals: Optional[tuple] = None

    @classmethod
    def from_order(cls, case_id, event_ids, labels, order, intervals=None) -> "PTrace":
        """Build from any edge set whose transitive closure is the partial order."""
        n = len(event_ids)
        if len(labels) != n:
            raise InputError("every event needs exactly one label")
        if len(set(event_ids)) != n:
            raise InputError("duplicate event ids")
        order = [(a, b) for a, b in order]
        if any(a == b for a, b in order):
            raise CyclicOrder("order must be irreflexive")
        return cls(case_id, tuple(event_ids), tuple(labels),
                   graphs.transitive_reduction(n, order), intervals)

    @property
    def n(self) -> int:
        return len(self.event_ids)

    def closure(self) -> frozenset:
        return graphs.transitive_closure(self.n, self.edges)

    def precedes(self, a: int, b: int) -> bool:
        return (a, b) in self.closure()

    def minimal(self) -> list:
        has_pred = {b for _, b in self.edges}
        return [v for v in range(self.n) if v not in has_pred]

    def maximal(self) -> list:
        has_succ = {a for a, _ in self.edges}
        return [v for v in range(self.n) if v not in has_succ]

    def variant_key(self) -> tuple:
        return graphs.canonical_signature(self.labels, self.edges)

    def same_variant(self, other: "PTrace") -> bool:
        return graphs.isomorphic(self.labels, self.edges, other.labels, other.edges)

    def linearizations(self):
        """All linear extensions as tuples of event indices (exponential; tests only)."""
        preds = [0] * self.n
        for a, b in self.edges:
            preds[b] |= 1 << a

        def rec(done, seq):
            if len(seq) == self.n:
                yield tuple(seq)
                return
            for v in range(self.n):
                if not done >> v & 1 and preds[v] & done == preds[v]:
                    seq.append(v)
                    yield from rec(done | 1 << v, seq)
                    seq.pop()

        yield from rec(0, [])

    def to_dict(self) -> dict:
        events = []
        for i, (eid, lab) in enumerate(zip(self.event_ids, self.labels)):
            ev = {"id": eid, "activity": lab}
            if self.intervals is not None:
                ev["start"], ev["end"] = self.intervals[i]
            events.append(ev)
        d = {"case": self.case_id, "events": events}
        if self.intervals is None:
            d["order"] = [[self.event_ids[a], self.event_ids[b]] for a, b in sorted(self.edges)]
        return d


def derive_ptrace(events: Sequence[RawEvent]) -> PTrace:
    """Order events by the strict interval rule: ``a`` precedes ``b`` iff ``end(a) < start(b)``."""
    if not events:
        raise EmptyInput("a p-trace needs at least one event")
    cases = {e.case_id for e in events}
    if len(cases) > 1:
        raise MixedCaseIds(f"events from several cases: {sorted(cases)}")
    intervals = []
    for e in events:
        end = e.end
        if end is None:
            log.warning("event %s/%s has no end timestamp; treating it as instantaneous", e.case_id, e.activity)
            end = e.start
        if end < e.start:
            raise NegativeDuration(f"event {e.activity} ends before it starts")
        intervals.append((e.start, end))
    ids = [e.id if e.id is not None else f"e{i}" for i, e in enumerate(events)]
    n = len(events)
    # interval orders are transitively closed already
    order = [(a, b) for a in range(n) for b in range(n) if intervals[a][1] < intervals[b][0]]
    return PTrace.from_order(events[0].case_id, ids, [e.activity for e in events], order, tuple(intervals))


@dataclass(frozen=True, eq=False)
class TraceNet:
    net: SystemNet
    origin: tuple  # transition index -> event index
    ptrace: PTrace


def ptrace_to_trace_net(rho: PTrace) -> TraceNet:
    """Encode a p-trace as an acyclic, choice-free system net.

    One place per reduction edge, one initial place per minimal event and one
    final place per maximal event.
    """
    ids = rho.event_ids
    places, arcs, m_init, m_final = [], [], [], []
    for v in rho.minimal():
        p = f"p_({START_MARK},{ids[v]})"
        places.append(p)
        arcs.append((p, ids[v]))
        m_init.append(p)
    for a, b in sorted(rho.edges):
        p = f"p_({ids[a]},{ids[b]})"
        places.append(p)
        arcs += [(ids[a], p), (p, ids[b])]
    for v in rho.maximal():
        p = f"p_({ids[v]},{END_MARK})"
        places.append(p)
        arcs.append((ids[v], p))
        m_final.append(p)
    net = SystemNet.build(places, list(zip(ids, rho.labels)), arcs, m_init, m_final)
    return TraceNet(net, tuple(range(rho.n)), rho)


# -- readers / writers ---------------------------------------------------------

def parse_timestamp(value) -> int:
    """Epoch milliseconds from an int/float or an RFC3339 string."""
    if value is None or value == "":
        return None
    if isinstance(value, (int, float)):
        return int(value)
    s = str(value).strip()
    try:
        return int(float(s))
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(s.replace("Z", "+00:00"))
    except ValueError:
        raise InputError(f"unparseable timestamp {value!r}") from None
    return int(round(dt.timestamp() * 1000))


def ptrace_from_dict(d: dict) -> PTrace:
    try:
        case = str(d["case"])
        evs = d["events"]
        if "order" in d:
            ids = [str(e["id"]) for e in evs]
            pos = {e: i for i, e in enumerate(ids)}
            order = [(pos[a], pos[b]) for a, b in d["order"]]
            return PTrace.from_order(case, ids, [e["activity"] for e in evs], order)
        raw = [RawEvent(case, e["activity"], parse_timestamp(e["start"]), parse_timestamp(e.get("end")),
                        str(e.get("id", f"e{i}"))) for i, e in enumerate(evs)]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed p-trace: {exc!r}") from None
    return derive_ptrace(raw)


def load_ptraces_json(text: str, source: str = "<json>") -> list:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(data, dict) and "traces" in data:
        data = data["traces"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise InputError(f"{source}: expected a p-trace object or a list of them")
    return [ptrace_from_dict(d) for d in data]


def read_csv_events(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    need = {"case", "activity", "start", "end"}
    if reader.fieldnames is None or not need <= set(reader.fieldnames):
        raise InputError(f"CSV needs columns {sorted(need)}, got {reader.fieldnames}")
    counters = {}
    out = []
    for row in reader:
        case = row["case"]
        k = counters.get(case, 0)
        counters[case] = k + 1
        out.append(RawEvent(case, row["activity"], parse_timestamp(row["start"]),
                            parse_timestamp(row["end"]), row.get("id") or f"e{k}"))
    return out


def ptraces_from_events(events: Iterable[RawEvent]) -> list:
    by_case = {}
    for e in events:
        by_case.setdefault(e.case_id, []).append(e)
    return [derive_ptrace(by_case[c]) for c in sorted(by_case)]


def load_log(path) -> list:
    """Load p-traces from ``.csv`` or p-trace JSON, sorted by case id."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        traces = ptraces_from_events(read_csv_events(text))
    else:
        traces = load_ptraces_json(text, str(path))
    return sorted(traces, key=lambda t: t.case_id)


def write_csv(traces: Sequence[PTrace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "id", "activity", "start", "end"])
    for t in traces:
        if t.intervals is None:
            raise InputError(f"trace {t.case_id} has no timestamps; CSV needs start/end")
        for eid, lab, (s, e) in zip(t.event_ids, t.labels, t.intervals):
            w.writerow([t.case_id, eid, lab, s, e])
    return buf.getvalue()


def group_variants(traces: Sequence[PTrace]) -> list:
    """Group isomorphic p-traces; returns ``[(representative, [traces...]), ...]``.

    Groups are ordered by the smallest case id they contain.
    """
    buckets = {}
    groups = []
    for t in sorted(traces, key=lambda t: t.case_id):
        cands = buckets.setdefault(t.variant_key(), [])
        for g in cands:
            if g[0].same_variant(t):
                g[1].append(t)
                break
        else:
            g = (t, [t])
            cands.append(g)
            groups.append(g)
    return groups
