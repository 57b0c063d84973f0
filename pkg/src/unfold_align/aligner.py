"""From alignment runs to alignment orders, u-alignments and deviation diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import graphs
from .petri import TAU, label_str
from .product import LOG, MODEL, SKIP, SYNC, TARGET, CostModel, MoveNet
from .unfolder import AlignmentRun

INVISIBLE = "invisible"


def transitive_reduction(nodes, edges) -> set:
    """Transitive reduction of a DAG given as node ids and ``(u, v)`` pairs."""
    nodes = list(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    red = graphs.transitive_reduction(len(nodes), [(idx[a], idx[b]) for a, b in edges])
    return {(nodes[a], nodes[b]) for a, b in red}


@dataclass(frozen=True)
class MoveNode:
    id: str
    log: str  # activity label or SKIP
    model: Optional[str]  # activity label, TAU (None) or SKIP
    kind: str  # sync / log / model / invisible
    log_event: Optional[str] = None  # p-trace event id
    model_trans: Optional[str] = None  # model transition id


@dataclass
class AlignmentOrder:
    nodes: list
    edges: dict  # (u, v) -> frozenset of tags {"log", "model"}
    spn: Optional[MoveNet] = field(default=None, repr=False)

    def node(self, nid: str) -> MoveNode:
        return self._by_id[nid]

    def __post_init__(self):
        self._by_id = {n.id: n for n in self.nodes}

    def is_dag(self) -> bool:
        idx = {n.id: i for i, n in enumerate(self.nodes)}
        return graphs.is_acyclic(len(self.nodes), [(idx[a], idx[b]) for a, b in self.edges])

    def closure(self) -> set:
        idx = {n.id: i for i, n in enumerate(self.nodes)}
        clo = graphs.transitive_closure(len(self.nodes), [(idx[a], idx[b]) for a, b in self.edges])
        return {(self.nodes[a].id, self.nodes[b].id) for a, b in clo}

    def labels(self) -> list:
        return [(n.log, label_str(n.model) if n.model != SKIP else SKIP) for n in self.nodes]


def _kind(mv) -> str:
    if mv.kind == MODEL and mv.label is TAU:
        return INVISIBLE
    return mv.kind


def run_to_alignment_order(run: AlignmentRun) -> AlignmentOrder:
    """Drop the target event and turn every other event into a move node.

    Conditions between two events become dependencies tagged by the side of
    the place they map to.
    """
    spn = run.spn
    nodes = []
    ids = {}
    for e, t in enumerate(run.ev_trans):
        mv = spn.moves[t]
        if mv.kind == TARGET:
            continue
        nid = f"n{len(nodes)}"
        ids[e] = nid
        log_lab = spn.trace.net.labels[mv.log] if mv.log is not None else SKIP
        model_lab = spn.model.labels[mv.model] if mv.model is not None else SKIP
        log_ev = spn.trace.ptrace.event_ids[spn.trace.origin[mv.log]] if mv.log is not None else None
        model_tr = spn.model.trans_names[mv.model] if mv.model is not None else None
        nodes.append(MoveNode(nid, log_lab, model_lab, _kind(mv), log_ev, model_tr))
    edges = {}
    for v, t in enumerate(run.ev_trans):
        if v not in ids:
            continue
        for b in run.ev_pre[v]:
            u = run.cond_pre[b]
            if u < 0 or u not in ids:
                continue
            tag = spn.side[run.cond_place[b]]
            key = (ids[u], ids[v])
            edges[key] = edges.get(key, frozenset()) | {tag}
    return AlignmentOrder(nodes, edges, spn)


@dataclass
class UAlignment:
    log_nodes: dict  # event id -> label
    log_edges: set
    model_nodes: dict  # node id -> label (TAU for silent)
    model_edges: set
    phi: dict  # log node -> model node
    cost: Fraction
    order: Optional[AlignmentOrder] = field(default=None, repr=False)

    def fused(self):
        """Re-fuse both sides on ``phi``: ``(labels by node, edges)`` with sync pairs merged."""
        inv = {m: l for l, m in self.phi.items()}
        labels = {}
        for lid, lab in self.log_nodes.items():
            labels[("L", lid)] = (lab, label_str(self.model_nodes[self.phi[lid]]) if lid in self.phi else SKIP)
        for mid, lab in self.model_nodes.items():
            if mid not in inv:
                labels[("M", mid)] = (SKIP, label_str(lab))

        def key_m(mid):
            return ("L", inv[mid]) if mid in inv else ("M", mid)

        edges = {(("L", a), ("L", b)) for a, b in self.log_edges}
        edges |= {(key_m(a), key_m(b)) for a, b in self.model_edges}
        return labels, edges


def decompose(order: AlignmentOrder, cm: Optional[CostModel] = None) -> UAlignment:
    """Split an alignment order into its log-side and model-side partial orders."""
    cm = cm or CostModel()
    log_nodes, model_nodes, phi = {}, {}, {}
    log_id, model_id = {}, {}
    cost = Fraction(0)
    for n in order.nodes:
        if n.log != SKIP:
            log_id[n.id] = n.log_event
            log_nodes[n.log_event] = n.log
        if n.model != SKIP:
            model_id[n.id] = n.id
            model_nodes[n.id] = n.model
        if n.kind == SYNC:
            phi[n.log_event] = n.id
        cost += {SYNC: Fraction(0), LOG: cm.log_cost, MODEL: cm.model_cost, INVISIBLE: cm.tau_cost}[n.kind]
    log_edges, model_edges = set(), set()
    for (u, v), tags in order.edges.items():
        if LOG in tags:
            log_edges.add((log_id[u], log_id[v]))
        if MODEL in tags:
            model_edges.add((model_id[u], model_id[v]))
    return UAlignment(log_nodes, log_edges, model_nodes, model_edges, phi, cost, order)


@dataclass
class Diagnostics:
    missing_events: list
    undesired_events: list
    missing_deps: list
    undesired_deps: list

    @property
    def conforming(self) -> bool:
        return not (self.missing_events or self.undesired_events or self.missing_deps or self.undesired_deps)


def diagnose(ua: UAlignment, include_tau: bool = False) -> Diagnostics:
    """Compare dependencies of both sides on their transitive reductions.

    A log dependency is matched only when both endpoints are synchronous and
    their images under ``phi`` form a model-side reduction edge; symmetrically
    for model dependencies.
    """
    red1 = transitive_reduction(ua.log_nodes, ua.log_edges)
    red2 = transitive_reduction(ua.model_nodes, ua.model_edges)
    inv = {m: l for l, m in ua.phi.items()}
    missing_deps = sorted(
        (a, b) for a, b in red1 if not (a in ua.phi and b in ua.phi and (ua.phi[a], ua.phi[b]) in red2)
    )
    undesired_deps = sorted(
        (a, b) for a, b in red2 if not (a in inv and b in inv and (inv[a], inv[b]) in red1)
    )
    missing_events = sorted(e for e in ua.log_nodes if e not in ua.phi)
    undesired_events = sorted(
        m for m, lab in ua.model_nodes.items() if m not in inv and (include_tau or lab is not TAU)
    )
    return Diagnostics(missing_events, undesired_events, missing_deps, undesired_deps)


# -- report -------------------------------------------------------------------------

def _num(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


def alignment_report(case: str, ua: UAlignment, cases=None, stats=None) -> dict:
    """JSON-ready report; diagnostics always include silent model moves (flagged)."""
    order = ua.order
    diag = diagnose(ua, include_tau=True)
    lab_l = ua.log_nodes
    lab_m = ua.model_nodes

    def lnode(i):
        return {"id": i, "label": lab_l[i]}

    def mnode(i):
        return {"id": i, "label": label_str(lab_m[i]), "invisible": lab_m[i] is TAU}

    rep = {
        "case": case,
        "cases": list(cases) if cases is not None else [case],
        "cost": _num(ua.cost),
        "cost_exact": str(ua.cost),
        "moves": [
            {"id": n.id, "kind": n.kind, "log": n.log,
             "model": SKIP if n.model == SKIP else label_str(n.model),
             "log_event": n.log_event, "model_transition": n.model_trans}
            for n in (order.nodes if order is not None else [])
        ],
        "log_deps": sorted([u, v] for (u, v), tags in (order.edges.items() if order else []) if LOG in tags),
        "model_deps": sorted([u, v] for (u, v), tags in (order.edges.items() if order else []) if MODEL in tags),
        "phi": sorted([a, b] for a, b in ua.phi.items()),
        "log_side": {"nodes": [lnode(i) for i in sorted(lab_l)], "edges": sorted([a, b] for a, b in ua.log_edges)},
        "model_side": {"nodes": [mnode(i) for i in sorted(lab_m, key=_natkey)],
                       "edges": sorted([a, b] for a, b in ua.model_edges)},
        "diagnostics": {
            "missing_events": [lnode(i) for i in diag.missing_events],
            "undesired_events": [mnode(i) for i in sorted(diag.undesired_events, key=_natkey)],
            "missing_deps": [[lnode(a), lnode(b)] for a, b in diag.missing_deps],
            "undesired_deps": [[mnode(a), mnode(b)] for a, b in sorted(diag.undesired_deps, key=lambda p: (_natkey(p[0]), _natkey(p[1])))],
        },
    }
    if stats is not None:
        rep["stats"] = stats
    return rep


def _natkey(s: str):
    head = s.rstrip("0123456789")
    tail = s[len(head):]
    return (head, int(tail) if tail else -1, s)


def ualignment_from_report(rep: dict) -> UAlignment:
    log_nodes = {n["id"]: n["label"] for n in rep["log_side"]["nodes"]}
    model_nodes = {n["id"]: (TAU if n.get("invisible") else n["label"]) for n in rep["model_side"]["nodes"]}
    return UAlignment(
        log_nodes,
        {tuple(e) for e in rep["log_side"]["edges"]},
        model_nodes,
        {tuple(e) for e in rep["model_side"]["edges"]},
        {a: b for a, b in rep["phi"]},
        Fraction(rep["cost_exact"]),
    )


def align_ptrace(rho, model, cm: Optional[CostModel] = None, engine: str = "unfold-heuristic", budget=None):
    """Full pipeline for one p-trace; returns an :class:`~unfold_align.engines.Outcome`."""
    from .engines import run_engine

    return run_engine(rho, model, cm or CostModel(), engine, budget)


def diagnostic_rows(rep: dict, include_tau: bool = False) -> tuple:
    """Human-readable ``(event_rows, dependency_rows)`` from a report's diagnostics.

    Silent undesired events are listed only with ``include_tau``; dependency
    rows always appear, with silent endpoints shown as the tau symbol.
    """
    d = rep["diagnostics"]
    events = [f"missing event: {n['label']} ({n['id']}) occurs in the log; model lacks it"
              for n in d["missing_events"]]
    events += [f"undesired event: {n['label']} ({n['id']}) required by the model; log lacks it"
               for n in d["undesired_events"] if include_tau or not n.get("invisible")]
    deps = [f"log has: {a['label']} → {b['label']}; model lacks it" for a, b in d["missing_deps"]]
    deps += [f"model requires: {a['label']} → {b['label']}; log lacks it" for a, b in d["undesired_deps"]]
    return events, deps
