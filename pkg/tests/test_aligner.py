import json
from fractions import Fraction

import pytest

from unfold_align import graphs
from unfold_align.aligner import (INVISIBLE, align_ptrace, alignment_report, decompose, diagnose, diagnostic_rows,
                                  run_to_alignment_order, ualignment_from_report)
from unfold_align.fixtures import and_net, corpus, example_model, example_trace, seq_net
from unfold_align.petri import TAU
from unfold_align.product import LOG, MODEL, SKIP, SYNC
from unfold_align.ptrace import PTrace

from instances import random_instance


@pytest.fixture(scope="module")
def example():
    return align_ptrace(example_trace(), example_model())


def test_example_alignment_order(example):
    order = example.order
    assert sorted(n.kind for n in order.nodes) == sorted([SYNC, SYNC, LOG, LOG, INVISIBLE, MODEL])
    assert order.is_dag()
    labels = {(n.log, n.model) for n in order.nodes}
    assert labels == {("b", "b"), ("c", "c"), ("d", SKIP), ("e", SKIP), (SKIP, TAU), (SKIP, "f")}
    by = {(n.log, n.model): n.id for n in order.nodes}
    b, c, tau, f = by[("b", "b")], by[("c", "c")], by[(SKIP, TAU)], by[(SKIP, "f")]
    assert order.edges[(b, tau)] == {MODEL}
    assert order.edges[(tau, c)] == {MODEL} and order.edges[(tau, f)] == {MODEL}
    assert order.edges[(b, c)] == {LOG}
    assert example.cost == Fraction(30001, 10000)


def test_example_decomposition(example):
    ua = example.ualignment
    assert ua.log_nodes == {"e1": "b", "e2": "c", "e3": "d", "e4": "e"}
    assert ua.log_edges == {("e1", "e2"), ("e1", "e3"), ("e1", "e4")}
    assert sorted(ua.model_nodes.values(), key=str) == sorted(["b", "c", "f", TAU], key=str)
    assert len(ua.model_edges) == 3
    assert set(ua.phi) == {"e1", "e2"}
    assert ua.cost == example.cost


def test_example_diagnostics(example):
    d = diagnose(example.ualignment)
    assert d.missing_events == ["e3", "e4"]
    assert [example.ualignment.model_nodes[m] for m in d.undesired_events] == ["f"]
    assert len(d.missing_deps) == 3 and len(d.undesired_deps) == 3
    assert len(diagnose(example.ualignment, include_tau=True).undesired_events) == 2
    assert not d.conforming


def test_example_rows(example):
    rep = alignment_report("c", example.ualignment)
    events, deps = diagnostic_rows(rep)
    assert events == ["missing event: d (e3) occurs in the log; model lacks it",
                      "missing event: e (e4) occurs in the log; model lacks it",
                      "undesired event: f (n5) required by the model; log lacks it"]
    assert "log has: b → c; model lacks it" in deps
    assert "model requires: b → τ; log lacks it" in deps
    assert len(deps) == 6
    events, _ = diagnostic_rows(rep, include_tau=True)
    assert len(events) == 4 and any("τ" in r for r in events)


def test_log_chain_against_parallel_model_gives_missing_dependency():
    trace = PTrace.from_order("c", ["x", "y"], ["a", "b"], [(0, 1)])
    o = align_ptrace(trace, and_net("a b"))
    d = diagnose(o.ualignment)
    assert o.cost == Fraction(2, 10000)
    assert d.missing_deps == [("x", "y")]
    assert not d.missing_events and not d.undesired_events


def test_parallel_log_against_sequence_gives_undesired_dependency():
    trace = PTrace.from_order("c", ["x", "y"], ["a", "b"], [])
    o = align_ptrace(trace, seq_net("a b"))
    d = diagnose(o.ualignment)
    assert o.cost == 0
    assert d.undesired_deps and not d.missing_deps


def test_conforming_trace():
    trace = PTrace.from_order("c", ["x", "y"], ["a", "b"], [(0, 1)])
    o = align_ptrace(trace, seq_net("a b"))
    assert diagnose(o.ualignment).conforming
    rep = alignment_report("c", o.ualignment)
    assert diagnostic_rows(rep) == ([], [])


def _order_graph(order):
    idx = {n.id: i for i, n in enumerate(order.nodes)}
    return [(n.log, str(n.model)) for n in order.nodes], [(idx[a], idx[b]) for a, b in order.edges]


@pytest.mark.parametrize("seed", range(30))
def test_decomposition_round_trip(seed):
    model, trace = random_instance(seed)
    o = align_ptrace(trace, model, engine="unfold-cost")
    ua = o.ualignment
    # node count identity: |V1| + |V2| - |phi| = |alignment moves|
    assert len(ua.log_nodes) + len(ua.model_nodes) - len(ua.phi) == len(o.order.nodes)
    # log side is the p-trace itself
    assert graphs.isomorphic(
        [ua.log_nodes[e] for e in trace.event_ids], [(trace.event_ids.index(a), trace.event_ids.index(b)) for a, b in
                                                     ua.log_edges],
        list(trace.labels), sorted(trace.edges))
    labels, edges = ua.fused()
    keys = sorted(labels)
    idx = {k: i for i, k in enumerate(keys)}
    fused_labels = [(labels[k][0], labels[k][1]) for k in keys]
    ol, oe = _order_graph(o.order)
    ol = [(a, "τ" if b == "None" else b) for a, b in ol]
    assert graphs.isomorphic(fused_labels, [(idx[a], idx[b]) for a, b in edges], ol, oe)
    assert ua.cost == o.cost


def test_report_is_json_and_round_trips(example):
    rep = alignment_report("c", example.ualignment)
    text = json.dumps(rep, sort_keys=True)
    back = ualignment_from_report(json.loads(text))
    assert back.log_nodes == example.ualignment.log_nodes
    assert back.model_nodes == example.ualignment.model_nodes
    assert back.phi == example.ualignment.phi
    assert back.cost == example.cost
    assert rep["cost"] == 3.0001 and rep["cost_exact"] == "30001/10000"
    assert "stats" not in rep


@pytest.mark.parametrize("fx", corpus(), ids=lambda f: f.name)
def test_corpus_orders_are_dags_with_exact_log_side(fx):
    o = align_ptrace(fx.trace, fx.model)
    assert o.order.is_dag()
    ua = o.ualignment
    assert set(ua.log_nodes) == set(fx.trace.event_ids)
    ids = fx.trace.event_ids
    assert {(ids.index(a), ids.index(b)) for a, b in ua.log_edges} == set(fx.trace.edges)


def test_decompose_accepts_fresh_cost_model(example):
    from unfold_align.product import CostModel
    ua = decompose(example.order, CostModel(log_cost=Fraction(2)))
    assert ua.cost == Fraction(50001, 10000)
    assert run_to_alignment_order(example.run).edges == example.order.edges
