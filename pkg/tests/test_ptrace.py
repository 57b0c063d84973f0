import itertools
import json
import logging

import pytest
from hypothesis import given, settings, strategies as st

from unfold_align import graphs
from unfold_align.errors import CyclicOrder, EmptyInput, InputError, MixedCaseIds, NegativeDuration
from unfold_align.fixtures import example_trace
from unfold_align.petri import enabled, fire
from unfold_align.ptrace import (PTrace, RawEvent, derive_ptrace, group_variants, load_log, load_ptraces_json,
                                 parse_timestamp, ptrace_to_trace_net, read_csv_events, write_csv)


def ev(act, s, e, case="c1"):
    return RawEvent(case, act, s, e, act)


def closure_labels(t):
    return {(t.labels[a], t.labels[b]) for a, b in t.closure()}


def test_disjoint_intervals_ordered():
    t = derive_ptrace([ev("a", 0, 1), ev("b", 2, 3)])
    assert closure_labels(t) == {("a", "b")}


def test_overlap_is_concurrent():
    t = derive_ptrace([ev("a", 0, 5), ev("b", 3, 8)])
    assert t.edges == frozenset()


def test_three_event_example():
    t = derive_ptrace([ev("a", 0, 1), ev("b", 2, 3), ev("c", 2, 3)])
    assert closure_labels(t) == {("a", "b"), ("a", "c")}


def test_touching_intervals_are_concurrent():
    # end(a) == start(b) is not strictly less
    assert derive_ptrace([ev("a", 0, 2), ev("b", 2, 3)]).edges == frozenset()


def test_errors():
    with pytest.raises(EmptyInput):
        derive_ptrace([])
    with pytest.raises(MixedCaseIds):
        derive_ptrace([ev("a", 0, 1), ev("b", 2, 3, case="c2")])
    with pytest.raises(NegativeDuration):
        derive_ptrace([ev("a", 5, 1)])
    with pytest.raises(CyclicOrder):
        PTrace.from_order("c", ["x"], ["a"], [(0, 0)])
    with pytest.raises(CyclicOrder):
        PTrace.from_order("c", ["x", "y"], ["a", "b"], [(0, 1), (1, 0)])


def test_missing_end_defaults_to_start(caplog):
    with caplog.at_level(logging.WARNING):
        t = derive_ptrace([RawEvent("c1", "a", 5, None, "x"), ev("b", 6, 7)])
    assert t.intervals[0] == (5, 5)
    assert closure_labels(t) == {("a", "b")}
    assert "end" in caplog.text


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 10)), min_size=1, max_size=8))
def test_order_matches_pairwise_rule(spans):
    evs = [RawEvent("c", f"a{i % 3}", s, s + d, f"e{i}") for i, (s, d) in enumerate(spans)]
    t = derive_ptrace(evs)
    brute = {(i, j) for i, a in enumerate(evs) for j, b in enumerate(evs) if a.end < b.start}
    assert set(t.closure()) == brute
    assert t.edges == graphs.transitive_reduction(len(evs), brute)


def test_single_event_trace_net():
    tn = ptrace_to_trace_net(PTrace.from_order("c", ["x"], ["a"], []))
    net = tn.net
    assert len(net.place_names) == 2 and net.n_transitions == 1
    assert net.place_set(net.m_init) == {"p_(▶,x)"}
    assert net.place_set(net.m_final) == {"p_(x,■)"}


def test_concurrent_pair_trace_net():
    tn = ptrace_to_trace_net(PTrace.from_order("c", ["x", "y"], ["a", "b"], []))
    assert len(tn.net.m_init) == 2 and len(tn.net.m_final) == 2
    # 1-safe along every interleaving
    for order in itertools.permutations(range(2)):
        m = tn.net.m_init
        for t in order:
            m = fire(tn.net, m, t)
        assert m == tn.net.m_final


def test_example_trace_net_shape():
    tn = ptrace_to_trace_net(example_trace())
    net = tn.net
    assert net.n_transitions == 4
    # one initial place, three dependency places, three final places
    assert len(net.m_init) == 1 and len(net.m_final) == 3
    assert len(net.place_names) == 7
    for p in range(net.n_places):
        assert len(net.producers[p]) <= 1 and len(net.consumers[p]) <= 1
    assert [net.labels[t] for t in range(4)] == ["b", "c", "d", "e"]


def _firing_label_sequences(net):
    out = set()

    def rec(m, seq):
        en = sorted(enabled(net, m))
        if not en:
            if m == net.m_final:
                out.add(tuple(seq))
            return
        for t in en:
            rec(fire(net, m, t), seq + [t])

    rec(net.m_init, [])
    return out


dags = st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                                            .filter(lambda e: e[0] < e[1]))))


@settings(max_examples=60, deadline=None)
@given(dags)
def test_trace_net_runs_are_linearizations(data):
    n, edges = data
    t = PTrace.from_order("c", [f"e{i}" for i in range(n)], ["a"] * n, edges)
    tn = ptrace_to_trace_net(t)
    runs = _firing_label_sequences(tn.net)
    assert runs == {tuple(tn.origin.index(v) for v in lin) for lin in t.linearizations()}


def test_parse_timestamp():
    assert parse_timestamp(1500) == 1500
    assert parse_timestamp("1500") == 1500
    assert parse_timestamp("1970-01-01T00:00:01Z") == 1000
    assert parse_timestamp("1970-01-01T00:00:01.250+00:00") == 1250
    with pytest.raises(InputError):
        parse_timestamp("yesterday")


def test_csv_round_trip(tmp_path):
    text = "case,activity,start,end\nc2,a,0,1\nc1,b,1970-01-01T00:00:00Z,1970-01-01T00:00:00.005Z\nc1,c,10,12\n"
    traces = load_log(_write(tmp_path / "l.csv", text))
    assert [t.case_id for t in traces] == ["c1", "c2"]
    assert closure_labels(traces[0]) == {("b", "c")}
    again = load_log(_write(tmp_path / "again.csv", write_csv(traces)))
    assert [t.to_dict() for t in again] == [t.to_dict() for t in traces]
    with pytest.raises(InputError):
        read_csv_events("case,activity\nc,a\n")


def _write(path, text):
    path.write_text(text)
    return path


def test_json_forms():
    one = {"case": "c", "events": [{"id": "x", "activity": "a", "start": 0, "end": 1},
                                   {"id": "y", "activity": "b", "start": 2, "end": 3}]}
    assert len(load_ptraces_json(json.dumps(one))) == 1
    assert len(load_ptraces_json(json.dumps([one, one]))) == 2
    explicit = {"case": "c", "events": [{"id": "x", "activity": "a"}, {"id": "y", "activity": "b"}],
                "order": [["x", "y"]]}
    (t,) = load_ptraces_json(json.dumps({"traces": [explicit]}))
    assert t.edges == {(0, 1)}
    assert t.to_dict() == explicit


def test_malformed_json_reports_position():
    with pytest.raises(InputError, match=r"log.json:2:\d+"):
        load_ptraces_json('{"case": "c",\n "events": [}', "log.json")


def test_variant_grouping_by_isomorphism():
    a = PTrace.from_order("c3", ["x", "y", "z"], ["a", "b", "c"], [(0, 1), (0, 2)])
    b = PTrace.from_order("c1", ["q", "r", "s"], ["c", "a", "b"], [(1, 0), (1, 2)])
    c = PTrace.from_order("c2", ["q", "r", "s"], ["a", "b", "c"], [(0, 1), (1, 2)])
    groups = group_variants([a, b, c])
    assert [(rep.case_id, [t.case_id for t in ts]) for rep, ts in groups] == [("c1", ["c1", "c3"]), ("c2", ["c2"])]
