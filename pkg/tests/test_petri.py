import json
import random

import pytest

from unfold_align.errors import InputError, InvalidNet, NotEnabled, UnknownNode, UnsafeMarking
from unfold_align.fixtures import shared_place_net, mgmt_net
from unfold_align.petri import (TAU, SystemNet, enabled, fire, label_str, load_net, postset, preset,
                                reachable_markings, read_pnml, validate)

from instances import random_safe_net


def chain():
    return SystemNet.build(["p", "q"], [("t", "a")], [("p", "t"), ("t", "q")], ["p"], ["q"])


def names(net, ts):
    return {net.trans_names[t] for t in ts}


def test_preset_chain():
    net = chain()
    assert preset(net, "t") == {"p"}
    assert preset(net, "q") == {"t"}
    assert postset(net, "t") == {"q"}


def test_preset_isolated_place():
    net = SystemNet.build(["p"], [], [], [], [])
    assert preset(net, "p") == frozenset()


def test_preset_unknown_node():
    with pytest.raises(UnknownNode):
        preset(chain(), "nope")


def test_mgmt_first_transition_reads_p0():
    net = mgmt_net()
    first = [t for t in net.trans_names if "p0" in preset(net, t)]
    assert first == ["t1"]
    assert validate(net) == []
    assert (net.n_places, net.n_transitions) == (11, 12)


def test_enabled_chain():
    net = chain()
    assert names(net, enabled(net, net.marking(["p"]))) == {"t"}
    assert enabled(net, net.marking(["q"])) == frozenset()


def test_shared_both_enabled_and_final_marking():
    net = shared_place_net()
    m0 = net.m_init
    assert names(net, enabled(net, m0)) == {"x", "y"}
    m = fire(net, m0, net.trans_index["x"])
    assert net.place_set(m) == {"d", "b", "c"}
    m = fire(net, m, net.trans_index["y"])
    assert m == net.m_final == net.marking(["d", "c", "e"])


def test_fire_chain_and_not_enabled():
    net = chain()
    assert fire(net, net.m_init, 0) == net.marking(["q"])
    with pytest.raises(NotEnabled):
        fire(net, net.marking(["q"]), 0)


def test_fire_unsafe():
    net = SystemNet.build(["p", "q"], [("t", "a")], [("p", "t"), ("t", "q")], ["p", "q"], ["q"])
    with pytest.raises(UnsafeMarking):
        fire(net, net.m_init, 0)


def test_validate_rules():
    assert [v.rule for v in validate({"places": ["p"], "transitions": [{"id": "t", "label": "a"}],
                                      "arcs": [["t", "p"]], "m_init": ["p"], "m_final": ["p"]})] == ["TransitionNoInput"]
    v = validate({"places": ["p", "q"], "transitions": [{"id": "t", "label": "a"}],
                  "arcs": [["p", "t"], ["t", "q"]], "m_init": ["zz"], "m_final": ["q"]})
    assert [x.rule for x in v] == ["UnknownPlace"]
    assert v[0].node == "zz"
    assert any(x.rule == "EmptyPlaces" for x in validate({"places": [], "transitions": [], "arcs": []}))
    assert any(x.rule == "DuplicateId" for x in validate({"places": ["p", "p"], "transitions": [], "arcs": []}))


def test_build_rejects_unrepresentable_nets_only():
    with pytest.raises(InvalidNet) as exc:
        SystemNet.build(["p"], [("t", "a")], [("p", "t"), ("t", "zz")], ["p"], ["p"])
    assert exc.value.violations[0].node == "zz"
    # a transition without input is representable; validate() reports it
    net = SystemNet.build(["p"], [("t", "a")], [("t", "p")], ["p"], ["p"])
    assert [v.rule for v in validate(net)] == ["TransitionNoInput"]


def test_tau_label_distinct_from_strings():
    net = SystemNet.build(["p", "q"], [("t", None)], [("p", "t"), ("t", "q")], ["p"], ["q"])
    assert net.labels[0] is TAU
    assert label_str(TAU) == "τ"
    assert label_str("tau") == "tau"


def test_json_round_trip(tmp_path):
    net = mgmt_net()
    path = tmp_path / "n.json"
    path.write_text(json.dumps(net.to_dict()))
    back = load_net(path)
    assert back.to_dict() == net.to_dict()


def test_load_net_malformed_json_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"places": [\n  "p",\n}')
    with pytest.raises(InputError, match=r"bad.json:3:1"):
        load_net(path)


PNML = """<?xml version="1.0"?>
<pnml><net id="n"><page id="pg">
  <place id="p"><initialMarking><text>1</text></initialMarking></place>
  <place id="q"/>
  <transition id="t"><name><text>a</text></name></transition>
  <transition id="s"><name><text>tau</text></name><toolspecific tool="ProM" activity="$invisible$"/></transition>
  <arc id="a1" source="p" target="t"/><arc id="a2" source="t" target="q"/>
  <arc id="a3" source="q" target="s"/><arc id="a4" source="s" target="p"/>
</page></net></pnml>"""


def test_pnml_reader_with_sidecar(tmp_path):
    (tmp_path / "m.pnml").write_text(PNML)
    (tmp_path / "m.final.json").write_text('["q"]')
    net = load_net(tmp_path / "m.pnml")
    assert net.place_set(net.m_init) == {"p"}
    assert net.place_set(net.m_final) == {"q"}
    assert net.labels[net.trans_index["s"]] is TAU
    assert read_pnml(PNML, ["p"]).place_set(read_pnml(PNML, ["p"]).m_final) == {"p"}


def _brute_enabled(net, m):
    return {t for t in range(net.n_transitions) if all(p in m for p in net.pre[t])}


@pytest.mark.parametrize("seed", range(25))
def test_enabled_and_fire_match_brute_force(seed):
    net = random_safe_net(seed)
    for m in reachable_markings(net):
        assert enabled(net, m) == _brute_enabled(net, m)
        for t in enabled(net, m):
            expected = frozenset(p for p in m if p not in net.pre[t]) | net.post[t]
            assert fire(net, m, t) == expected == fire(net, m, t)
            assert len(fire(net, m, t)) <= net.n_places


def test_reachable_markings_random_walk_agrees():
    net = mgmt_net()
    reach = reachable_markings(net)
    rng = random.Random(4)
    for _ in range(200):
        m = net.m_init
        for _ in range(20):
            assert m in reach
            en = sorted(enabled(net, m))
            if not en:
                break
            m = fire(net, m, rng.choice(en))
