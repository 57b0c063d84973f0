"""Hand-built models and p-traces used by the test corpus and shipped as JSON under ``fixtures/``."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .petri import TAU, SystemNet
from .ptrace import PTrace


@dataclass(frozen=True)
class Fixture:
    name: str
    model: SystemNet
    trace: PTrace


def _chain_net(spec: str, trans: list, arcs: str, m_init: str, m_final: str) -> SystemNet:
    """Compact builder: ``arcs`` is a space-separated list of ``src>dst`` pairs."""
    places = spec.split()
    pairs = [tuple(a.split(">")) for a in arcs.split()]
    return SystemNet.build(places, trans, pairs, m_init.split(), m_final.split())


def _trace(case: str, labels: str, order: str = "") -> PTrace:
    """Events ``e1..en`` labeled by ``labels``; ``order`` lists ``i<j`` over 1-based positions."""
    labs = labels.split()
    ids = [f"e{i + 1}" for i in range(len(labs))]
    edges = []
    for tok in order.split():
        a, b = tok.split("<")
        edges.append((int(a) - 1, int(b) - 1))
    return PTrace.from_order(case, ids, labs, edges)


def _chain(case: str, labels: str) -> PTrace:
    n = len(labels.split())
    return _trace(case, labels, " ".join(f"{i}<{i + 1}" for i in range(1, n)))


# -- named nets ------------------------------------------------------------------------

def example_model() -> SystemNet:
    """``b``, then a silent split into (``c`` xor ``g``) in parallel with ``f``."""
    return _chain_net(
        "p0 p1 p2 p3 p4 p5",
        [("tb", "b"), ("tt", TAU), ("tc", "c"), ("tg", "g"), ("tf", "f")],
        "p0>tb tb>p1 p1>tt tt>p2 tt>p3 p2>tc tc>p4 p2>tg tg>p4 p3>tf tf>p5",
        "p0", "p4 p5",
    )


def example_trace() -> PTrace:
    """``b`` followed by three mutually concurrent events ``c``, ``d``, ``e``."""
    return _trace("example", "b c d e", "1<2 1<3 1<4")


def shared_place_net() -> SystemNet:
    """``x`` and ``y`` compete for the shared place ``c`` and both put it back."""
    return _chain_net(
        "a b c d e",
        [("x", "x"), ("y", "y")],
        "a>x c>x x>d x>c b>y c>y y>e y>c",
        "a b c", "d c e",
    )


def mgmt_net() -> SystemNet:
    """Small software-project process: 11 places, 12 transitions, one loop, one parallel block."""
    return _chain_net(
        "p0 p1 p2 p3 p4 p5 p6 p7 p8 p9 p10",
        [("t1", "sa"), ("t2", TAU), ("t3", "design"), ("t4", "prototype"), ("t5", "write spec"),
         ("t6", TAU), ("t7", "implement"), ("t8", "test"), ("t9", "fix bugs"), ("t10", "review"),
         ("t11", "release"), ("t12", "cancel")],
        "p0>t1 t1>p1 p1>t2 t2>p2 t2>p3 p2>t3 t3>p4 p2>t4 t4>p4 p3>t5 t5>p5 p4>t6 p5>t6 t6>p6 "
        "p6>t7 t7>p7 p7>t8 t8>p8 p8>t9 t9>p7 p8>t10 t10>p9 p9>t11 t11>p10 p9>t12 t12>p10",
        "p0", "p10",
    )


def seq_net(labels: str) -> SystemNet:
    labs = labels.split()
    places = " ".join(f"p{i}" for i in range(len(labs) + 1))
    trans = [(f"t{i}", lab) for i, lab in enumerate(labs)]
    arcs = " ".join(f"p{i}>t{i} t{i}>p{i + 1}" for i in range(len(labs)))
    return _chain_net(places, trans, arcs, "p0", f"p{len(labs)}")


def and_net(labels: str) -> SystemNet:
    """Silent split, one branch per label, silent join."""
    labs = labels.split()
    places = ["i", "o"] + [f"s{k}" for k in range(len(labs))] + [f"f{k}" for k in range(len(labs))]
    trans = [("split", TAU), ("join", TAU)] + [(f"t{k}", lab) for k, lab in enumerate(labs)]
    arcs = ["i>split", "join>o"]
    for k in range(len(labs)):
        arcs += [f"split>s{k}", f"s{k}>t{k}", f"t{k}>f{k}", f"f{k}>join"]
    return _chain_net(" ".join(places), trans, " ".join(arcs), "i", "o")


def xor_net(labels: str) -> SystemNet:
    labs = labels.split()
    trans = [(f"t{k}", lab) for k, lab in enumerate(labs)]
    arcs = " ".join(f"i>t{k} t{k}>o" for k in range(len(labs)))
    return _chain_net("i o", trans, arcs, "i", "o")


def loop_net() -> SystemNet:
    """``a``, then any number of ``b c`` rounds, then ``d``."""
    return _chain_net(
        "p0 p1 p2 p3",
        [("ta", "a"), ("tb", "b"), ("tc", "c"), ("td", "d")],
        "p0>ta ta>p1 p1>tb tb>p2 p2>tc tc>p1 p1>td td>p3",
        "p0", "p3",
    )


def and_xor_net() -> SystemNet:
    """(``a`` xor ``b``) in parallel with ``c``."""
    return _chain_net(
        "i s1 s2 f1 f2 o",
        [("split", TAU), ("ta", "a"), ("tb", "b"), ("tc", "c"), ("join", TAU)],
        "i>split split>s1 split>s2 s1>ta ta>f1 s1>tb tb>f1 s2>tc tc>f2 f1>join f2>join join>o",
        "i", "o",
    )


def skip_net() -> SystemNet:
    """``a``, then optionally ``b`` (silent bypass), then ``c``."""
    return _chain_net(
        "p0 p1 p2 p3",
        [("ta", "a"), ("tb", "b"), ("skip", TAU), ("tc", "c")],
        "p0>ta ta>p1 p1>tb tb>p2 p1>skip skip>p2 p2>tc tc>p3",
        "p0", "p3",
    )


def dup_net() -> SystemNet:
    """Sequence ``a b a``: two transitions share label ``a``."""
    return _chain_net(
        "p0 p1 p2 p3",
        [("ta1", "a"), ("tb", "b"), ("ta2", "a")],
        "p0>ta1 ta1>p1 p1>tb tb>p2 p2>ta2 ta2>p3",
        "p0", "p3",
    )


def tau_only_net() -> SystemNet:
    return _chain_net("p0 p1", [("t", TAU)], "p0>t t>p1", "p0", "p1")


def corpus() -> list:
    """The hand-built instance corpus; names are stable and unique."""
    mg = mgmt_net()
    items = [
        ("example", example_model(), example_trace()),
        ("example_fitting", example_model(), _trace("example_fitting", "b c f", "1<2 1<3")),
        ("shared_concurrent", shared_place_net(), _trace("shared_concurrent", "x y")),
        ("shared_sequential", shared_place_net(), _chain("shared_sequential", "y x")),
        ("mgmt_fitting", mg, _trace("mgmt_fitting", "sa design write_spec implement test review release", "1<2 1<3 2<4 3<4 4<5 5<6 6<7")),
        ("mgmt_loop", mg, _chain("mgmt_loop", "sa prototype write_spec implement test fix_bugs test fix_bugs test review cancel")),
        ("mgmt_noisy", mg, _trace("mgmt_noisy", "sa design implement test deploy review release",
                                  "1<2 2<3 3<4 3<5 4<6 5<6 6<7")),
        ("seq_fitting", seq_net("a b c"), _chain("seq_fitting", "a b c")),
        ("seq_reversed", seq_net("a b c"), _chain("seq_reversed", "c b a")),
        ("disjoint_alphabet", seq_net("a b"), _chain("disjoint_alphabet", "x y")),
        ("dup_fitting", dup_net(), _chain("dup_fitting", "a b a")),
        ("dup_concurrent", dup_net(), _trace("dup_concurrent", "a a b")),
        ("parallel_as_chain", and_net("a b c"), _chain("parallel_as_chain", "a b c")),
        ("parallel_concurrent", and_net("a b c"), _trace("parallel_concurrent", "a b c")),
        ("parallel_wide", and_net("a b c d"), _trace("parallel_wide", "d c b a e")),
        ("xor_both", xor_net("a b"), _trace("xor_both", "a b")),
        ("tau_only", tau_only_net(), _trace("tau_only", "a")),
        ("single_vs_seq", seq_net("a b c"), _trace("single_vs_seq", "b")),
        ("loop_twice", loop_net(), _chain("loop_twice", "a b c b c d")),
        ("loop_skipped", loop_net(), _chain("loop_skipped", "a d")),
        ("loop_broken", loop_net(), _trace("loop_broken", "a b b c d", "1<2 1<3 2<4 3<4 4<5")),
        ("and_xor_concurrent", and_xor_net(), _trace("and_xor_concurrent", "a b c")),
        ("long_chain_vs_parallel", and_net("a b c d"), _chain("long_chain_vs_parallel", "a b x c d y b a")),
        ("skip_taken", skip_net(), _chain("skip_taken", "a c")),
        ("skip_swapped", skip_net(), _chain("skip_swapped", "a c b")),
    ]
    # labels with spaces in mgmt_net; underscores in trace specs stand for spaces
    out = []
    for name, model, tr in items:
        if "_" in "".join(tr.labels):
            tr = PTrace(tr.case_id, tr.event_ids, tuple(l.replace("_", " ") for l in tr.labels), tr.edges)
        out.append(Fixture(name, model, tr))
    return out


def fixture(name: str) -> Fixture:
    for f in corpus():
        if f.name == name:
            return f
    raise KeyError(name)


def write_fixture_files(directory) -> list:
    """Write ``<name>.model.json`` and ``<name>.log.json`` for every corpus entry."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for f in corpus():
        mp, lp = d / f"{f.name}.model.json", d / f"{f.name}.log.json"
        mp.write_text(json.dumps(f.model.to_dict(), indent=2, ensure_ascii=False) + "\n")
        lp.write_text(json.dumps({"traces": [f.trace.to_dict()]}, indent=2, ensure_ascii=False) + "\n")
        written += [mp, lp]
    return written
