"""Synchronous product of a trace net and a model net, its target extension, and move costs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .errors import AlreadyExtended
from .petri import TAU, SystemNet, label_str
from .ptrace import TraceNet

SKIP = ">>"

LOG, MODEL, SYNC, TARGET = "log", "model", "sync", "target"

COLORS = {LOG: "#ef6c00", MODEL: "#1565c0", SYNC: "#2e7d32", TARGET: "#c62828", "tau": "#9e9e9e"}


@dataclass(frozen=True)
class Move:
    """Alignment move carried by a product transition.

    ``log`` / ``model`` index the transition of the trace net / model net the
    move originates from, ``None`` standing for a skip.
    """

    kind: str
    label: Optional[str]
    log: Optional[int] = None
    model: Optional[int] = None

    @property
    def is_tau(self) -> bool:
        return self.kind == MODEL and self.label is TAU

    @property
    def color_key(self) -> str:
        return "tau" if self.is_tau else self.kind


@dataclass(frozen=True)
class CostModel:
    log_cost: Fraction = Fraction(1)
    model_cost: Fraction = Fraction(1)
    tau_cost: Fraction = Fraction(1, 10000)
    sync_cost: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("log_cost", "model_cost", "tau_cost", "sync_cost"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.sync_cost != 0:
            raise ValueError("synchronous moves cost 0")
        if self.log_cost <= 0 or self.model_cost <= 0 or self.tau_cost <= 0:
            raise ValueError("log, model and tau costs must be positive")
        if self.tau_cost >= min(self.log_cost, self.model_cost):
            raise ValueError("tau_cost must be below log_cost and model_cost")

    def scale(self) -> int:
        """Smallest factor turning every cost into an integer."""
        dens = [c.denominator for c in (self.log_cost, self.model_cost, self.tau_cost)]
        return math.lcm(*dens)


def move_cost(cm: CostModel, move: Move) -> Fraction:
    if move.kind in (SYNC, TARGET):
        return Fraction(0)
    if move.kind == LOG:
        return cm.log_cost
    return cm.tau_cost if move.label is TAU else cm.model_cost


@dataclass(frozen=True, eq=False)
class MoveNet:
    net: SystemNet
    moves: tuple
    side: tuple  # per place: LOG / MODEL / TARGET
    trace: TraceNet
    model: SystemNet
    target: Optional[int] = None
    target_place: Optional[int] = None
    _cost_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def extended(self) -> bool:
        return self.target is not None

    def costs(self, cm: CostModel) -> tuple:
        """Per-transition exact costs."""
        key = ("frac", cm)
        if key not in self._cost_cache:
            self._cost_cache[key] = tuple(move_cost(cm, mv) for mv in self.moves)
        return self._cost_cache[key]

    def int_costs(self, cm: CostModel) -> tuple:
        """Per-transition costs multiplied by ``cm.scale()``; exact integers."""
        key = ("int", cm)
        if key not in self._cost_cache:
            s = cm.scale()
            vals = []
            for c in self.costs(cm):
                v = c * s
                assert v.denominator == 1
                vals.append(int(v))
            self._cost_cache[key] = tuple(vals)
        return self._cost_cache[key]

    def describe(self, t: int) -> tuple:
        """``(log-part, model-part)`` labels of transition ``t`` (skip shown as ``>>``)."""
        mv = self.moves[t]
        lg = self.trace.net.labels[mv.log] if mv.log is not None else SKIP
        md = label_str(self.model.labels[mv.model]) if mv.model is not None else SKIP
        return lg, md


def synchronous_product(trace: TraceNet, model: SystemNet) -> MoveNet:
    tn = trace.net
    clash = set(tn.place_names) & set(model.place_names)
    lp = (lambda p: f"log:{p}") if clash else (lambda p: p)
    mp = (lambda p: f"model:{p}") if clash else (lambda p: p)
    places = [lp(p) for p in tn.place_names] + [mp(p) for p in model.place_names]
    side = [LOG] * tn.n_places + [MODEL] * model.n_places
    off = tn.n_places
    names, labels, pre, post, moves = [], [], [], [], []

    def add(name, lab, pr, po, mv):
        names.append(name)
        labels.append(lab)
        pre.append(frozenset(pr))
        post.append(frozenset(po))
        moves.append(mv)

    for t1 in range(tn.n_transitions):
        add(f"({tn.trans_names[t1]},{SKIP})", tn.labels[t1], tn.pre[t1], tn.post[t1],
            Move(LOG, tn.labels[t1], log=t1))
    for t2 in range(model.n_transitions):
        add(f"({SKIP},{model.trans_names[t2]})", model.labels[t2],
            {p + off for p in model.pre[t2]}, {p + off for p in model.post[t2]},
            Move(MODEL, model.labels[t2], model=t2))
    for t1 in range(tn.n_transitions):
        for t2 in range(model.n_transitions):
            lab = tn.labels[t1]
            if lab is not TAU and lab == model.labels[t2]:
                add(f"({tn.trans_names[t1]},{model.trans_names[t2]})", lab,
                    tn.pre[t1] | {p + off for p in model.pre[t2]},
                    tn.post[t1] | {p + off for p in model.post[t2]},
                    Move(SYNC, lab, log=t1, model=t2))
    net = SystemNet(
        place_names=tuple(places),
        trans_names=tuple(names),
        labels=tuple(labels),
        pre=tuple(pre),
        post=tuple(post),
        m_init=tn.m_init | {p + off for p in model.m_init},
        m_final=tn.m_final | {p + off for p in model.m_final},
    )
    return MoveNet(net, tuple(moves), tuple(side), trace, model)


def extend_with_target(spn: MoveNet) -> MoveNet:
    """Add ``t*`` consuming the final marking and its sole output place ``p*``."""
    if spn.extended:
        raise AlreadyExtended("product net already carries a target transition")
    n = spn.net
    pname, tname = "p*", "t*"
    while pname in n.place_index or pname in n.trans_index:
        pname += "'"
    while tname in n.trans_index or tname in n.place_index:
        tname += "'"
    pstar = n.n_places
    net = SystemNet(
        place_names=n.place_names + (pname,),
        trans_names=n.trans_names + (tname,),
        labels=n.labels + (TAU,),
        pre=n.pre + (n.m_final,),
        post=n.post + (frozenset([pstar]),),
        m_init=n.m_init,
        m_final=frozenset([pstar]),
    )
    return replace(spn, net=net, moves=spn.moves + (Move(TARGET, TAU),), side=spn.side + (TARGET,),
                   target=n.n_transitions, target_place=pstar, _cost_cache={})


def build_extended_product(trace: TraceNet, model: SystemNet) -> MoveNet:
    return extend_with_target(synchronous_product(trace, model))


def to_dot(spn: MoveNet) -> str:
    """Graphviz rendering: orange log side, blue model side, green sync, red target."""
    n = spn.net
    lines = ["digraph spn {", "  rankdir=LR;"]
    for p, name in enumerate(n.place_names):
        col = {LOG: COLORS[LOG], MODEL: COLORS[MODEL], TARGET: COLORS[TARGET]}[spn.side[p]]
        tokens = "●" if p in n.m_init else ""
        peri = 2 if p in n.m_final else 1
        lines.append(f'  p{p} [shape=circle,color="{col}",label="{tokens}",xlabel="{_esc(name)}",peripheries={peri}];')
    for t, name in enumerate(n.trans_names):
        mv = spn.moves[t]
        col = COLORS[mv.color_key]
        style = ',style="dotted"' if mv.kind == TARGET else ""
        lab = name if mv.kind == TARGET else f"{name}\\n{label_str(mv.label)}"
        lines.append(f'  t{t} [shape=box,color="{col}",label="{_esc(lab)}"{style}];')
    for t in range(n.n_transitions):
        col = COLORS[spn.moves[t].color_key]
        for p in sorted(n.pre[t]):
            lines.append(f'  p{p} -> t{t} [color="{col}"];')
        for p in sorted(n.post[t]):
            lines.append(f'  t{t} -> p{p} [color="{col}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _esc(s: str) -> str:
    return str(s).replace('"', '\\"')
