"""Labeled 1-safe system nets: structure, firing rule, validation and I/O.

Places and transitions are addressed by dense integer indices internally; the
string ids given at load time are kept for display and serialization. A
marking is a ``frozenset`` of place indices (1-safe nets never hold two tokens
on one place).
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import InputError, InvalidNet, NotEnabled, UnknownNode, UnsafeMarking

#: Label of silent transitions. ``None`` can never collide with an activity string.
TAU = None

Marking = frozenset


def label_str(label: Optional[str]) -> str:
    return "τ" if label is TAU else label


@dataclass(frozen=True)
class Violation:
    rule: str
    node: str
    detail: str = ""

    def __str__(self):
        s = f"{self.rule}({self.node})"
        return f"{s}: {self.detail}" if self.detail else s


@dataclass(frozen=True, eq=False)
class SystemNet:
    place_names: tuple
    trans_names: tuple
    labels: tuple
    pre: tuple
    post: tuple
    m_init: frozenset
    m_final: frozenset
    place_index: dict = field(init=False, repr=False)
    trans_index: dict = field(init=False, repr=False)
    consumers: tuple = field(init=False, repr=False)
    producers: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "place_index", {p: i for i, p in enumerate(self.place_names)})
        object.__setattr__(self, "trans_index", {t: i for i, t in enumerate(self.trans_names)})
        cons = [[] for _ in self.place_names]
        prod = [[] for _ in self.place_names]
        for t, (pre, post) in enumerate(zip(self.pre, self.post)):
            for p in sorted(pre):
                cons[p].append(t)
            for p in sorted(post):
                prod[p].append(t)
        object.__setattr__(self, "consumers", tuple(tuple(c) for c in cons))
        object.__setattr__(self, "producers", tuple(tuple(c) for c in prod))

    @classmethod
    def build(
        cls,
        places: Sequence[str],
        transitions: Sequence[tuple],
        arcs: Iterable[tuple],
        m_init: Iterable[str],
        m_final: Iterable[str],
    ) -> "SystemNet":
        """Build a net from string ids; ``transitions`` holds ``(id, label)`` pairs.

        Raises :class:`InvalidNet` for references that cannot be represented
        (unknown ids, place-place arcs, duplicated tokens). Softer defects such
        as a transition without input are left for :func:`validate`.
        """
        raw = {
            "places": list(places),
            "transitions": [{"id": t, "label": lab} for t, lab in transitions],
            "arcs": [list(a) for a in arcs],
            "m_init": list(m_init),
            "m_final": list(m_final),
        }
        hard = [v for v in _validate_raw(raw) if v.rule in _HARD_RULES]
        if hard:
            raise InvalidNet(hard)
        pidx = {p: i for i, p in enumerate(raw["places"])}
        tidx = {t["id"]: i for i, t in enumerate(raw["transitions"])}
        pre = [set() for _ in tidx]
        post = [set() for _ in tidx]
        for src, dst in raw["arcs"]:
            if src in pidx:
                pre[tidx[dst]].add(pidx[src])
            else:
                post[tidx[src]].add(pidx[dst])
        return cls(
            place_names=tuple(raw["places"]),
            trans_names=tuple(t["id"] for t in raw["transitions"]),
            labels=tuple(t["label"] for t in raw["transitions"]),
            pre=tuple(frozenset(s) for s in pre),
            post=tuple(frozenset(s) for s in post),
            m_init=frozenset(pidx[p] for p in raw["m_init"]),
            m_final=frozenset(pidx[p] for p in raw["m_final"]),
        )

    @property
    def n_places(self) -> int:
        return len(self.place_names)

    @property
    def n_transitions(self) -> int:
        return len(self.trans_names)

    def marking(self, names: Iterable[str]) -> frozenset:
        try:
            return frozenset(self.place_index[p] for p in names)
        except KeyError as exc:
            raise UnknownNode(exc.args[0]) from None

    def place_set(self, m: Iterable[int]) -> frozenset:
        return frozenset(self.place_names[p] for p in m)

    def transition(self, name: str) -> int:
        try:
            return self.trans_index[name]
        except KeyError:
            raise UnknownNode(name) from None

    def arcs(self):
        out = []
        for t, name in enumerate(self.trans_names):
            out += [(self.place_names[p], name) for p in sorted(self.pre[t])]
            out += [(name, self.place_names[p]) for p in sorted(self.post[t])]
        return out

    def to_dict(self) -> dict:
        return {
            "places": list(self.place_names),
            "transitions": [{"id": t, "label": lab} for t, lab in zip(self.trans_names, self.labels)],
            "arcs": [list(a) for a in self.arcs()],
            "m_init": sorted(self.place_set(self.m_init)),
            "m_final": sorted(self.place_set(self.m_final)),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SystemNet":
        try:
            transitions = [(t["id"], t.get("label")) for t in d["transitions"]]
            return cls.build(d["places"], transitions, [tuple(a) for a in d["arcs"]],
                             d.get("m_init", []), d.get("m_final", []))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed net description: {exc!r}") from None

    def incidence(self) -> list:
        """Dense ``|P| x |T|`` incidence matrix as nested lists."""
        mat = [[0] * self.n_transitions for _ in range(self.n_places)]
        for t in range(self.n_transitions):
            for p in self.pre[t]:
                mat[p][t] -= 1
            for p in self.post[t]:
                mat[p][t] += 1
        return mat


# -- structural queries --------------------------------------------------------

def preset(net: SystemNet, x: str) -> frozenset:
    """Names of the nodes with an arc into ``x``."""
    if x in net.trans_index:
        return net.place_set(net.pre[net.trans_index[x]])
    if x in net.place_index:
        return frozenset(net.trans_names[t] for t in net.producers[net.place_index[x]])
    raise UnknownNode(x)


def postset(net: SystemNet, x: str) -> frozenset:
    if x in net.trans_index:
        return net.place_set(net.post[net.trans_index[x]])
    if x in net.place_index:
        return frozenset(net.trans_names[t] for t in net.consumers[net.place_index[x]])
    raise UnknownNode(x)


# -- firing rule ----------------------------------------------------------------

def enabled(net: SystemNet, m: frozenset) -> frozenset:
    cands = set()
    for p in m:
        cands.update(net.consumers[p])
    return frozenset(t for t in cands if net.pre[t] <= m)


def fire(net: SystemNet, m: frozenset, t: int) -> frozenset:
    pre = net.pre[t]
    if not pre <= m:
        raise NotEnabled(f"{net.trans_names[t]} is not enabled")
    rest = m - pre
    clash = rest & net.post[t]
    if clash:
        names = sorted(net.place_names[p] for p in clash)
        raise UnsafeMarking(f"firing {net.trans_names[t]} puts a second token on {names}")
    return rest | net.post[t]


def reachable_markings(net: SystemNet, limit: int = 1_000_000) -> set:
    """Breadth-first reachability set; raises ``UnsafeMarking`` on 1-safeness violations."""
    seen = {net.m_init}
    todo = deque([net.m_init])
    while todo:
        m = todo.popleft()
        for t in sorted(enabled(net, m)):
            m2 = fire(net, m, t)
            if m2 not in seen:
                seen.add(m2)
                if len(seen) > limit:
                    raise RuntimeError("reachability limit exceeded")
                todo.append(m2)
    return seen


# -- validation -----------------------------------------------------------------

_HARD_RULES = {"UnknownPlace", "UnknownNode", "BadArc", "DuplicateId", "MarkingMultiplicity", "Malformed"}


def validate(net: Union[SystemNet, Mapping]) -> list:
    """List every invariant violation; an empty list means the net is well formed.

    Accepts a built :class:`SystemNet` or a raw net-JSON mapping (the latter can
    also report dangling references, which a built net cannot contain).
    """
    if isinstance(net, SystemNet):
        net = net.to_dict()
    return _validate_raw(net)


def _validate_raw(d: Mapping) -> list:
    out = []
    try:
        places = list(d["places"])
        trans = [(t["id"], t.get("label")) for t in d["transitions"]]
        arcs = [tuple(a) for a in d["arcs"]]
        m_init = list(d.get("m_init", []))
        m_final = list(d.get("m_final", []))
    except (KeyError, TypeError) as exc:
        return [Violation("Malformed", "-", repr(exc))]
    if not places:
        out.append(Violation("EmptyPlaces", "-", "net has no places"))
    pset = set(places)
    tset = {t for t, _ in trans}
    if len(pset) != len(places) or len(tset) != len(trans):
        out.append(Violation("DuplicateId", "-", "repeated place or transition id"))
    for n in sorted(pset & tset, key=str):
        out.append(Violation("DuplicateId", str(n), "used as both place and transition"))
    ins = {t: 0 for t in tset}
    outs = {t: 0 for t in tset}
    for a in arcs:
        if len(a) != 2:
            out.append(Violation("BadArc", str(a), "arc must be a pair"))
            continue
        src, dst = a
        if src in pset and dst in tset:
            ins[dst] += 1
        elif src in tset and dst in pset:
            outs[src] += 1
        elif src not in pset | tset or dst not in pset | tset:
            bad = src if src not in pset | tset else dst
            out.append(Violation("UnknownNode", str(bad), f"arc {src}->{dst}"))
        else:
            out.append(Violation("BadArc", f"{src}->{dst}", "arcs must connect a place and a transition"))
    for t, _ in trans:
        if ins.get(t, 0) == 0:
            out.append(Violation("TransitionNoInput", str(t)))
        if outs.get(t, 0) == 0:
            out.append(Violation("TransitionNoOutput", str(t)))
    for name, m in (("m_init", m_init), ("m_final", m_final)):
        for p in m:
            if p not in pset:
                out.append(Violation("UnknownPlace", str(p), f"referenced by {name}"))
        if len(set(m)) != len(m):
            out.append(Violation("MarkingMultiplicity", name, "a place holds more than one token"))
    return out


# -- file formats ---------------------------------------------------------------

def load_net(path, final_marking: Optional[Sequence[str]] = None) -> SystemNet:
    """Load net JSON or a PNML file.

    PNML carries no final marking; it comes from ``final_marking`` or from a
    sidecar ``<stem>.final.json`` holding a list of place ids.
    """
    path = Path(path)
    if path.suffix.lower() == ".pnml":
        if final_marking is None:
            sidecar = path.with_suffix(".final.json")
            if sidecar.exists():
                final_marking = json.loads(sidecar.read_text())
        return read_pnml(path.read_text(), final_marking or [])
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if final_marking is not None:
        data["m_final"] = list(final_marking)
    return SystemNet.from_dict(data)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def read_pnml(text: str, final_marking: Sequence[str] = ()) -> SystemNet:
    """Read the place/transition/arc/initialMarking subset of PNML."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise InputError(f"PNML parse error: {exc}") from None
    places, trans, arcs, m_init = [], [], [], []
    for el in root.iter():
        kind = _local(el.tag)
        if kind == "place":
            pid = el.get("id")
            places.append(pid)
            for sub in el:
                if _local(sub.tag) == "initialMarking":
                    txt = "".join(x.text or "" for x in sub.iter() if _local(x.tag) == "text").strip()
                    if txt and int(txt) > 0:
                        m_init.append(pid)
        elif kind == "transition":
            label = None
            silent = False
            for sub in el.iter():
                tag = _local(sub.tag)
                if tag == "name":
                    texts = [x.text for x in sub.iter() if _local(x.tag) == "text" and x.text]
                    label = texts[0].strip() if texts else None
                elif tag == "toolspecific" and sub.get("activity") == "$invisible$":
                    silent = True
            trans.append((el.get("id"), None if silent else label))
        elif kind == "arc":
            arcs.append((el.get("source"), el.get("target")))
    return SystemNet.build(places, trans, arcs, m_init, final_marking)


def write_json(net: SystemNet, path) -> None:
    Path(path).write_text(json.dumps(net.to_dict(), indent=2) + "\n")
