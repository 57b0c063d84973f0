"""Chevron views of u-alignments (SVG) and DOT export of alignment orders."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union
from xml.sax.saxutils import escape

from . import graphs
from .aligner import INVISIBLE, AlignmentOrder, UAlignment, _natkey
from .errors import CyclicOrder
from .petri import TAU, label_str
from .product import COLORS, LOG, MODEL, SYNC

PHI_COLOR = COLORS["target"]


@dataclass
class Leaf:
    node: str
    color: str = ""
    width: float = 1
    height: int = 1


@dataclass
class Sequence_:
    children: list
    width: float = 0
    height: int = 0


@dataclass
class Parallel:
    children: list
    width: float = 0
    height: int = 0


@dataclass
class Fallback:
    """Residual sub-DAG with neither cut: one column per depth layer, arrows drawn explicitly."""
    layers: list  # list of lists of node ids
    edges: list  # reduction edges inside the block
    width: float = 0
    height: int = 0


Block = Union[Leaf, Sequence_, Parallel, Fallback]


@dataclass
class ChevronLayout:
    root: Optional[Block]
    spans: dict = field(default_factory=dict)  # node -> (x0, x1) in width units
    rows: dict = field(default_factory=dict)  # node -> row index
    arrows: list = field(default_factory=list)  # fallback dependency arrows
    width: float = 0
    height: int = 0

    def leaves(self) -> list:
        out = []

        def walk(b):
            if isinstance(b, Leaf):
                out.append(b.node)
            elif isinstance(b, Fallback):
                out.extend(n for layer in b.layers for n in layer)
            elif b is not None:
                for c in b.children:
                    walk(c)

        walk(self.root)
        return out


def _components(nodes: list, adjacent) -> list:
    seen, comps = set(), []
    for s in nodes:
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in nodes:
                if v not in seen and adjacent(u, v):
                    seen.add(v)
                    stack.append(v)
        comps.append(comp)
    return comps


def partition(nodes: Sequence[str], edges, colors: Optional[dict] = None) -> ChevronLayout:
    """Recursive sequential / parallel decomposition of a labeled DAG, with a fallback block."""
    colors = colors or {}
    nodes = sorted(nodes, key=_natkey)
    if not nodes:
        return ChevronLayout(None)
    idx = {v: i for i, v in enumerate(nodes)}
    clo_i = graphs.transitive_closure(len(nodes), [(idx[a], idx[b]) for a, b in edges])
    clo = {(nodes[a], nodes[b]) for a, b in clo_i}
    rank = {nodes[i]: k for k, i in enumerate(_stable_topo(len(nodes), clo_i))}

    def comparable(u, v):
        return (u, v) in clo or (v, u) in clo

    def build(sub):
        sub = sorted(sub, key=lambda v: rank[v])
        if len(sub) == 1:
            return Leaf(sub[0], colors.get(sub[0], ""))
        comps = _components(sub, lambda u, v: not comparable(u, v))
        if len(comps) > 1:
            # incomparability components are totally ordered, all-before-all
            comps.sort(key=lambda c: min(rank[v] for v in c))
            return _flat(Sequence_, [build(c) for c in comps])
        comps = _components(sub, comparable)
        if len(comps) > 1:
            comps.sort(key=lambda c: min(rank[v] for v in c))
            return _flat(Parallel, [build(c) for c in comps])
        depth = {}
        for v in sub:
            depth[v] = max((depth[u] + 1 for u in sub if (u, v) in clo and u in depth), default=0)
        layers = [[] for _ in range(max(depth.values()) + 1)]
        for v in sub:
            layers[depth[v]].append(v)
        inner = [(a, b) for a, b in clo if a in depth and b in depth]
        red = sorted(_reduce(sub, inner), key=lambda e: (rank[e[0]], rank[e[1]]))
        return Fallback(layers, red)

    root = build(nodes)
    lay = ChevronLayout(root)
    _measure(root)
    _place(root, 0.0, float(root.width), 0, lay)
    lay.width, lay.height = root.width, root.height
    return lay


def _stable_topo(n: int, edges) -> list:
    """Kahn's algorithm, always taking the smallest ready index."""
    indeg = [0] * n
    succ = [[] for _ in range(n)]
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        v = heapq.heappop(ready)
        out.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    if len(out) != n:
        raise CyclicOrder("graph has a cycle")
    return out


def _flat(kind, kids):
    out = []
    for k in kids:
        out.extend(k.children if isinstance(k, kind) else [k])
    return kind(out)


def _reduce(nodes, edges):
    idx = {v: i for i, v in enumerate(nodes)}
    red = graphs.transitive_reduction(len(nodes), [(idx[a], idx[b]) for a, b in edges])
    return [(nodes[a], nodes[b]) for a, b in red]


def _measure(b: Block):
    if isinstance(b, Leaf):
        return
    if isinstance(b, Fallback):
        b.width = len(b.layers)
        b.height = max(len(layer) for layer in b.layers)
        return
    for c in b.children:
        _measure(c)
    if isinstance(b, Sequence_):
        b.width = sum(c.width for c in b.children)
        b.height = max(c.height for c in b.children)
    else:
        b.width = max(c.width for c in b.children)
        b.height = sum(c.height for c in b.children)


def _place(b: Block, x0: float, x1: float, row: int, lay: ChevronLayout):
    if isinstance(b, Leaf):
        lay.spans[b.node] = (x0, x1)
        lay.rows[b.node] = row
    elif isinstance(b, Sequence_):
        x = x0
        scale = (x1 - x0) / b.width
        for c in b.children:
            _place(c, x, x + c.width * scale, row, lay)
            x += c.width * scale
    elif isinstance(b, Parallel):
        r = row
        for c in b.children:
            _place(c, x0, x1, r, lay)
            r += c.height
    else:
        step = (x1 - x0) / len(b.layers)
        for i, layer in enumerate(b.layers):
            for j, v in enumerate(layer):
                lay.spans[v] = (x0 + i * step, x0 + (i + 1) * step)
                lay.rows[v] = row + j
        lay.arrows.extend(b.edges)


def layout_is_sound(lay: ChevronLayout, edges) -> bool:
    """Every ordered pair occupies disjoint, correctly ordered x-spans."""
    nodes = list(lay.spans)
    idx = {v: i for i, v in enumerate(nodes)}
    clo = graphs.transitive_closure(len(nodes), [(idx[a], idx[b]) for a, b in edges])
    eps = 1e-9
    return all(lay.spans[nodes[a]][1] <= lay.spans[nodes[b]][0] + eps for a, b in clo)


# -- SVG ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class SvgOptions:
    unit: int = 110
    row: int = 34
    notch: int = 10
    pad: int = 20
    gap: int = 60  # vertical space between the two strips
    font_size: int = 12
    title: Optional[str] = None


def _f(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _chevron(x0, x1, y, h, notch, first):
    inner = notch if not first else 0
    pts = [(x0, y), (x1 - notch, y), (x1, y + h / 2), (x1 - notch, y + h), (x0, y + h), (x0 + inner, y + h / 2)]
    return " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)


def _strip(lay, labels, fills, striped, side, top, opts, out):
    anchors = {}
    for v in sorted(lay.spans, key=lambda n: (lay.rows[n], lay.spans[n][0], _natkey(n))):
        x0, x1 = lay.spans[v]
        px0 = opts.pad + x0 * opts.unit + 1
        px1 = opts.pad + x1 * opts.unit - 1
        y = top + lay.rows[v] * opts.row + 2
        h = opts.row - 4
        pts = _chevron(px0, px1, y, h, opts.notch, x0 == 0)
        nid = escape(f"{side}-{v}", {'"': "&quot;"})
        out.append(f'<g class="node {side}" id="{nid}">')
        out.append(f'<polygon points="{pts}" fill="{fills[v]}" stroke="#ffffff"/>')
        if v in striped:
            out.append(f'<polygon class="missing" points="{pts}" fill="url(#stripes)"/>')
        cx = (px0 + px1) / 2
        out.append(f'<text x="{_f(cx)}" y="{_f(y + h / 2 + opts.font_size / 3)}" text-anchor="middle" '
                   f'font-size="{opts.font_size}" fill="#ffffff">{escape(labels[v])}</text>')
        out.append("</g>")
        anchors[v] = (cx, y, y + h)
    for a, b in lay.arrows:
        xa, ya0, ya1 = anchors[a]
        xb, yb0, yb1 = anchors[b]
        out.append(f'<line class="dep" x1="{_f(opts.pad + lay.spans[a][1] * opts.unit - 2)}" y1="{_f((ya0 + ya1) / 2)}" '
                   f'x2="{_f(opts.pad + lay.spans[b][0] * opts.unit + 2)}" y2="{_f((yb0 + yb1) / 2)}" '
                   f'stroke="#333333" marker-end="url(#arrow)"/>')
    return anchors


def render_svg(ua: UAlignment, opts: Optional[SvgOptions] = None) -> str:
    """Log strip above the model strip; synchronous pairs joined by dashed connectors."""
    opts = opts or SvgOptions()
    inv = {m: l for l, m in ua.phi.items()}
    log_lab = {v: ua.log_nodes[v] for v in ua.log_nodes}
    mod_lab = {v: label_str(ua.model_nodes[v]) for v in ua.model_nodes}
    log_fill = {v: COLORS[SYNC] if v in ua.phi else COLORS[LOG] for v in ua.log_nodes}
    mod_fill = {v: COLORS[SYNC] if v in inv else (COLORS["tau"] if ua.model_nodes[v] is TAU else COLORS[MODEL])
                for v in ua.model_nodes}
    lay_l = partition(list(ua.log_nodes), ua.log_edges, log_fill)
    lay_m = partition(list(ua.model_nodes), ua.model_edges, mod_fill)
    header = 24 if opts.title else 0
    width = 2 * opts.pad + max(lay_l.width, lay_m.width, 1) * opts.unit
    top_l = opts.pad + header + 16
    top_m = top_l + lay_l.height * opts.row + opts.gap
    height = top_m + lay_m.height * opts.row + opts.pad
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}" font-family="sans-serif">',
        "<defs>",
        '<pattern id="stripes" width="8" height="8" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">'
        '<rect width="4" height="8" fill="#ffffff" fill-opacity="0.45"/></pattern>',
        '<marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" markerHeight="6" orient="auto">'
        '<path d="M0,0 L10,5 L0,10 z" fill="#333333"/></marker>',
        "</defs>",
        f'<rect width="{_f(width)}" height="{_f(height)}" fill="#ffffff"/>',
    ]
    if opts.title:
        out.append(f'<text x="{opts.pad}" y="{opts.pad + 12}" font-size="14">{escape(opts.title)}</text>')
    out.append(f'<text x="{opts.pad}" y="{_f(top_l - 4)}" font-size="11" fill="#555555">log</text>')
    out.append(f'<text x="{opts.pad}" y="{_f(top_m - 4)}" font-size="11" fill="#555555">model</text>')
    striped = {v for v in ua.log_nodes if v not in ua.phi}
    a_l = _strip(lay_l, log_lab, log_fill, striped, "log", top_l, opts, out)
    a_m = _strip(lay_m, mod_lab, mod_fill, set(), "model", top_m, opts, out)
    for l_id, m_id in sorted(ua.phi.items(), key=lambda kv: _natkey(kv[0])):
        xl, _, yl = a_l[l_id]
        xm, ym, _ = a_m[m_id]
        out.append(f'<line class="phi" x1="{_f(xl)}" y1="{_f(yl)}" x2="{_f(xm)}" y2="{_f(ym)}" '
                   f'stroke="{PHI_COLOR}" stroke-dasharray="4 3"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- DOT -----------------------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def order_to_dot(order: AlignmentOrder, name: str = "alignment") -> str:
    """Alignment order as DOT: one cluster per move side, edges colored by dependency tag."""
    fill = {SYNC: COLORS[SYNC], LOG: COLORS[LOG], MODEL: COLORS[MODEL], INVISIBLE: COLORS["tau"]}
    groups = (("sync", (SYNC,)), ("log", (LOG,)), ("model", (MODEL, INVISIBLE)))
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;", '  node [shape=box, style="filled,rounded", fontcolor=white];']
    for cname, kinds in groups:
        members = [n for n in order.nodes if n.kind in kinds]
        if not members:
            continue
        lines.append(f"  subgraph cluster_{cname} {{")
        lines.append(f"    label={_q(cname)}; style=dashed; color=\"#bbbbbb\";")
        for n in members:
            model = ">>" if n.model == ">>" else label_str(n.model)
            lines.append(f"    {_q(n.id)} [label={_q(f'({n.log},{model})')}, fillcolor={_q(fill[n.kind])}];")
        lines.append("  }")
    for (u, v), tags in sorted(order.edges.items(), key=lambda kv: (_natkey(kv[0][0]), _natkey(kv[0][1]))):
        col = ":".join(COLORS[t] for t in (LOG, MODEL) if t in tags)
        lines.append(f"  {_q(u)} -> {_q(v)} [color={_q(col)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
