"""Small DAG utilities over integer node ids ``0..n-1``.

Reachability sets are Python ints used as bitsets; at the sizes handled here
this beats any matrix representation.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .errors import CyclicOrder


def topological_order(n: int, edges: Iterable[tuple]) -> list:
    succ = [[] for _ in range(n)]
    indeg = [0] * n
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    order = []
    while ready:
        v = ready.pop()
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    if len(order) != n:
        raise CyclicOrder("graph contains a cycle")
    return order


def descendants(n: int, edges: Iterable[tuple]) -> list:
    """``desc[v]`` is the bitset of nodes strictly reachable from ``v``."""
    edges = list(edges)
    succ = [[] for _ in range(n)]
    for a, b in edges:
        succ[a].append(b)
    desc = [0] * n
    for v in reversed(topological_order(n, edges)):
        acc = 0
        for w in succ[v]:
            acc |= desc[w] | (1 << w)
        desc[v] = acc
    return desc


def is_acyclic(n: int, edges: Iterable[tuple]) -> bool:
    try:
        topological_order(n, edges)
    except CyclicOrder:
        return False
    return True


def transitive_closure(n: int, edges: Iterable[tuple]) -> frozenset:
    desc = descendants(n, edges)
    return frozenset((v, w) for v in range(n) for w in _bits(desc[v]))


def transitive_reduction(n: int, edges: Iterable[tuple]) -> frozenset:
    """Unique minimal edge set with the same reachability (``edges`` must be acyclic)."""
    desc = descendants(n, edges)
    out = set()
    for v in range(n):
        covered = 0
        for w in _bits(desc[v]):
            covered |= desc[w]
        for w in _bits(desc[v] & ~covered):
            out.add((v, w))
    return frozenset(out)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def canonical_signature(labels: Sequence[str], edges: Iterable[tuple], rounds: int = 3) -> tuple:
    """Isomorphism-invariant fingerprint of a labeled DAG.

    Equal fingerprints are necessary, not sufficient, for isomorphism; callers
    confirm candidates with :func:`isomorphic`.
    """
    n = len(labels)
    edges = list(edges)
    preds = [[] for _ in range(n)]
    succs = [[] for _ in range(n)]
    for a, b in edges:
        succs[a].append(b)
        preds[b].append(a)
    sig = [str(lab) for lab in labels]
    for _ in range(rounds):
        sig = [
            repr((sig[v], tuple(sorted(sig[u] for u in preds[v])), tuple(sorted(sig[w] for w in succs[v]))))
            for v in range(n)
        ]
    return (n, len(edges), tuple(sorted(sig)))


def isomorphic(labels1, edges1, labels2, edges2) -> bool:
    """Labeled-DAG isomorphism test."""
    import networkx as nx
    from networkx.algorithms.isomorphism import DiGraphMatcher

    def build(labels, edges):
        g = nx.DiGraph()
        for i, lab in enumerate(labels):
            g.add_node(i, label=lab)
        g.add_edges_from(edges)
        return g

    if len(labels1) != len(labels2) or sorted(map(str, labels1)) != sorted(map(str, labels2)):
        return False
    g1, g2 = build(labels1, edges1), build(labels2, edges2)
    if g1.number_of_edges() != g2.number_of_edges():
        return False
    return DiGraphMatcher(g1, g2, node_match=lambda a, b: a["label"] == b["label"]).is_isomorphic()
