"""
Arc-indexed symmetric digraphs with semi-infinite tails.

Every undirected edge ``{u, v}`` is stored as a pair of opposite arcs. Arc
ids are canonical: edges are sorted by ``(min endpoint, max endpoint,
multiplicity index)`` and edge ``i`` owns arcs ``2i`` (lower origin first)
and ``2i + 1``. The inverse of arc ``a`` is therefore ``a ^ 1`` and the edge
of ``a`` is ``a // 2``.

Tails are kept as boundary records only. For a tailed graph with ``A0``
internal arcs, the inbound boundary arc of tail ``j`` has id ``A0 + 2j`` and
its outbound partner has id ``A0 + 2j + 1``.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "SymmetricDigraph",
    "TailedGraph",
    "Truncation",
    "build_graph",
    "attach_tails",
    "truncate",
    "cycle_basis",
    "spanning_forest",
    "connected_components",
]

_ARC_LABEL = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*(?:\[\s*(\d+)\s*\])?\s*$")


def _frozen(x, dtype) -> np.ndarray:
    arr = np.array(x, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SymmetricDigraph:
    """Finite symmetric digraph without self-loops.

    Attributes
    ----------
    n_vertices : int
        Number of vertices, labelled ``0 .. n_vertices - 1``.
    origin, terminus : ndarray of int
        ``o(a)`` and ``t(a)`` for every arc.
    multiplicity : ndarray of int
        Index of the arc's edge among the parallel edges joining the same
        pair of vertices.
    """

    n_vertices: int
    origin: np.ndarray
    terminus: np.ndarray
    multiplicity: np.ndarray
    _out: tuple = field(repr=False, compare=False)
    _in: tuple = field(repr=False, compare=False)

    @property
    def n_arcs(self) -> int:
        return int(self.origin.size)

    @property
    def n_edges(self) -> int:
        return self.n_arcs // 2

    @property
    def inv(self) -> np.ndarray:
        return np.arange(self.n_arcs) ^ 1

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(int(self.origin[2 * i]), int(self.terminus[2 * i]))
                for i in range(self.n_edges)]

    def out_arcs(self, u: int) -> np.ndarray:
        return self._out[u]

    def in_arcs(self, u: int) -> np.ndarray:
        return self._in[u]

    def degree(self, u: int) -> int:
        return int(self._out[u].size)

    def arc_label(self, a: int) -> str:
        return f"{self.origin[a]}->{self.terminus[a]}[{self.multiplicity[a]}]"

    def arc_id(self, label: str) -> int:
        """Inverse of :meth:`arc_label`; ``"u->v"`` is shorthand for ``"u->v[0]"``."""
        m = _ARC_LABEL.match(label)
        if m is None:
            raise KeyError(f"malformed arc label {label!r}")
        u, v = int(m.group(1)), int(m.group(2))
        k = int(m.group(3) or 0)
        for a in self.out_arcs(u) if 0 <= u < self.n_vertices else ():
            if self.terminus[a] == v and self.multiplicity[a] == k:
                return int(a)
        raise KeyError(f"no arc {label!r} in graph")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymmetricDigraph):
            return NotImplemented
        return (self.n_vertices == other.n_vertices
                and np.array_equal(self.origin, other.origin)
                and np.array_equal(self.terminus, other.terminus))

    def __hash__(self) -> int:
        return hash((self.n_vertices, self.origin.tobytes(), self.terminus.tobytes()))


def build_graph(edges: Iterable[Sequence[int]], n_vertices: int | None = None) -> SymmetricDigraph:
    """Build a symmetric digraph from an undirected edge list.

    Parameters
    ----------
    edges : iterable of (u, v)
        Undirected edges. Repeated pairs become parallel edges.
    n_vertices : int, optional
        Vertex count. Defaults to one more than the largest id used.

    Raises
    ------
    ValueError
        On a self-loop or a vertex id outside ``[0, n_vertices)``.
    """
    pairs = [(int(u), int(v)) for u, v in edges]
    if n_vertices is None:
        n_vertices = 1 + max((max(e) for e in pairs), default=-1)
    n_vertices = int(n_vertices)
    for u, v in pairs:
        if u == v:
            raise ValueError(f"self-loops unsupported: edge ({u}, {v})")
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise ValueError(f"vertex id out of range [0, {n_vertices}) in edge ({u}, {v})")

    keyed = []
    seen: dict[tuple[int, int], int] = {}
    for u, v in pairs:
        key = (min(u, v), max(u, v))
        k = seen.get(key, 0)
        seen[key] = k + 1
        keyed.append((key[0], key[1], k))
    keyed.sort()

    origin, terminus, mult = [], [], []
    for lo, hi, k in keyed:
        origin += [lo, hi]
        terminus += [hi, lo]
        mult += [k, k]
    origin = np.array(origin, dtype=np.int64)
    terminus = np.array(terminus, dtype=np.int64)

    out = tuple(_frozen(np.flatnonzero(origin == u), np.int64) for u in range(n_vertices))
    inn = tuple(_frozen(np.flatnonzero(terminus == u), np.int64) for u in range(n_vertices))
    return SymmetricDigraph(
        n_vertices=n_vertices,
        origin=_frozen(origin, np.int64),
        terminus=_frozen(terminus, np.int64),
        multiplicity=_frozen(mult, np.int64),
        _out=out,
        _in=inn,
    )


@dataclass(frozen=True, eq=False)
class TailedGraph:
    """Internal graph plus ``r`` semi-infinite tails.

    ``attach[j]`` is the internal vertex ``o(P_j)`` that tail ``j`` is glued
    to. Several tails may share a vertex.
    """

    internal: SymmetricDigraph
    attach: np.ndarray

    @property
    def r(self) -> int:
        return int(self.attach.size)

    @property
    def n_vertices(self) -> int:
        return self.internal.n_vertices

    @property
    def n_arcs(self) -> int:
        return self.internal.n_arcs

    def inbound_arc(self, j: int) -> int:
        """Arc id of ``e_j`` (tail -> internal graph)."""
        return self.n_arcs + 2 * j

    def outbound_arc(self, j: int) -> int:
        """Arc id of the inverse of ``e_j`` (internal graph -> tail)."""
        return self.n_arcs + 2 * j + 1

    def tails_at(self, u: int) -> np.ndarray:
        return np.flatnonzero(self.attach == u)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TailedGraph):
            return NotImplemented
        return self.internal == other.internal and np.array_equal(self.attach, other.attach)

    def __hash__(self) -> int:
        return hash((self.internal, self.attach.tobytes()))


def attach_tails(g: SymmetricDigraph, attach_vertices: Sequence[int]) -> TailedGraph:
    """Glue one tail to each listed vertex (repeats allowed)."""
    attach = [int(u) for u in attach_vertices]
    if not attach:
        raise ValueError("at least one tail is required")
    for u in attach:
        if not 0 <= u < g.n_vertices:
            raise ValueError(f"attach vertex {u} not in graph with {g.n_vertices} vertices")
    return TailedGraph(internal=g, attach=_frozen(attach, np.int64))


@dataclass(frozen=True)
class Truncation:
    """Finite graph obtained by cutting every tail after ``length`` vertices.

    Attributes
    ----------
    graph : SymmetricDigraph
    length : int
    internal_arcs : ndarray
        Truncated-graph id of each internal arc, indexed by internal id.
    inbound, outbound : ndarray
        Truncated-graph ids of ``e_j`` and its inverse.
    inward : tuple of ndarray
        For each tail, the arcs pointing toward the internal graph, ordered
        from the attach vertex outward (``inward[j][0] == inbound[j]``).
    tail_vertices : tuple of ndarray
        Tail vertices ordered from the attach vertex outward; the last one
        is the leaf.
    """

    graph: SymmetricDigraph
    length: int
    internal_arcs: np.ndarray
    inbound: np.ndarray
    outbound: np.ndarray
    inward: tuple
    tail_vertices: tuple


def truncate(tg: TailedGraph, length: int) -> Truncation:
    """Replace each tail by a path of ``length`` vertices ending in a leaf."""
    if length < 1:
        raise ValueError("truncation length must be >= 1")
    g0 = tg.internal
    n0 = g0.n_vertices
    edges = list(g0.edges)
    tail_vertices = []
    for j, u in enumerate(tg.attach):
        verts = n0 + j * length + np.arange(length)
        tail_vertices.append(verts)
        chain = [int(u)] + verts.tolist()
        edges += list(zip(chain[:-1], chain[1:]))
    g = build_graph(edges, n0 + tg.r * length)

    lookup = {}
    for a in range(g.n_arcs):
        lookup[(int(g.origin[a]), int(g.terminus[a]), int(g.multiplicity[a]))] = a
    internal_arcs = np.array(
        [lookup[(int(g0.origin[a]), int(g0.terminus[a]), int(g0.multiplicity[a]))]
         for a in range(g0.n_arcs)], dtype=np.int64)

    inward, inbound, outbound = [], [], []
    for j, u in enumerate(tg.attach):
        chain = [int(u)] + tail_vertices[j].tolist()
        arcs = np.array([lookup[(chain[i + 1], chain[i], 0)] for i in range(length)],
                        dtype=np.int64)
        inward.append(_frozen(arcs, np.int64))
        inbound.append(arcs[0])
        outbound.append(arcs[0] ^ 1)
    return Truncation(
        graph=g,
        length=length,
        internal_arcs=_frozen(internal_arcs, np.int64),
        inbound=_frozen(inbound, np.int64),
        outbound=_frozen(outbound, np.int64),
        inward=tuple(inward),
        tail_vertices=tuple(_frozen(v, np.int64) for v in tail_vertices),
    )


def spanning_forest(g: SymmetricDigraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """BFS spanning forest.

    Returns
    -------
    parent_arc : ndarray
        Tree arc entering each vertex from its parent, ``-1`` at roots.
    depth : ndarray
        BFS depth of each vertex.
    component : ndarray
        Component label of each vertex (labelled by discovery order).
    """
    n = g.n_vertices
    parent_arc = np.full(n, -1, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    component = np.full(n, -1, dtype=np.int64)
    label = 0
    for root in range(n):
        if depth[root] >= 0:
            continue
        depth[root] = 0
        component[root] = label
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for a in g.out_arcs(u):
                v = g.terminus[a]
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    parent_arc[v] = a
                    component[v] = label
                    queue.append(v)
        label += 1
    return parent_arc, depth, component


def connected_components(g: SymmetricDigraph) -> np.ndarray:
    return spanning_forest(g)[2]


def _tree_path(g, parent_arc, depth, u, v) -> list[int]:
    """Arc sequence of the tree path from ``u`` to ``v``."""
    up, down = [], []
    while depth[u] > depth[v]:
        a = parent_arc[u]
        up.append(int(a) ^ 1)
        u = g.origin[a]
    while depth[v] > depth[u]:
        a = parent_arc[v]
        down.append(int(a))
        v = g.origin[a]
    while u != v:
        a, b = parent_arc[u], parent_arc[v]
        up.append(int(a) ^ 1)
        down.append(int(b))
        u, v = g.origin[a], g.origin[b]
    return up + down[::-1]


def cycle_basis(g: SymmetricDigraph) -> list[list[int]]:
    """Fundamental cycles of a BFS spanning forest.

    One cycle per non-tree edge. Each cycle is a list of arc ids
    ``(a_1, ..., a_s)`` with ``t(a_k) == o(a_{k+1})`` cyclically, starting
    with the non-tree edge's lower-id arc.
    """
    parent_arc, depth, _ = spanning_forest(g)
    tree_edges = {int(a) // 2 for a in parent_arc if a >= 0}
    cycles = []
    for e in range(g.n_edges):
        if e in tree_edges:
            continue
        a = 2 * e
        cycles.append([a] + _tree_path(g, parent_arc, depth,
                                       int(g.terminus[a]), int(g.origin[a])))
    return cycles
