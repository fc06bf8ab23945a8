"""The Laakso-type graph as an implicit graph.

A vertex is a canonical pair (u, x): an ultrametric index point u (sparse
map of scale -> copy index, range [0, g(k)-1]) and a tree vertex x.  When x
sits in a level-n wormhole the quotient identifies all values of u(n), so the
canonical form zeroes that coordinate.  Adjacency is computed, never stored:
lift u at the quotiented coordinate of x, move to a tree neighbor, and
re-canonicalize.  Balls therefore cost O(ball), not O(graph).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from . import tree as tree_mod
from .params import BranchingFunction, GluingFunction, validate
from .tree import Label

__all__ = [
    "Vertex",
    "LaaksoGraph",
    "BallSummary",
    "InducedBallGraph",
    "CapExceededError",
    "InvalidRangeError",
]

# canonical vertex: (ultra support, tree support), both sparse sorted tuples
Vertex = Tuple[Tuple[Tuple[int, int], ...], Label]


class CapExceededError(RuntimeError):
    def __init__(self, msg, visited=0, radius_reached=0):
        super().__init__(msg)
        self.visited = visited
        self.radius_reached = radius_reached


class InvalidRangeError(ValueError):
    pass


@dataclass(frozen=True)
class BallSummary:
    center: Vertex
    radius: int
    vertex_count: int
    degree_sum: int
    boundary_size: int

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "vertex_count": self.vertex_count,
            "degree_sum": self.degree_sum,
            "boundary_size": self.boundary_size,
        }


@dataclass
class InducedBallGraph:
    """Subgraph induced by the closed ball of radius 2**level around the base
    point (the all-zero pair)."""

    level: int
    vertices: List[Vertex]
    index: Dict[Vertex, int]
    adjacency: List[List[int]]
    base_index: int

    @property
    def degrees(self) -> List[int]:
        return [len(a) for a in self.adjacency]

    def edge_list(self) -> List[Tuple[int, int]]:
        out = []
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i < j:
                    out.append((i, j))
        return out


class LaaksoGraph:
    """Implicit Laakso-type graph determined by (g, b) in graph mode."""

    def __init__(self, g: GluingFunction, b: BranchingFunction,
                 bfs_cap: int = 3_000_000):
        violations = validate(b, g, graph_mode=True)
        if violations:
            raise InvalidRangeError("; ".join(violations))
        self.g = g
        self.b = b
        self.bfs_cap = bfs_cap
        # per-tree-vertex cache: (neighbors with levels, wormhole level)
        self._tree_info: Dict[Label, Tuple[Tuple[Tuple[Label, Optional[int]], ...], Optional[int]]] = {}

    # -- vertices -----------------------------------------------------------

    @property
    def root(self) -> Vertex:
        return ((), ())

    def canonical_vertex(self, u, x, validate_ranges: bool = True) -> Vertex:
        """Quotient-canonical pair: u(n) zeroed when x is a level-n wormhole."""
        u = tuple(sorted((int(k), int(v)) for k, v in u))
        x = tuple((int(k), int(v)) for k, v in x)
        if validate_ranges:
            for k, v in u:
                if k <= 0 or not 0 <= v <= self.g(k) - 1:
                    raise InvalidRangeError(f"ultra value {v} at scale {k} out of range")
                if v == 0:
                    raise InvalidRangeError(f"explicit zero in ultra support at {k}")
            x = tree_mod.canonicalize(x, self.b)
        n = tree_mod.wormhole_level(x)
        if n is not None and any(k == n for k, _ in u):
            u = tuple(kv for kv in u if kv[0] != n)
        return (u, x)

    def _info(self, x: Label):
        info = self._tree_info.get(x)
        if info is None:
            nbrs = tree_mod.tree_neighbors(x, self.b)
            nbrs_lv = tuple((y, tree_mod.wormhole_level(y)) for y in nbrs)
            info = (nbrs_lv, tree_mod.wormhole_level(x))
            self._tree_info[x] = info
        return info

    def neighbors(self, v: Vertex) -> List[Vertex]:
        """Canonical neighbors, deduplicated and sorted."""
        u, x = v
        nbrs_lv, level = self._info(x)
        if level is not None and self.g(level) > 1:
            lifts = [u]
            for j in range(1, self.g(level)):
                lifts.append(tuple(sorted(u + ((level, j),))))
        else:
            lifts = [u]
        out = set()
        for y, y_level in nbrs_lv:
            if y_level is not None:
                for ul in lifts:
                    uc = tuple(kv for kv in ul if kv[0] != y_level)
                    out.add((uc, y))
            else:
                for ul in lifts:
                    out.add((ul, y))
        return sorted(out)

    def degree(self, v: Vertex) -> int:
        return len(self.neighbors(v))

    # -- balls ----------------------------------------------------------------

    def bfs_ball(self, center: Vertex, radius: int) -> Dict[Vertex, int]:
        """Exact graph distances on the closed ball {d <= radius}."""
        dist = {center: 0}
        queue = deque([center])
        while queue:
            v = queue.popleft()
            d = dist[v]
            if d >= radius:
                continue
            for w in self.neighbors(v):
                if w not in dist:
                    if len(dist) >= self.bfs_cap:
                        raise CapExceededError(
                            f"BFS ball exceeded cap {self.bfs_cap}",
                            visited=len(dist), radius_reached=d)
                    dist[w] = d + 1
                    queue.append(w)
        return dist

    def ball_volume(self, center: Vertex, r: float) -> int:
        """Sum of degrees over the open ball {d < r} (the graph measure)."""
        if r <= 0:
            return 0
        inner = int(np.ceil(r)) - 1
        ball = self.bfs_ball(center, inner)
        return sum(len(self.neighbors(v)) for v in ball)

    def ball_summary(self, center: Vertex, radius: int) -> BallSummary:
        ball = self.bfs_ball(center, radius)
        boundary = sum(1 for d in ball.values() if d == radius)
        degree_sum = sum(len(self.neighbors(v)) for v in ball)
        return BallSummary(center=center, radius=radius, vertex_count=len(ball),
                           degree_sum=degree_sum, boundary_size=boundary)

    def induced_ball_graph(self, level: int) -> InducedBallGraph:
        """Adjacency of the subgraph induced by the closed ball of radius
        2**level around the base point."""
        radius = 2 ** level
        ball = self.bfs_ball(self.root, radius)
        vertices = sorted(ball)
        index = {v: i for i, v in enumerate(vertices)}
        adjacency: List[List[int]] = [[] for _ in vertices]
        for v, i in index.items():
            for w in self.neighbors(v):
                j = index.get(w)
                if j is not None:
                    adjacency[i].append(j)
        for row in adjacency:
            row.sort()
        return InducedBallGraph(level=level, vertices=vertices, index=index,
                                adjacency=adjacency, base_index=index[self.root])


@dataclass
class BallSystem:
    """Indexed closed ball with sparse adjacency, the workhorse of the walk
    module.  Rows exist for expanded vertices (d < radius); boundary rows are
    empty, which makes truncated propagation absorbing."""

    graph: LaaksoGraph
    center: Vertex
    radius: int
    verts: List[Vertex]
    index: Dict[Vertex, int]
    dist: np.ndarray
    deg: np.ndarray
    adj: csr_matrix  # symmetric pattern restricted to expanded rows

    @property
    def n(self) -> int:
        return len(self.verts)


def build_ball_system(graph: LaaksoGraph, center: Vertex, radius: int) -> BallSystem:
    """BFS the closed ball and assemble CSR adjacency in one pass.

    Vertices are indexed in discovery order; true degrees are recorded for
    every indexed vertex including the boundary shell.
    """
    index: Dict[Vertex, int] = {center: 0}
    verts: List[Vertex] = [center]
    dist: List[int] = [0]
    deg: List[int] = [0]
    indptr: List[int] = [0]
    cols: List[int] = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        d = dist[i]
        if d >= radius:
            continue
        nbrs = graph.neighbors(verts[i])
        deg[i] = len(nbrs)
        for w in nbrs:
            j = index.get(w)
            if j is None:
                if len(verts) >= graph.bfs_cap:
                    raise CapExceededError(
                        f"ball system exceeded cap {graph.bfs_cap}",
                        visited=len(verts), radius_reached=d)
                j = len(verts)
                index[w] = j
                verts.append(w)
                dist.append(d + 1)
                deg.append(0)
                queue.append(j)
            cols.append(j)
        indptr.append(len(cols))
    # rows were appended in expansion order == discovery order (BFS pops in
    # index order), so indptr lines up with vertex indices for the expanded
    # prefix; boundary vertices get empty rows.
    n = len(verts)
    expanded = len(indptr) - 1
    full_indptr = np.zeros(n + 1, dtype=np.int64)
    full_indptr[1:expanded + 1] = indptr[1:]
    if expanded < n:
        full_indptr[expanded + 1:] = indptr[-1]
    adj = csr_matrix((np.ones(len(cols), dtype=np.float64),
                      np.asarray(cols, dtype=np.int32), full_indptr), shape=(n, n))
    deg_arr = np.asarray(deg, dtype=np.float64)
    # boundary degrees need one extra neighbor evaluation each
    for i in range(expanded, n):
        deg_arr[i] = len(graph.neighbors(verts[i]))
    return BallSystem(graph=graph, center=center, radius=radius, verts=verts,
                      index=index, dist=np.asarray(dist, dtype=np.int64),
                      deg=deg_arr, adj=adj)
