"""Canonical label arithmetic for the scale-irregular trees.

A tree point is an equivalence class of finitely supported integer labels.
Labels are stored sparsely as sorted tuples of (index, value) pairs with zero
values omitted; the canonical class representative zeroes the one "free"
coordinate when it exists.  All distance computations are closed-form in the
label coordinates (no search), which is what makes the implicit graphs
tractable at large radii.

Graph mode fixes the base index at 0 (value in {0, 1}) with branching 2 on
every lower scale, so distances are plain integers.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

__all__ = [
    "Label",
    "InvalidLabelError",
    "TooLargeError",
    "canonicalize",
    "representatives",
    "tree_neighbors",
    "tree_distance",
    "distance_to_root",
    "wormhole_level",
    "FiniteTree",
    "enumerate_finite_tree",
]

# sparse label: sorted ((index, value), ...) with value != 0
Label = Tuple[Tuple[int, int], ...]

ROOT: Label = ()


class InvalidLabelError(ValueError):
    pass


class TooLargeError(ValueError):
    pass


def _validate(label: Label, b, base: int) -> None:
    prev = None
    for k, v in label:
        if prev is not None and k <= prev:
            raise InvalidLabelError(f"label indices not strictly increasing at {k}")
        prev = k
        if k < base:
            raise InvalidLabelError(f"label index {k} below base {base}")
        if v == 0:
            raise InvalidLabelError(f"explicit zero at index {k}")
        if k == base:
            if v not in (0, 1):
                raise InvalidLabelError(f"value at base index must be 0 or 1, got {v}")
        elif not 0 <= v <= b(k) - 1:
            raise InvalidLabelError(f"value {v} at index {k} outside [0, b({k})-1]")


def _free_index(label: Label, base: int, top: Optional[int]) -> Optional[int]:
    """Index l with s(l-1) = 1 and s(j) = 0 for j < l-1, if it exists.

    At most one such l exists: it requires the lowest supported index to
    carry value exactly 1.
    """
    if not label:
        return None
    k0, v0 = label[0]
    if v0 != 1:
        return None
    l = k0 + 1
    if top is not None and l > top:
        return None
    return l


def canonicalize(label: Label, b, base: int = 0, top: Optional[int] = None) -> Label:
    """Class representative with the free coordinate zeroed; idempotent."""
    _validate(label, b, base)
    l = _free_index(label, base, top)
    if l is None:
        return label
    return tuple(kv for kv in label if kv[0] != l)


def representatives(v: Label, b, base: int = 0, top: Optional[int] = None) -> List[Label]:
    """All labels in the class of a canonical vertex: one, or b(l) of them."""
    l = _free_index(v, base, top)
    if l is None:
        return [v]
    out = [v]
    for j in range(1, b(l)):
        out.append(tuple(sorted(v + ((l, j),))))
    return out


def _flip_base(label: Label, base: int) -> Label:
    """Flip the base coordinate between 0 and 1."""
    if label and label[0][0] == base:
        if label[0][1] == 1:
            return label[1:]
        raise InvalidLabelError("base coordinate out of {0,1}")
    return ((base, 1),) + label


def tree_neighbors(v: Label, b, base: int = 0, top: Optional[int] = None) -> List[Label]:
    """Neighbors of a canonical vertex: flip the base coordinate of every
    representative, canonicalize, deduplicate; sorted for determinism."""
    out = set()
    for rep in representatives(v, b, base, top):
        out.add(canonicalize(_flip_base(rep, base), b, base, top))
    return sorted(out)


def _pin_root_walk(coords: Dict[int, int], base: int, top: int) -> Tuple[int, int]:
    """(distance to pin, distance to root) of a label within window [base, top].

    pin = the vertex with coordinate `top` equal to 1 and 0 below; root = the
    all-zero vertex.  Recursion over scales: passing between branch copies at
    scale k costs the sub-tree diameter 2^(k-1-base).
    """
    v0 = coords.get(base, 0)
    pin = 0 if v0 == 1 else 1
    root = 0 if v0 == 0 else 1
    w = 1
    for k in range(base + 1, top + 1):
        val = coords.get(k, 0)
        npin = root if val == 1 else pin + w
        nroot = root if val == 0 else pin + w
        pin, root = npin, nroot
        w *= 2
    return pin, root


def tree_distance(u: Label, v: Label, base: int = 0) -> int:
    """Exact tree-graph distance between canonical vertices (integer units).

    Recursion on the top differing coordinate n: both points lie in distinct
    branch copies glued at the scale-(n-1) pin vertex, so the distance splits
    into the two pin distances.
    """
    if u == v:
        return 0
    du = dict(u)
    dv = dict(v)
    n = max(k for k in set(du) | set(dv) if du.get(k, 0) != dv.get(k, 0))
    if n == base:
        return 1
    pu, _ = _pin_root_walk(du, base, n - 1)
    pv, _ = _pin_root_walk(dv, base, n - 1)
    return pu + pv


def distance_to_root(v: Label, base: int = 0) -> int:
    """Distance to the all-zero vertex, O(support) arithmetic."""
    if not v:
        return 0
    top = v[-1][0]
    _, root = _pin_root_walk(dict(v), base, top)
    return root


def wormhole_level(v: Label, base: int = 0) -> Optional[int]:
    """Wormhole level of a canonical vertex, or None when it is in no
    wormhole.

    A class is a level-n wormhole when it contains a label with value 1 at
    index n and zeros below, i.e. when the canonical form's lowest supported
    coordinate carries value 1; its root distance is then an odd multiple of
    2^n.  With branching 2 every non-root vertex qualifies and the level is
    the 2-adic valuation of the root distance; above branching 2 classes
    whose lowest value exceeds 1 are in no wormhole.
    """
    if not v:
        return None
    k0, v0 = v[0]
    if v0 != 1:
        return None
    return k0


def label_to_dict(v: Label) -> Dict[str, int]:
    """Sparse-map serialization, e.g. {"1": 2, "4": 1}."""
    return {str(k): val for k, val in v}


def label_from_dict(d) -> Label:
    return tuple(sorted((int(k), int(val)) for k, val in d.items() if int(val) != 0))


@dataclass
class FiniteTree:
    """Explicit enumeration of the finite tree on the window [m, n]."""

    m: int
    n: int
    vertices: List[Label]
    index: Dict[Label, int]
    edges: List[Tuple[int, int]]
    adjacency: List[List[int]]

    def bfs_distances(self, source: int) -> List[int]:
        dist = [-1] * len(self.vertices)
        dist[source] = 0
        queue = deque([source])
        while queue:
            i = queue.popleft()
            for j in self.adjacency[i]:
                if dist[j] < 0:
                    dist[j] = dist[i] + 1
                    queue.append(j)
        return dist

    def diameter(self) -> int:
        d0 = self.bfs_distances(0)
        far = max(range(len(d0)), key=d0.__getitem__)
        return max(self.bfs_distances(far))

    def is_connected(self) -> bool:
        return all(d >= 0 for d in self.bfs_distances(0))

    def write_csv(self, edges_path: str, vertices_path: str) -> None:
        """Edge list (u_id, v_id) and vertex table (id, label, root_distance,
        wormhole_level)."""
        with open(edges_path, "w") as fh:
            fh.write("u_id,v_id\n")
            for i, j in self.edges:
                fh.write(f"{i},{j}\n")
        with open(vertices_path, "w") as fh:
            fh.write("id,label,root_distance,wormhole_level\n")
            for i, v in enumerate(self.vertices):
                label = ";".join(f"{k}:{val}" for k, val in v)
                lv = wormhole_level(v, base=self.m)
                fh.write(f"{i},{label},{distance_to_root(v, base=self.m)},"
                         f"{'' if lv is None else lv}\n")


def enumerate_finite_tree(m: int, n: int, b, cap: int = 100_000) -> FiniteTree:
    """Explicit vertex/edge lists of the tree on the window [m, n].

    Brute force over all labels (base value in {0, 1}, value at k in
    [0, b(k)-1] above), canonicalized per class; raises TooLargeError when
    the label count exceeds the cap.
    """
    if m > n:
        raise ValueError("need m <= n")
    total = 2
    for k in range(m + 1, n + 1):
        total *= b(k)
        if total > 8 * cap:
            raise TooLargeError(f"label count exceeds {8 * cap}")
    ranges = [range(2)] + [range(b(k)) for k in range(m + 1, n + 1)]
    index: Dict[Label, int] = {}
    vertices: List[Label] = []
    for combo in itertools.product(*ranges):
        label = tuple((m + i, val) for i, val in enumerate(combo) if val != 0)
        canon = canonicalize(label, b, base=m, top=n)
        if canon not in index:
            index[canon] = len(vertices)
            vertices.append(canon)
            if len(vertices) > cap:
                raise TooLargeError(f"vertex count exceeds cap {cap}")
    edge_set = set()
    for canon, i in index.items():
        for y in tree_neighbors(canon, b, base=m, top=n):
            j = index[y]
            edge_set.add((min(i, j), max(i, j)))
    edges = sorted(edge_set)
    adjacency: List[List[int]] = [[] for _ in vertices]
    for i, j in edges:
        adjacency[i].append(j)
        adjacency[j].append(i)
    return FiniteTree(m=m, n=n, vertices=vertices, index=index, edges=edges,
                      adjacency=adjacency)
