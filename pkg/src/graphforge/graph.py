"""Undirected graph on a fixed node set.

Nodes are the integers 0..n-1 and never change; edges accumulate. Edges are
stored in canonical (u, v) form with u < v, in insertion order, so that
iteration and serialization are reproducible run to run.
"""

from __future__ import annotations

import numpy as np


def canonical_edge(u: int, v: int) -> tuple[int, int]:
    """Return the (min, max) form of an undirected edge."""
    return (u, v) if u < v else (v, u)


class Graph:
    """Fixed node set, growing undirected edge set, optional node features.

    Parameters
    ----------
    n:
        Number of nodes (positive).
    edges:
        Iterable of (u, v) pairs or (u, v, type_id) triples.
    features:
        Optional (n, f) float matrix of node features.
    """

    __slots__ = ("n", "_edges", "features")

    def __init__(self, n, edges=(), features=None):
        if n < 1:
            raise ValueError(f"node count must be positive, got {n}")
        self.n = int(n)
        # insertion-ordered edge -> type id (or None); doubles as the edge set
        self._edges: dict[tuple[int, int], int | None] = {}
        self.features = None
        if features is not None:
            self.set_features(features)
        for item in edges:
            if len(item) == 3:
                u, v, etype = item
                self.add_edge(u, v, int(etype))
            else:
                u, v = item
                self.add_edge(u, v)

    def set_features(self, features) -> None:
        mat = np.asarray(features, dtype=np.float32)
        if mat.ndim != 2 or mat.shape[0] != self.n:
            raise ValueError(
                f"features must be ({self.n}, f), got shape {mat.shape}"
            )
        self.features = mat

    def add_edge(self, u: int, v: int, etype: int | None = None) -> bool:
        """Insert an undirected edge; returns False if it was already present."""
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop ({u}, {v}) not allowed")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
        key = canonical_edge(u, v)
        if key in self._edges:
            return False
        self._edges[key] = etype
        return True

    def has_edge(self, u: int, v: int) -> bool:
        return canonical_edge(int(u), int(v)) in self._edges

    def edge_type(self, u: int, v: int) -> int | None:
        return self._edges[canonical_edge(int(u), int(v))]

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edges in insertion order, canonical form."""
        return list(self._edges)

    @property
    def edge_types(self) -> dict[tuple[int, int], int | None]:
        return dict(self._edges)

    def edge_array(self) -> np.ndarray:
        """(m, 2) int64 array of canonical edges in insertion order."""
        if not self._edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.array(list(self._edges), dtype=np.int64)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self._edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency_sets(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self._edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def copy(self) -> "Graph":
        g = Graph(self.n)
        g._edges = dict(self._edges)
        g.features = None if self.features is None else self.features.copy()
        return g

    def without_edges(self) -> "Graph":
        """Same node set and features, empty edge set."""
        g = Graph(self.n)
        g.features = None if self.features is None else self.features.copy()
        return g

    def __contains__(self, edge) -> bool:
        u, v = edge
        return self.has_edge(u, v)

    def __repr__(self) -> str:
        feat = "" if self.features is None else f", features={self.features.shape}"
        return f"Graph(n={self.n}, edges={self.num_edges}{feat})"
