"""Input validation helpers shared by the public API surfaces."""

from __future__ import annotations

import numpy as np

from .graph import Graph


def check_positive_int(value, name: str) -> int:
    value = int(value)
    if value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return value


def check_probability(value, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_finite_array(arr, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_node_index(v, n: int, name: str = "node") -> int:
    v = int(v)
    if not 0 <= v < n:
        raise ValueError(f"{name} index {v} out of range for n={n}")
    return v


def check_graph(g: Graph) -> Graph:
    """Verify the structural invariants of a Graph instance."""
    if not isinstance(g, Graph):
        raise TypeError(f"expected Graph, got {type(g).__name__}")
    for u, v in g.edges:
        if u == v:
            raise ValueError(f"self-loop ({u}, {v})")
        if not (0 <= u < g.n and 0 <= v < g.n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={g.n}")
        if not u < v:
            raise ValueError(f"edge ({u}, {v}) not in canonical order")
    if g.features is not None and g.features.shape[0] != g.n:
        raise ValueError("feature row count does not match node count")
    return g


def as_graph(X, n: int | None = None) -> Graph:
    """Coerce an edge array or Graph into a validated Graph.

    Accepts a Graph, or an (m, 2) integer array of undirected edges (node
    count inferred from the max index unless ``n`` is given).
    """
    if isinstance(X, Graph):
        return check_graph(X)
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (m, 2) edge array, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == arr.astype(np.int64)):
            raise ValueError("edge array must contain integers")
        arr = arr.astype(np.int64)
    inferred = int(arr.max()) + 1 if arr.size else 1
    if n is None:
        n = inferred
    elif n < inferred:
        raise ValueError(f"n={n} smaller than max node index {inferred - 1}")
    return Graph(int(n), edges=[(int(u), int(v)) for u, v in arr])
