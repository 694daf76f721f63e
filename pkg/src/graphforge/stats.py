"""Graph statistics used for construction-quality evaluation.

The summary covers triangle count, average local clustering coefficient,
largest connected component size, degree assortativity, and max degree.
Quality of a generated graph is reported as per-statistic percent deviation
from the observed graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import Graph

STAT_FIELDS = (
    "triangle_count",
    "avg_clustering",
    "largest_cc",
    "assortativity",
    "max_degree",
)


@dataclass(frozen=True)
class StatsReport:
    """Five-statistic summary of an undirected graph.

    ``assortativity`` is None when the endpoint-degree correlation is
    undefined (zero variance, e.g. regular graphs or empty edge sets).
    """

    triangle_count: int
    avg_clustering: float
    largest_cc: int
    assortativity: float | None
    max_degree: int

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in STAT_FIELDS}

    def to_text(self) -> str:
        """One `name<TAB>value` line per statistic."""
        lines = []
        for name in STAT_FIELDS:
            value = getattr(self, name)
            if value is None:
                rendered = "undefined"
            elif isinstance(value, float):
                rendered = repr(value)
            else:
                rendered = str(value)
            lines.append(f"{name}\t{rendered}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StatsReport":
        values: dict = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, _, raw = line.partition("\t")
            if name not in STAT_FIELDS:
                raise ValueError(f"unknown statistic {name!r}")
            if name == "assortativity":
                values[name] = None if raw == "undefined" else float(raw)
            elif name == "avg_clustering":
                values[name] = float(raw)
            else:
                values[name] = int(raw)
        missing = [name for name in STAT_FIELDS if name not in values]
        if missing:
            raise ValueError(f"missing statistics: {missing}")
        return cls(**values)


def compute_stats(g: Graph) -> StatsReport:
    """Compute the five-statistic summary of ``g``.

    Clustering is the mean local (neighbor-pair) coefficient over all nodes,
    with degree-0/1 nodes contributing 0. Assortativity is the Pearson
    correlation over endpoint-degree pairs with both orientations of every
    edge included.
    """
    n = g.n
    deg = g.degrees()
    edges = g.edges

    adj = g.adjacency_sets()
    # node_tri_acc[v] accumulates 3x the number of triangles through v
    node_tri_acc = np.zeros(n, dtype=np.int64)
    tri_acc = 0
    for u, v in edges:
        common = adj[u] & adj[v]
        c = len(common)
        if c:
            tri_acc += c
            node_tri_acc[u] += c
            node_tri_acc[v] += c
            for w in common:
                node_tri_acc[w] += 1
    triangle_count = tri_acc // 3

    node_tri = node_tri_acc // 3
    pair_counts = deg * (deg - 1) // 2
    with np.errstate(divide="ignore", invalid="ignore"):
        local = np.where(pair_counts > 0, node_tri / np.maximum(pair_counts, 1), 0.0)
    avg_clustering = float(local.mean())

    largest_cc = _largest_component(n, adj)

    assortativity = _degree_assortativity(deg, edges)

    return StatsReport(
        triangle_count=int(triangle_count),
        avg_clustering=avg_clustering,
        largest_cc=largest_cc,
        assortativity=assortativity,
        max_degree=int(deg.max()) if n else 0,
    )


def _largest_component(n: int, adj: list[set[int]]) -> int:
    seen = np.zeros(n, dtype=bool)
    best = 0
    for start in range(n):
        if seen[start]:
            continue
        size = 0
        queue = deque([start])
        seen[start] = True
        while queue:
            node = queue.popleft()
            size += 1
            for nb in adj[node]:
                if not seen[nb]:
                    seen[nb] = True
                    queue.append(nb)
        best = max(best, size)
    return best


def _degree_assortativity(deg: np.ndarray, edges) -> float | None:
    if not edges:
        return None
    arr = np.asarray(edges, dtype=np.int64)
    du = deg[arr[:, 0]].astype(np.float64)
    dv = deg[arr[:, 1]].astype(np.float64)
    # both orientations of each undirected edge
    x = np.concatenate([du, dv])
    y = np.concatenate([dv, du])
    vx = x.var()
    vy = y.var()
    if vx == 0.0 or vy == 0.0:
        return None
    cov = ((x - x.mean()) * (y - y.mean())).mean()
    return float(cov / np.sqrt(vx * vy))


def degree_histogram(g: Graph) -> dict[int, int]:
    """Map degree -> node count; counts sum to n."""
    values, counts = np.unique(g.degrees(), return_counts=True)
    return {int(d): int(c) for d, c in zip(values, counts)}


@dataclass(frozen=True)
class DeviationReport:
    """Percent deviations of a generated report from an observed one.

    ``values`` carries 100*|gen-obs|/|obs| for every comparable statistic;
    ``skipped`` maps each non-comparable statistic to the reason it was
    dropped (undefined assortativity, observed value zero).
    """

    values: dict[str, float]
    skipped: dict[str, str]


def percent_deviation(observed: StatsReport, generated: StatsReport) -> DeviationReport:
    values: dict[str, float] = {}
    skipped: dict[str, str] = {}
    for name in STAT_FIELDS:
        obs = getattr(observed, name)
        gen = getattr(generated, name)
        if obs is None or gen is None:
            skipped[name] = "undefined"
            continue
        if obs == 0:
            skipped[name] = "observed value is zero"
            continue
        values[name] = 100.0 * abs(float(gen) - float(obs)) / abs(float(obs))
    return DeviationReport(values=values, skipped=skipped)
