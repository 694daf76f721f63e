"""Edge-list ingestion and synthetic graph generators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph
from .validation import check_positive_int, check_probability


class EdgeListParseError(ValueError):
    """Raised for malformed edge-list lines, carrying the line number."""


@dataclass(frozen=True)
class DatasetSpec:
    """Where a training graph comes from.

    Exactly one of ``path`` (edge-list file) or ``generator`` (synthetic
    recipe, e.g. ``("ba", 100, 4)`` / ``("er", 500, 0.0493)``) is set.
    """

    path: str | None = None
    generator: tuple | None = None
    feature_path: str | None = None
    seed: int = 0
    one_indexed: bool = False

    def __post_init__(self):
        if (self.path is None) == (self.generator is None):
            raise ValueError("exactly one of path/generator must be set")
        if self.generator is not None:
            kind = self.generator[0]
            if kind == "ba":
                _, n, m = self.generator
                check_positive_int(m, "m_attach")
                if not 1 <= m < n:
                    raise ValueError(f"need 1 <= m_attach < n, got m={m}, n={n}")
            elif kind == "er":
                _, n, p = self.generator
                check_positive_int(n, "n")
                check_probability(p, "p")
            else:
                raise ValueError(f"unknown generator {kind!r}")

    @classmethod
    def parse(cls, text: str, feature_path: str | None = None, seed: int = 0,
              one_indexed: bool = False) -> "DatasetSpec":
        """Parse ``ba:n:m``, ``er:n:p``, or a file path."""
        if text.startswith("ba:"):
            _, n, m = text.split(":")
            return cls(generator=("ba", int(n), int(m)), seed=seed)
        if text.startswith("er:"):
            _, n, p = text.split(":")
            return cls(generator=("er", int(n), float(p)), seed=seed)
        return cls(path=text, feature_path=feature_path, seed=seed,
                   one_indexed=one_indexed)

    def load(self) -> Graph:
        if self.path is not None:
            return load_edge_list(self.path, feature_path=self.feature_path,
                                  one_indexed=self.one_indexed)
        kind = self.generator[0]
        if kind == "ba":
            _, n, m = self.generator
            return gen_barabasi_albert(n, m, seed=self.seed)
        _, n, p = self.generator
        return gen_erdos_renyi(n, p, seed=self.seed)


def load_edge_list(path, n_hint: int | None = None, feature_path=None,
                   one_indexed: bool = False) -> Graph:
    """Read a whitespace-separated edge list into a Graph.

    Each non-comment line is ``u v`` or ``u v type``. Duplicate and reversed
    edges are deduplicated; self-loops are dropped with a warning. Node count
    is max index + 1 unless ``n_hint`` is larger.
    """
    rows: list[tuple[int, int, int | None]] = []
    max_index = -1
    dropped_loops = 0
    offset = 1 if one_indexed else 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise EdgeListParseError(
                    f"{path}: line {lineno}: expected 2 or 3 fields, got {len(parts)}"
                )
            try:
                u = int(parts[0]) - offset
                v = int(parts[1]) - offset
                etype = int(parts[2]) if len(parts) == 3 else None
            except ValueError as exc:
                raise EdgeListParseError(
                    f"{path}: line {lineno}: non-integer field ({exc})"
                ) from None
            if u < 0 or v < 0:
                raise EdgeListParseError(
                    f"{path}: line {lineno}: negative node index"
                )
            max_index = max(max_index, u, v)
            if u == v:
                dropped_loops += 1
                continue
            rows.append((u, v, etype))

    if max_index < 0 and n_hint is None:
        raise EdgeListParseError(f"{path}: no edges and no n_hint given")
    n = max_index + 1
    if n_hint is not None:
        if n_hint < n:
            raise ValueError(f"n_hint={n_hint} smaller than max index + 1 = {n}")
        n = n_hint
    if dropped_loops:
        warnings.warn(
            f"{path}: dropped {dropped_loops} self-loop(s)", stacklevel=2
        )

    g = Graph(n)
    for u, v, etype in rows:
        g.add_edge(u, v, etype)
    if feature_path is not None:
        g.set_features(load_feature_matrix(feature_path, n))
    return g


def load_feature_matrix(path, n: int) -> np.ndarray:
    """Text matrix sidecar: one whitespace-separated row of reals per node."""
    mat = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if mat.shape[0] != n:
        raise ValueError(
            f"{path}: feature rows ({mat.shape[0]}) do not match node count ({n})"
        )
    return mat.astype(np.float32)


def write_edge_list(g: Graph, path) -> None:
    """Inverse of load_edge_list for generated graphs."""
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in g.edges:
            etype = g.edge_type(u, v)
            if etype is None:
                fh.write(f"{u} {v}\n")
            else:
                fh.write(f"{u} {v} {etype}\n")
    Path(path).touch()


def gen_barabasi_albert(n: int, m_attach: int, seed: int = 0) -> Graph:
    """Preferential-attachment graph with exactly m_attach*(n-m_attach) edges.

    Growth starts from m_attach seed nodes; each subsequent node attaches to
    m_attach distinct existing nodes drawn proportionally to degree (uniform
    while no edges exist). Deterministic for a given seed.
    """
    n = check_positive_int(n, "n")
    m_attach = check_positive_int(m_attach, "m_attach")
    if m_attach >= n:
        raise ValueError(f"need m_attach < n, got m_attach={m_attach}, n={n}")
    rng = np.random.default_rng(seed)
    g = Graph(n)
    # multiplicity of each node in `repeated` is its degree
    repeated: list[int] = []
    targets = list(range(m_attach))
    for v in range(m_attach, n):
        for t in targets:
            g.add_edge(t, v)
        repeated.extend(targets)
        repeated.extend([v] * m_attach)
        picks: list[int] = []
        while len(picks) < m_attach:
            candidate = repeated[int(rng.integers(len(repeated)))]
            if candidate not in picks:
                picks.append(candidate)
        targets = picks
    return g


def gen_erdos_renyi(n: int, p: float, seed: int = 0) -> Graph:
    """Each of the C(n, 2) node pairs is an edge independently with prob p."""
    n = check_positive_int(n, "n")
    p = check_probability(p, "p")
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, k=1)
    mask = rng.random(iu.shape[0]) < p
    g = Graph(n)
    for u, v in zip(iu[mask], iv[mask]):
        g.add_edge(int(u), int(v))
    return g


def degree_bucket_features(g: Graph, n_buckets: int = 8) -> np.ndarray:
    """One-hot log-spaced degree buckets, the default node features.

    Bucket k covers degrees in [2^k - 1, 2^(k+1) - 2]; the last bucket is
    open-ended. The degrees of the observed graph are used, giving nodes a
    stable identity signal during construction from the empty edge set.
    """
    deg = g.degrees().astype(np.float64)
    bucket = np.minimum(np.floor(np.log2(deg + 1.0)), n_buckets - 1).astype(np.int64)
    feats = np.zeros((g.n, n_buckets), dtype=np.float32)
    feats[np.arange(g.n), bucket] = 1.0
    return feats
