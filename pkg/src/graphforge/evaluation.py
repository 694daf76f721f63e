"""Rollout-based generation, construction-quality scoring, link prediction."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import torch

from .encoder import StateEncoder
from .env import EnvConfig, GraphBuildEnv
from .graph import Graph, canonical_edge
from .policy import GaussianEdgePolicy, select_nodes
from .stats import STAT_FIELDS, DeviationReport, StatsReport, compute_stats, percent_deviation
from .validation import check_graph


def generate_graph(node_graph: Graph, policy: GaussianEdgePolicy,
                   encoder: StateEncoder, env_config: EnvConfig,
                   edge_budget_multiple: float, reference_edges: int,
                   torch_gen: torch.Generator | None = None,
                   deterministic: bool = False,
                   reward_fn=None) -> Graph:
    """Roll the policy out from the empty edge set.

    Stops at the environment's own termination or once the edge count
    reaches ``edge_budget_multiple * reference_edges``, whichever happens
    first.
    """
    env = GraphBuildEnv(node_graph.without_edges(), encoder, env_config,
                        reward_fn=reward_fn)
    state = env.reset()
    budget = edge_budget_multiple * reference_edges
    dtype = next(policy.parameters()).dtype
    while state.graph.num_edges < budget:
        s = torch.from_numpy(state.pooled).to(dtype)
        with torch.no_grad():
            if deterministic:
                noise = torch.zeros((2,) + s.shape, dtype=dtype)
                action = policy.sample(s, noise=noise)
            else:
                action = policy.sample(s, generator=torch_gen)
        v1, v2 = select_nodes(action, state.Z)
        _, _, terminal = env.step(v1, v2, action.concat().numpy(),
                                  float(action.log_prob.item()))
        if terminal:
            break
    return env.state.graph.copy()


def generate_uniform_random(node_graph: Graph, env_config: EnvConfig,
                            edge_budget_multiple: float, reference_edges: int,
                            rng: np.random.Generator) -> Graph:
    """Baseline arm: uniformly random node pairs under the same budget."""
    base = node_graph.without_edges()
    if base.features is None:
        base.set_features(np.zeros((base.n, 1), dtype=np.float32))
    env = GraphBuildEnv(base, _IdentityEncoder(node_graph), env_config)
    state = env.reset()
    budget = edge_budget_multiple * reference_edges
    n = node_graph.n
    while state.graph.num_edges < budget:
        v1 = int(rng.integers(n))
        v2 = int(rng.integers(n))
        _, _, terminal = env.step(v1, v2)
        if terminal:
            break
    return env.state.graph.copy()


class _IdentityEncoder:
    """Degenerate encoder for reward-free random rollouts (no re-embedding cost)."""

    def __init__(self, node_graph: Graph):
        self.embed_dim = 1
        self._z = torch.zeros((node_graph.n, 1))

    def encode(self, features, edges):
        return self._z

    def parameters(self):
        yield self._z


@dataclass
class EvalReport:
    """Stats of generated graphs and their percent deviations from observed."""

    observed: StatsReport
    reports: list[StatsReport]
    deviations: list[DeviationReport]
    mean: dict[str, float]
    std: dict[str, float]
    skipped: dict[str, int]
    elapsed_s: float = 0.0
    label: str = ""

    def cell(self, name: str) -> str:
        if name not in self.mean:
            return "n/a"
        return f"{self.mean[name]:.2f} ± {self.std[name]:.2f}"


def summarize_deviations(observed_stats: StatsReport,
                         reports: list[StatsReport],
                         elapsed_s: float = 0.0, label: str = "") -> EvalReport:
    deviations = [percent_deviation(observed_stats, rep) for rep in reports]
    mean: dict[str, float] = {}
    std: dict[str, float] = {}
    skipped: dict[str, int] = {}
    for name in STAT_FIELDS:
        vals = [d.values[name] for d in deviations if name in d.values]
        missing = len(deviations) - len(vals)
        if missing:
            skipped[name] = missing
        if vals:
            mean[name] = float(np.mean(vals))
            std[name] = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
    return EvalReport(observed=observed_stats, reports=reports,
                      deviations=deviations, mean=mean, std=std,
                      skipped=skipped, elapsed_s=elapsed_s, label=label)


def construction_eval(observed: Graph, policy: GaussianEdgePolicy,
                      encoder: StateEncoder, env_config: EnvConfig,
                      samples: int = 3, edge_budget_multiple: float = 2.0,
                      seed: int = 0, deterministic: bool = False,
                      label: str = "") -> EvalReport:
    """Generate ``samples`` graphs on the observed node set and score them."""
    if observed.num_edges < 1:
        raise ValueError("observed graph needs at least one edge")
    check_graph(observed)
    started = time.perf_counter()
    obs_stats = compute_stats(observed)
    reports = []
    for i in range(samples):
        torch_gen = torch.Generator().manual_seed(seed * 100003 + i)
        g = generate_graph(observed, policy, encoder, env_config,
                           edge_budget_multiple, observed.num_edges,
                           torch_gen=torch_gen, deterministic=deterministic)
        reports.append(compute_stats(g))
    return summarize_deviations(obs_stats, reports,
                                elapsed_s=time.perf_counter() - started,
                                label=label)


def format_deviation_table(rows: list[tuple[str, EvalReport]]) -> str:
    """Tab-separated table: rows = runs, columns = statistics, cells mean ± std."""
    header = "model\t" + "\t".join(STAT_FIELDS)
    lines = [header]
    if rows:
        observed = rows[0][1].observed
        cells = [
            "undefined" if getattr(observed, name) is None else str(getattr(observed, name))
            for name in STAT_FIELDS
        ]
        lines.append("observed\t" + "\t".join(cells))
    for label, report in rows:
        lines.append(label + "\t" + "\t".join(report.cell(n) for n in STAT_FIELDS))
    return "\n".join(lines) + "\n"


@dataclass
class LinkPredSplit:
    train_graph: Graph
    positives: list[tuple[int, int]]
    negatives: list[tuple[int, int]]
    seed: int = 0
    test_frac: float = 0.1


def linkpred_split(g: Graph, test_frac: float = 0.1, seed: int = 0) -> LinkPredSplit:
    """Hold out a fraction of edges plus an equal number of non-edges."""
    if not 0.0 <= test_frac < 1.0:
        raise ValueError(f"test_frac must lie in [0, 1), got {test_frac}")
    rng = np.random.default_rng(seed)
    edges = g.edges
    m = len(edges)
    k = int(np.floor(test_frac * m))
    total_pairs = g.n * (g.n - 1) // 2
    if total_pairs - m < k:
        raise ValueError("graph too dense to sample that many negatives")

    held_idx = set(rng.choice(m, size=k, replace=False).tolist()) if k else set()
    positives = [edges[i] for i in sorted(held_idx)]
    train = Graph(g.n)
    train.features = None if g.features is None else g.features.copy()
    for i, (u, v) in enumerate(edges):
        if i not in held_idx:
            train.add_edge(u, v, g.edge_type(u, v))

    negatives: list[tuple[int, int]] = []
    chosen: set[tuple[int, int]] = set()
    attempts = 0
    limit = max(1000, 200 * k)
    while len(negatives) < k:
        attempts += 1
        if attempts > limit:
            raise ValueError("negative sampling failed; graph too dense")
        u = int(rng.integers(g.n))
        v = int(rng.integers(g.n))
        if u == v:
            continue
        key = canonical_edge(u, v)
        if key in chosen or g.has_edge(*key):
            continue
        chosen.add(key)
        negatives.append(key)
    return LinkPredSplit(train_graph=train, positives=positives,
                         negatives=negatives, seed=seed, test_frac=test_frac)


def score_candidates(split: LinkPredSplit, mode: str, encoder: StateEncoder,
                     policy: GaussianEdgePolicy | None = None,
                     env_config: EnvConfig | None = None,
                     torch_gen: torch.Generator | None = None
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Score held-out positives and sampled negatives.

    embed mode: inner product of the trained node embeddings of the train
    graph. policy mode: start an episode from the train graph and roll out;
    a candidate created as the r-th new edge scores 1/r, uncreated
    candidates score 0.
    """
    candidates = list(split.positives) + list(split.negatives)
    labels = np.array([1] * len(split.positives) + [0] * len(split.negatives))
    train = split.train_graph
    if mode == "embed":
        Z = encoder.encode(train.features, train.edge_array()).numpy()
        scores = np.array([float(Z[u] @ Z[v]) for u, v in candidates])
        return scores, labels
    if mode != "policy":
        raise ValueError(f"unknown mode {mode!r}")
    if policy is None or env_config is None:
        raise ValueError("policy mode needs a policy and an env config")

    env = GraphBuildEnv(train.without_edges(), encoder, env_config)
    state = env.reset(initial_edges=train.edge_array())
    dtype = next(policy.parameters()).dtype
    creation_rank: dict[tuple[int, int], int] = {}
    rank = 0
    while True:
        s = torch.from_numpy(state.pooled).to(dtype)
        with torch.no_grad():
            action = policy.sample(s, generator=torch_gen)
        v1, v2 = select_nodes(action, state.Z)
        _, event, terminal = env.step(v1, v2, action.concat().numpy())
        if event == "new":
            rank += 1
            creation_rank[canonical_edge(v1, v2)] = rank
        if terminal:
            break
    scores = np.array([
        1.0 / creation_rank[c] if c in creation_rank else 0.0 for c in candidates
    ])
    return scores, labels


def binary_metrics(scores, labels) -> tuple[float, float]:
    """ROC AUC with midrank tie handling and step-interpolated average precision."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative label")

    ranks = _midranks(scores)
    auc = (ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    # precision-recall steps over descending unique thresholds
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    ap = 0.0
    tp = fp = 0
    prev_recall = 0.0
    i = 0
    while i < scores.size:
        j = i
        while j < scores.size and sorted_scores[j] == sorted_scores[i]:
            j += 1
        tp += int(sorted_labels[i:j].sum())
        fp += (j - i) - int(sorted_labels[i:j].sum())
        recall = tp / n_pos
        precision = tp / (tp + fp)
        ap += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return float(auc), float(ap)


def _midranks(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    i = 0
    while i < scores.size:
        j = i
        while j < scores.size and scores[order[j]] == scores[order[i]]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + 1 + j)  # average of ranks i+1 .. j
        i = j
    return ranks
