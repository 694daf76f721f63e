import numpy as np
import pytest
import torch

from graphforge import (
    EnvConfig,
    GaussianEdgePolicy,
    Graph,
    StateEncoder,
    binary_metrics,
    compute_stats,
    construction_eval,
    gen_barabasi_albert,
    generate_graph,
    linkpred_split,
    score_candidates,
)
from graphforge.evaluation import (
    format_deviation_table,
    generate_uniform_random,
    summarize_deviations,
)
from graphforge.policy import Action
from oracles import pair_count_auc, step_ap


# -- scripted replay machinery: drives the harness with a known-good policy --

class OneHotEncoder:
    """Identity embeddings so action vectors can address nodes directly."""

    def __init__(self, n):
        self.embed_dim = n
        self._eye = torch.eye(n)

    def encode(self, features, edges):
        return self._eye

    def parameters(self):
        yield self._eye


class ReplayPolicy:
    """Emits actions whose argmax picks a scripted edge list in order."""

    def __init__(self, edges, n):
        self.edges = list(edges)
        self.n = n
        self.cursor = 0
        self._param = torch.zeros(1)

    def parameters(self):
        yield self._param

    def sample(self, state, noise=None, generator=None):
        u, v = self.edges[self.cursor % len(self.edges)]
        self.cursor += 1
        a1 = torch.zeros(self.n)
        a2 = torch.zeros(self.n)
        a1[u] = 1.0
        a2[v] = 1.0
        return Action(a1=a1, a2=a2, log_prob=torch.tensor(0.0))


def trained_pair(n=12, seed=0):
    torch.manual_seed(seed)
    encoder = StateEncoder(in_features=2, embed_dim=4, hidden=8, rounds=2)
    policy = GaussianEdgePolicy(4, hidden=8)
    return encoder, policy


def featured(g):
    rng = np.random.default_rng(0)
    g = g.copy()
    g.set_features(rng.normal(size=(g.n, 2)).astype(np.float32))
    return g


# -- generation -------------------------------------------------------------


def test_generate_zero_budget_gives_empty_graph():
    g = featured(gen_barabasi_albert(12, 2, seed=0))
    encoder, policy = trained_pair()
    out = generate_graph(g, policy, encoder, EnvConfig(k_repeat=2, max_path_length=20),
                         edge_budget_multiple=0.0, reference_edges=g.num_edges)
    assert out.num_edges == 0


def test_generate_deterministic_given_seed():
    g = featured(gen_barabasi_albert(12, 2, seed=1))
    encoder, policy = trained_pair(seed=1)
    cfg = EnvConfig(k_repeat=2, max_path_length=40)
    a = generate_graph(g, policy, encoder, cfg, 1.0, g.num_edges,
                       torch_gen=torch.Generator().manual_seed(9))
    b = generate_graph(g, policy, encoder, cfg, 1.0, g.num_edges,
                       torch_gen=torch.Generator().manual_seed(9))
    assert a.edges == b.edges


def test_generate_stochastic_rollouts_differ():
    g = featured(gen_barabasi_albert(15, 2, seed=2))
    encoder, policy = trained_pair(seed=2)
    cfg = EnvConfig(k_repeat=3, max_path_length=60)
    graphs = [
        generate_graph(g, policy, encoder, cfg, 1.0, g.num_edges,
                       torch_gen=torch.Generator().manual_seed(s))
        for s in range(3)
    ]
    for i in range(3):
        for j in range(i + 1, 3):
            a = set(graphs[i].edges)
            b = set(graphs[j].edges)
            jaccard = len(a & b) / max(1, len(a | b))
            assert jaccard < 1.0
    for h in graphs:
        for u, v in h.edges:
            assert u != v  # no self-loops can materialize


def test_generate_respects_budget():
    g = featured(gen_barabasi_albert(12, 2, seed=3))
    encoder, policy = trained_pair(seed=3)
    cfg = EnvConfig(k_repeat=100, max_path_length=1000)
    out = generate_graph(g, policy, encoder, cfg, 0.5, g.num_edges,
                         torch_gen=torch.Generator().manual_seed(0))
    assert out.num_edges <= int(np.ceil(0.5 * g.num_edges))


# -- construction eval --------------------------------------------------------


def test_replay_oracle_has_zero_deviation():
    observed = featured(gen_barabasi_albert(14, 2, seed=4))
    n = observed.n
    policy = ReplayPolicy(observed.edges, n)
    encoder = OneHotEncoder(n)
    report = construction_eval(observed, policy, encoder,
                               EnvConfig(k_repeat=5, max_path_length=10_000),
                               samples=3, edge_budget_multiple=1.0, seed=0)
    for name, value in report.mean.items():
        assert value == pytest.approx(0.0), name
    assert len(report.reports) == 3


def test_uniform_random_is_worse_than_replay_oracle():
    observed = featured(gen_barabasi_albert(40, 3, seed=5))
    obs_stats = compute_stats(observed)
    rng = np.random.default_rng(0)
    reports = [
        compute_stats(generate_uniform_random(
            observed, EnvConfig(k_repeat=5, max_path_length=10_000),
            1.0, observed.num_edges, rng))
        for _ in range(3)
    ]
    random_report = summarize_deviations(obs_stats, reports)
    assert random_report.mean["triangle_count"] > 0.0
    assert random_report.mean["max_degree"] > 0.0


def test_construction_eval_validates_input():
    encoder, policy = trained_pair()
    with pytest.raises(ValueError):
        construction_eval(featured(Graph(5)), policy, encoder,
                          EnvConfig(k_repeat=1, max_path_length=5))


def test_format_deviation_table():
    observed = featured(gen_barabasi_albert(14, 2, seed=6))
    policy = ReplayPolicy(observed.edges, observed.n)
    report = construction_eval(observed, policy, OneHotEncoder(observed.n),
                               EnvConfig(k_repeat=5, max_path_length=10_000),
                               samples=2, edge_budget_multiple=1.0, seed=0)
    table = format_deviation_table([("replay", report)])
    lines = table.strip().splitlines()
    assert lines[0].split("\t")[0] == "model"
    assert lines[1].startswith("observed\t")
    assert lines[2].startswith("replay\t")
    assert "±" in lines[2]


# -- link prediction ----------------------------------------------------------


def test_linkpred_split_counts_and_disjointness():
    g = gen_barabasi_albert(30, 3, seed=7)  # 81 edges
    split = linkpred_split(g, test_frac=0.1, seed=0)
    assert len(split.positives) == 8
    assert len(split.negatives) == 8
    assert split.train_graph.num_edges == g.num_edges - 8
    train_edges = set(split.train_graph.edges)
    original = set(g.edges)
    for e in split.positives:
        assert e in original and e not in train_edges
    for e in split.negatives:
        assert e not in original
    assert not (set(split.positives) & set(split.negatives))
    again = linkpred_split(g, test_frac=0.1, seed=0)
    assert again.positives == split.positives and again.negatives == split.negatives


def test_linkpred_split_zero_frac_and_density_guard():
    g = gen_barabasi_albert(10, 2, seed=8)
    split = linkpred_split(g, test_frac=0.0, seed=0)
    assert split.positives == [] and split.negatives == []
    k5 = Graph(5, edges=[(u, v) for u in range(5) for v in range(u + 1, 5)])
    with pytest.raises(ValueError):
        linkpred_split(k5, test_frac=0.5, seed=0)
    with pytest.raises(ValueError):
        linkpred_split(g, test_frac=1.0, seed=0)


def test_embed_scores_with_identical_embeddings_are_chance():
    g = featured(gen_barabasi_albert(20, 2, seed=9))
    split = linkpred_split(g, test_frac=0.2, seed=1)
    split.train_graph.set_features(np.ones((g.n, 2), dtype=np.float32))

    class ConstantEncoder:
        embed_dim = 3

        def encode(self, features, edges):
            return torch.ones(g.n, 3)

    scores, labels = score_candidates(split, "embed", ConstantEncoder())
    auc, ap = binary_metrics(scores, labels)
    assert auc == pytest.approx(0.5)


def test_embed_scores_beat_chance_on_planted_partition():
    # two dense blocks; an eigenvector embedding must separate them
    rng = np.random.default_rng(3)
    n = 40
    g = Graph(n)
    for u in range(n):
        for v in range(u + 1, n):
            same = (u < n // 2) == (v < n // 2)
            p = 0.6 if same else 0.02
            if rng.random() < p:
                g.add_edge(u, v)
    g.set_features(np.ones((n, 1), dtype=np.float32))
    split = linkpred_split(g, test_frac=0.1, seed=4)

    class SpectralEncoder:
        """Oracle embedding: leading adjacency eigenvectors of the train graph."""

        embed_dim = 2

        def encode(self, features, edges):
            A = np.zeros((n, n))
            for u, v in np.asarray(edges).reshape(-1, 2):
                A[u, v] = A[v, u] = 1.0
            vals, vecs = np.linalg.eigh(A)
            idx = np.argsort(vals)[-2:]
            top = vecs[:, idx] * np.sqrt(np.maximum(vals[idx], 0.0))
            return torch.tensor(top, dtype=torch.float32)

    scores, labels = score_candidates(split, "embed", SpectralEncoder())
    auc, _ = binary_metrics(scores, labels)
    assert auc > 0.8


def test_policy_mode_reciprocal_rank_scores():
    g = featured(gen_barabasi_albert(12, 2, seed=11))
    split = linkpred_split(g, test_frac=0.2, seed=3)
    # script the policy to create exactly the held-out positives, then stall
    filler = [(0, 1)] * 500
    policy = ReplayPolicy(list(split.positives) + filler, g.n)
    split.train_graph.set_features(g.features)
    scores, labels = score_candidates(
        split, "policy", OneHotEncoder(g.n), policy=policy,
        env_config=EnvConfig(k_repeat=2, max_path_length=60),
    )
    auc, ap = binary_metrics(scores, labels)
    assert auc == 1.0 and ap == 1.0
    pos_scores = scores[labels == 1]
    expected = 1.0 / np.arange(1, len(pos_scores) + 1)
    np.testing.assert_allclose(np.sort(pos_scores)[::-1], expected)
    assert np.all(scores[labels == 0] == 0.0)


def test_score_candidates_validation():
    g = featured(gen_barabasi_albert(10, 2, seed=12))
    split = linkpred_split(g, test_frac=0.1, seed=0)
    with pytest.raises(ValueError):
        score_candidates(split, "bogus", OneHotEncoder(g.n))
    with pytest.raises(ValueError):
        score_candidates(split, "policy", OneHotEncoder(g.n))


# -- binary metrics -----------------------------------------------------------


def test_binary_metrics_perfect_and_chance():
    scores = np.array([0.9, 0.8, 0.2, 0.1])
    labels = np.array([1, 1, 0, 0])
    auc, ap = binary_metrics(scores, labels)
    assert auc == 1.0 and ap == 1.0
    flat = binary_metrics(np.ones(6), np.array([1, 0, 1, 0, 1, 0]))
    assert flat[0] == pytest.approx(0.5)
    assert flat[1] == pytest.approx(0.5)


def test_binary_metrics_six_item_hand_case():
    scores = np.array([0.9, 0.7, 0.7, 0.4, 0.3, 0.1])
    labels = np.array([1, 0, 1, 1, 0, 0])
    auc, ap = binary_metrics(scores, labels)
    assert auc == pytest.approx(pair_count_auc(scores, labels))
    assert ap == pytest.approx(step_ap(scores, labels))


def test_binary_metrics_match_pair_oracle_on_random_inputs():
    rng = np.random.default_rng(13)
    for _ in range(200):
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, size=n)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        # quantized scores force plenty of ties
        scores = np.round(rng.random(n) * 4) / 4
        auc, ap = binary_metrics(scores, labels)
        assert auc == pytest.approx(pair_count_auc(scores, labels), abs=1e-12)
        assert ap == pytest.approx(step_ap(scores, labels), abs=1e-12)


def test_binary_metrics_validation():
    with pytest.raises(ValueError):
        binary_metrics([1.0, 2.0], [1, 1])
    with pytest.raises(ValueError):
        binary_metrics([1.0], [2])
    with pytest.raises(ValueError):
        binary_metrics([1.0, 2.0], [1])
