"""Scikit-learn style facade over the training pipeline.

``GraphForge`` fits on a single observed graph (a Graph or an (m, 2) edge
array) and afterwards samples new graphs on the same or a different node set
and scores candidate edges by embedding similarity. Hyperparameters mirror
the training configuration so instances clone and grid-search cleanly.
"""

from __future__ import annotations

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .config import TrainConfig
from .evaluation import EvalReport, construction_eval, generate_graph
from .graph import Graph
from .training import Trainer, attach_features
from .validation import as_graph


class GraphForge(BaseEstimator):
    """Learn a graph construction policy from one observed graph.

    Parameters default to the paper-scale configuration; pass
    ``preset="desk"`` for minutes-scale training on small graphs.
    """

    def __init__(self, preset: str | None = None, num_epochs: int | None = None,
                 num_steps_per_epoch: int | None = None,
                 max_path_length: int | None = None,
                 term_threshold: int | None = None,
                 batch_size: int | None = None,
                 replay_buffer_size: int | None = None,
                 n_embed_size: int | None = None, net_size: int | None = None,
                 prop_rounds: int | None = None, discount: float | None = None,
                 policy_lr: float | None = None, qf_lr: float | None = None,
                 value_lr: float | None = None, emb_lr: float | None = None,
                 reward_lr: float | None = None, reward_iter: int | None = None,
                 meas_samples: int | None = None, gen_samples: int | None = None,
                 gen_from_policy: int | None = None, l1_coeff: float | None = None,
                 soft_target_tau: float | None = None,
                 num_steps_before_training_online: int | None = None,
                 use_automatic_entropy_tuning: bool | None = None,
                 edge_budget_multiple: float | None = None,
                 eval_deterministic: bool | None = None,
                 seed: int = 0):
        self.preset = preset
        self.num_epochs = num_epochs
        self.num_steps_per_epoch = num_steps_per_epoch
        self.max_path_length = max_path_length
        self.term_threshold = term_threshold
        self.batch_size = batch_size
        self.replay_buffer_size = replay_buffer_size
        self.n_embed_size = n_embed_size
        self.net_size = net_size
        self.prop_rounds = prop_rounds
        self.discount = discount
        self.policy_lr = policy_lr
        self.qf_lr = qf_lr
        self.value_lr = value_lr
        self.emb_lr = emb_lr
        self.reward_lr = reward_lr
        self.reward_iter = reward_iter
        self.meas_samples = meas_samples
        self.gen_samples = gen_samples
        self.gen_from_policy = gen_from_policy
        self.l1_coeff = l1_coeff
        self.soft_target_tau = soft_target_tau
        self.num_steps_before_training_online = num_steps_before_training_online
        self.use_automatic_entropy_tuning = use_automatic_entropy_tuning
        self.edge_budget_multiple = edge_budget_multiple
        self.eval_deterministic = eval_deterministic
        self.seed = seed

    # -- configuration -----------------------------------------------------

    def build_config(self) -> TrainConfig:
        if self.preset is None or self.preset == "paper":
            config = TrainConfig()
        elif self.preset == "desk":
            config = TrainConfig.desk_preset()
        else:
            raise ValueError(f"unknown preset {self.preset!r}")
        overrides = {
            name: getattr(self, name)
            for name in (
                "num_epochs", "num_steps_per_epoch", "max_path_length",
                "term_threshold", "batch_size", "replay_buffer_size",
                "n_embed_size", "net_size", "prop_rounds", "discount",
                "policy_lr", "qf_lr", "value_lr", "emb_lr", "reward_lr",
                "reward_iter", "meas_samples", "gen_samples", "gen_from_policy",
                "l1_coeff", "soft_target_tau",
                "num_steps_before_training_online",
                "use_automatic_entropy_tuning", "edge_budget_multiple",
                "eval_deterministic",
            )
            if getattr(self, name) is not None
        }
        overrides["seed"] = self.seed
        return config.replace(**overrides).validate()

    # -- estimator API -------------------------------------------------------

    def fit(self, X, y=None) -> "GraphForge":
        """Train on one observed graph (Graph or (m, 2) edge array)."""
        observed = as_graph(X)
        config = self.build_config()
        trainer = Trainer(config, observed)
        self.model_ = trainer.run()
        self.observed_graph_ = trainer.observed
        self.config_ = config
        return self

    def sample(self, n_samples: int = 1, node_graph: Graph | None = None,
               seed: int | None = None) -> list[Graph]:
        """Generate graphs with the trained policy.

        ``node_graph`` defaults to the training node set; a different graph
        (used for node count and features only) enables size transfer.
        """
        check_is_fitted(self, "model_")
        base = node_graph if node_graph is not None else self.observed_graph_
        base = attach_features(base.copy(), self.config_)
        reference = (
            node_graph.num_edges if node_graph is not None and node_graph.num_edges
            else self.observed_graph_.num_edges
        )
        seed = self.seed if seed is None else seed
        out = []
        for i in range(n_samples):
            gen = torch.Generator().manual_seed(seed * 100003 + i)
            out.append(generate_graph(
                base, self.model_.policy, self.model_.encoder,
                self.model_.env_config(), self.config_.edge_budget_multiple,
                reference, torch_gen=gen,
                deterministic=self.config_.eval_deterministic,
            ))
        return out

    def score_edges(self, pairs) -> np.ndarray:
        """Embedding-similarity scores for candidate (u, v) pairs."""
        check_is_fitted(self, "model_")
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        g = self.observed_graph_
        Z = self.model_.encoder.encode(g.features, g.edge_array()).numpy()
        return np.array([float(Z[u] @ Z[v]) for u, v in pairs])

    def construction_report(self, samples: int = 3, seed: int | None = None) -> EvalReport:
        """Percent-deviation report of generated graphs vs the training graph."""
        check_is_fitted(self, "model_")
        return construction_eval(
            self.observed_graph_, self.model_.policy, self.model_.encoder,
            self.model_.env_config(), samples=samples,
            edge_budget_multiple=self.config_.edge_budget_multiple,
            seed=self.seed if seed is None else seed,
            deterministic=self.config_.eval_deterministic,
        )
