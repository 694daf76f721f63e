"""Run configuration: flat `key = value` text files, one frozen copy per run."""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

# accepted alternate spellings for config keys
KEY_ALIASES = {
    "train_policy_with_reprarameterization": "train_with_reparameterization",
    "train_policy_with_reparameterization": "train_with_reparameterization",
    "k_repeat": "term_threshold",
}


@dataclass
class TrainConfig:
    # outer loop
    num_epochs: int = 10000
    num_steps_per_epoch: int = 500
    num_steps_per_eval: int = 1000
    num_steps_before_training_online: int = 25
    replay_buffer_size: int = 100000
    batch_size: int = 128
    max_path_length: int = 1000
    discount: float = 0.99
    term_threshold: int = 100          # per-edge repeat threshold ending episodes
    # reward learning
    reward_iter: int = 30
    irl_episode_per_train: int = 10
    meas_samples: int = 5
    gen_samples: int = 10
    gen_from_policy: int = 10          # generated trajectories retained
    reward_lr: float = 0.01
    l1_coeff: float = 0.1
    reward_weight_mode: str = "uniform"
    # networks
    prop_rounds: int = 2
    n_embed_size: int = 32
    net_size: int = 256
    # actor-critic
    soft_target_tau: float = 0.001
    policy_lr: float = 1e-4
    qf_lr: float = 1e-3
    value_lr: float = 1e-3
    emb_lr: float = 1e-4
    alpha_lr: float = 1e-4
    train_with_reparameterization: bool = True
    eval_deterministic: bool = False
    use_automatic_entropy_tuning: bool = True
    target_entropy: float = float("nan")  # nan = automatic: -2 * n_embed_size
    # dataset & run plumbing
    dataset: str = "ba:100:4"
    feature_path: str = ""
    feature_buckets: int = 8
    one_indexed: bool = False
    seed: int = 0
    edge_budget_multiple: float = 2.0
    eval_samples: int = 3
    eval_every: int = 0                # epochs between in-training rollout evals
    checkpoint_every: int = 0          # epochs between periodic checkpoints
    log_events: bool = True

    def validate(self) -> "TrainConfig":
        positive = [
            "num_steps_per_epoch", "num_steps_per_eval", "replay_buffer_size",
            "batch_size", "max_path_length", "term_threshold", "reward_iter",
            "irl_episode_per_train", "meas_samples", "gen_samples",
            "gen_from_policy", "prop_rounds", "n_embed_size", "net_size",
            "feature_buckets", "eval_samples",
        ]
        for name in positive:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("num_epochs", "num_steps_before_training_online",
                     "eval_every", "checkpoint_every"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1)")
        if not 0.0 < self.soft_target_tau <= 1.0:
            raise ValueError("soft_target_tau must lie in (0, 1]")
        for name in ("reward_lr", "policy_lr", "qf_lr", "value_lr",
                     "emb_lr", "alpha_lr"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.l1_coeff < 0.0:
            raise ValueError("l1_coeff must be >= 0")
        if self.edge_budget_multiple < 0.0:
            raise ValueError("edge_budget_multiple must be >= 0")
        if not self.train_with_reparameterization:
            raise ValueError(
                "only the reparameterized policy update is implemented"
            )
        if self.reward_weight_mode not in ("uniform", "importance"):
            raise ValueError("reward_weight_mode must be uniform or importance")
        return self

    def resolved_target_entropy(self) -> float:
        if math.isnan(self.target_entropy):
            return -2.0 * self.n_embed_size
        return self.target_entropy

    @classmethod
    def desk_preset(cls, **overrides) -> "TrainConfig":
        """Minutes-scale defaults for graphs of roughly 30-200 nodes."""
        base = dict(
            num_epochs=500,
            num_steps_per_epoch=250,
            num_steps_per_eval=250,
            num_steps_before_training_online=250,
            replay_buffer_size=20000,
            batch_size=64,
            max_path_length=250,
            term_threshold=2,
            n_embed_size=16,
            net_size=64,
            policy_lr=3e-4,
            emb_lr=3e-4,
            alpha_lr=3e-4,
            edge_budget_multiple=1.0,
            checkpoint_every=100,
        )
        base.update(overrides)
        return cls(**base)

    def replace(self, **overrides) -> "TrainConfig":
        return dataclasses.replace(self, **overrides)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.type in ("bool", bool) or isinstance(value, bool):
                rendered = "TRUE" if value else "FALSE"
            elif isinstance(value, float) and math.isnan(value):
                rendered = "auto"
            else:
                rendered = str(value)
            lines.append(f"{f.name} = {rendered}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TrainConfig":
        field_map = {f.name: f for f in dataclasses.fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: expected `key = value`")
            key = key.strip()
            key = KEY_ALIASES.get(key, key)
            if key not in field_map:
                raise ValueError(f"line {lineno}: unknown config key {key!r}")
            values[key] = _parse_value(field_map[key], value.strip(), lineno)
        return cls(**values).validate()

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def write(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _parse_value(field: dataclasses.Field, raw: str, lineno: int):
    kind = field.type if isinstance(field.type, str) else field.type.__name__
    try:
        if kind == "bool":
            lowered = raw.lower()
            if lowered in ("true", "1"):
                return True
            if lowered in ("false", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "int":
            return int(raw)
        if kind == "float":
            if raw.lower() == "auto":
                return float("nan")
            return float(raw)
        return raw
    except ValueError as exc:
        raise ValueError(f"line {lineno}: {field.name}: {exc}") from None
