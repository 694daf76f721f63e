"""Top-level training loop wiring the environment, actor-critic, and reward.

Each epoch starts from the empty edge set. Every environment step samples an
action, maps it to a node pair, advances the environment, pushes a replay
transition, and (past the warm-up) takes one gradient step on all policy-side
parameters. Completed episodes append their pooled-state trajectories to the
generated pool; at every epoch boundary fresh measured trajectories are drawn
from the observed graph and the reward network is updated against the two
pools.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .actor_critic import SoftActorCritic, TrainingDiverged
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .datasets import DatasetSpec, degree_bucket_features
from .encoder import StateEncoder
from .env import EnvConfig, GraphBuildEnv, ReplayBuffer
from .evaluation import EvalReport, construction_eval
from .graph import Graph
from .policy import GaussianEdgePolicy, select_nodes
from .reward_learning import RewardNet, Trajectory, expert_trajectories, reward_update

LOG_HEADER = "epoch\tstep\tJ_Q\tJ_V\tJ_pi\tJ_R\talpha\tepisode_len\tnum_edges"


@dataclass
class TrainedModel:
    """Everything a trained run produces, minus the on-disk artifacts."""

    config: TrainConfig
    observed: Graph
    encoder: StateEncoder
    policy: GaussianEdgePolicy
    learner: SoftActorCritic
    reward: RewardNet

    def env_config(self) -> EnvConfig:
        return EnvConfig(
            k_repeat=self.config.term_threshold,
            max_path_length=self.config.max_path_length,
            seed=self.config.seed,
        )

    def reward_fn(self):
        net = self.reward
        dtype = next(net.parameters()).dtype

        def fn(pooled: np.ndarray) -> float:
            with torch.no_grad():
                return float(net(torch.from_numpy(pooled).to(dtype)).item())

        return fn

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays: dict[str, np.ndarray] = {}
        for prefix, module in (("encoder", self.encoder), ("policy", self.policy)):
            for name, tensor in module.state_dict().items():
                arrays[f"{prefix}.{name}"] = tensor.detach().numpy()
        arrays.update(self.learner.state_arrays())
        arrays.update(self.reward.state_arrays())
        return arrays

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        groups: dict[str, dict[str, torch.Tensor]] = {}
        for name, arr in arrays.items():
            if name == "log_alpha":
                with torch.no_grad():
                    self.learner.log_alpha.copy_(torch.from_numpy(np.asarray(arr)).reshape(1))
                continue
            prefix, _, rest = name.partition(".")
            groups.setdefault(prefix, {})[rest] = torch.from_numpy(np.asarray(arr))
        modules = {
            "encoder": self.encoder, "policy": self.policy, "reward": self.reward,
            **self.learner.named_modules_for_checkpoint(),
        }
        for prefix, state in groups.items():
            if prefix not in modules:
                raise KeyError(f"unknown parameter group {prefix!r}")
            modules[prefix].load_state_dict(state)


def attach_features(graph: Graph, config: TrainConfig) -> Graph:
    if graph.features is None:
        graph.set_features(degree_bucket_features(graph, config.feature_buckets))
    return graph


def load_observed(config: TrainConfig) -> Graph:
    spec = DatasetSpec.parse(
        config.dataset, feature_path=config.feature_path or None,
        seed=config.seed, one_indexed=config.one_indexed,
    )
    return attach_features(spec.load(), config)


def build_model(config: TrainConfig, observed: Graph) -> TrainedModel:
    """Seeded construction of all networks for a run."""
    config.validate()
    attach_features(observed, config)
    torch.manual_seed(config.seed)
    encoder = StateEncoder(
        in_features=observed.features.shape[1],
        embed_dim=config.n_embed_size,
        hidden=config.net_size,
        rounds=config.prop_rounds,
    )
    policy = GaussianEdgePolicy(config.n_embed_size, hidden=config.net_size)
    learner = SoftActorCritic(
        policy, encoder, embed_dim=config.n_embed_size, hidden=config.net_size,
        discount=config.discount, tau=config.soft_target_tau,
        policy_lr=config.policy_lr, qf_lr=config.qf_lr,
        value_lr=config.value_lr, emb_lr=config.emb_lr,
        alpha_lr=config.alpha_lr,
        target_entropy=config.resolved_target_entropy(),
        auto_entropy=config.use_automatic_entropy_tuning,
    )
    reward = RewardNet(config.n_embed_size, hidden=config.net_size)
    return TrainedModel(config=config, observed=observed, encoder=encoder,
                        policy=policy, learner=learner, reward=reward)


class Trainer:
    def __init__(self, config: TrainConfig, observed: Graph,
                 run_dir: Path | str | None = None,
                 freeze_reward: bool = False,
                 model: TrainedModel | None = None):
        self.config = config.validate()
        self.observed = attach_features(observed, config)
        if self.observed.num_edges < 1:
            raise ValueError("training needs an observed graph with edges")
        self.run_dir = Path(run_dir) if run_dir is not None else None
        self.freeze_reward = freeze_reward
        self.model = model if model is not None else build_model(config, self.observed)
        self.np_rng = np.random.default_rng(config.seed)
        self.torch_gen = torch.Generator().manual_seed(config.seed)
        self.reward_opt = torch.optim.Adam(
            self.model.reward.parameters(), lr=config.reward_lr
        )
        self._log_rows: list[str] = []
        self._event_lines: list[str] = []
        self._last_checkpoint: Path | None = None

    # -- file plumbing ---------------------------------------------------

    def _init_run_dir(self) -> None:
        if self.run_dir is None:
            return
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.config.write(self.run_dir / "config.txt")
        (self.run_dir / "log.tsv").write_text(LOG_HEADER + "\n", encoding="utf-8")
        if self.config.log_events:
            (self.run_dir / "events.tsv").write_text("", encoding="utf-8")

    def _flush_logs(self) -> None:
        if self.run_dir is None:
            self._log_rows.clear()
            self._event_lines.clear()
            return
        if self._log_rows:
            with open(self.run_dir / "log.tsv", "a", encoding="utf-8") as fh:
                fh.write("\n".join(self._log_rows) + "\n")
            self._log_rows.clear()
        if self._event_lines and self.config.log_events:
            with open(self.run_dir / "events.tsv", "a", encoding="utf-8") as fh:
                fh.write("\n".join(self._event_lines) + "\n")
            self._event_lines.clear()

    def _save_checkpoint(self, name: str, epoch: int) -> Path | None:
        if self.run_dir is None:
            return None
        path = save_checkpoint(
            self.run_dir / name, self.model.state_arrays(), epoch,
            self.config.content_hash(),
        )
        self._last_checkpoint = path
        return path

    # -- main loop ---------------------------------------------------------

    def run(self) -> TrainedModel:
        config = self.config
        model = self.model
        self._init_run_dir()
        self._save_checkpoint("checkpoint_init", 0)

        env = GraphBuildEnv(
            self.observed.without_edges(), model.encoder,
            model.env_config(), reward_fn=model.reward_fn(),
        )
        buffer = ReplayBuffer(
            config.replay_buffer_size, state_dim=config.n_embed_size,
            action_dim=2 * config.n_embed_size,
        )
        features_t = torch.from_numpy(self.observed.features).to(
            next(model.encoder.parameters()).dtype
        )
        gen_pool: deque[Trajectory] = deque(maxlen=config.gen_from_policy)
        policy_dtype = next(model.policy.parameters()).dtype

        total_steps = 0
        j_r = float("nan")
        try:
            for epoch in range(config.num_epochs):
                state = env.reset()
                traj_states = [state.pooled.copy()]
                traj_log_prob = 0.0
                completed_lens: list[int] = []
                last_edges = 0
                epoch_metrics: dict[str, list[float]] = {
                    "J_Q": [], "J_V": [], "J_pi": []
                }

                for _ in range(config.num_steps_per_epoch):
                    s = torch.from_numpy(state.pooled).to(policy_dtype)
                    with torch.no_grad():
                        action = model.policy.sample(s, generator=self.torch_gen)
                    v1, v2 = select_nodes(action, state.Z)
                    transition, event, terminal = env.step(
                        v1, v2, action.concat().numpy(),
                        float(action.log_prob.item()),
                    )
                    buffer.push(transition)
                    if config.log_events:
                        self._event_lines.append(
                            f"{state.step_index - 1}\t{v1}\t{v2}\t{event}"
                        )
                    traj_states.append(transition.s_next.copy())
                    traj_log_prob += transition.log_prob
                    total_steps += 1

                    if total_steps >= config.num_steps_before_training_online:
                        batch = buffer.sample(config.batch_size, self.np_rng)
                        if batch is not None:
                            metrics = model.learner.train_step(
                                batch, features_t, self.torch_gen
                            )
                            for key in epoch_metrics:
                                epoch_metrics[key].append(metrics[key])

                    if terminal:
                        completed_lens.append(state.step_index)
                        last_edges = state.graph.num_edges
                        gen_pool.append(Trajectory(
                            states=np.stack(traj_states),
                            policy_log_prob=traj_log_prob,
                            source="generated",
                        ))
                        state = env.reset()
                        traj_states = [state.pooled.copy()]
                        traj_log_prob = 0.0

                # the epoch boundary itself resets the environment; keep the
                # trailing partial trajectory if it saw at least one step
                if len(traj_states) >= 2:
                    last_edges = state.graph.num_edges
                    gen_pool.append(Trajectory(
                        states=np.stack(traj_states),
                        policy_log_prob=traj_log_prob,
                        source="generated",
                    ))

                if not self.freeze_reward:
                    measured = expert_trajectories(
                        self.observed, model.encoder, config.meas_samples,
                        self.np_rng,
                    )
                    r_metrics = reward_update(
                        measured, list(gen_pool), model.reward, self.reward_opt,
                        iterations=config.reward_iter,
                        meas_samples=config.meas_samples,
                        gen_samples=config.gen_samples,
                        l1_coeff=config.l1_coeff, rng=self.np_rng,
                        weight_mode=config.reward_weight_mode,
                    )
                    j_r = r_metrics["J_R"]

                ep_len = (
                    float(np.mean(completed_lens)) if completed_lens
                    else float(state.step_index)
                )
                row = "\t".join([
                    str(epoch), str(total_steps),
                    _fmt(np.mean(epoch_metrics["J_Q"]) if epoch_metrics["J_Q"] else float("nan")),
                    _fmt(np.mean(epoch_metrics["J_V"]) if epoch_metrics["J_V"] else float("nan")),
                    _fmt(np.mean(epoch_metrics["J_pi"]) if epoch_metrics["J_pi"] else float("nan")),
                    _fmt(j_r), _fmt(model.learner.alpha),
                    _fmt(ep_len), str(last_edges),
                ])
                self._log_rows.append(row)
                self._flush_logs()

                if config.checkpoint_every and (epoch + 1) % config.checkpoint_every == 0:
                    self._save_checkpoint(f"checkpoint_ep_{epoch + 1}", epoch + 1)
                if config.eval_every and (epoch + 1) % config.eval_every == 0:
                    self._in_training_eval(epoch + 1)
        except TrainingDiverged as exc:
            exc.checkpoint_path = self._last_checkpoint
            raise

        self._save_checkpoint("checkpoint", config.num_epochs)
        self._flush_logs()
        return model

    def _in_training_eval(self, epoch: int) -> None:
        """Short rollout eval logged beside the run; capped by num_steps_per_eval."""
        cfg = self.config
        env_config = EnvConfig(
            k_repeat=cfg.term_threshold,
            max_path_length=min(cfg.max_path_length, cfg.num_steps_per_eval),
            seed=cfg.seed,
        )
        report = construction_eval(
            self.observed, self.model.policy, self.model.encoder, env_config,
            samples=1, edge_budget_multiple=cfg.edge_budget_multiple,
            seed=cfg.seed + epoch, deterministic=cfg.eval_deterministic,
        )
        if self.run_dir is not None:
            with open(self.run_dir / "eval.tsv", "a", encoding="utf-8") as fh:
                cells = [str(epoch)] + [
                    _fmt(report.mean.get(name, float("nan")))
                    for name in report.observed.as_dict()
                ]
                fh.write("\t".join(cells) + "\n")


def _fmt(value: float) -> str:
    return f"{value:.6g}" if math.isfinite(value) else "nan"


def run_train(config: TrainConfig, run_dir: Path | str,
              observed: Graph | None = None) -> Path:
    """Train per the config and return the run directory."""
    if observed is None:
        observed = load_observed(config)
    trainer = Trainer(config, observed, run_dir=run_dir)
    trainer.run()
    return Path(run_dir)


def load_model(run_dir: Path | str, checkpoint: str = "checkpoint",
               observed: Graph | None = None) -> TrainedModel:
    """Rebuild a TrainedModel from a run directory's frozen config + arrays."""
    run_dir = Path(run_dir)
    config = TrainConfig.from_file(run_dir / "config.txt")
    ckpt = load_checkpoint(run_dir / checkpoint)
    if ckpt.config_hash and ckpt.config_hash != config.content_hash():
        import warnings

        warnings.warn(f"{run_dir}: checkpoint config hash differs from config.txt")
    if observed is None:
        observed = load_observed(config)
    model = build_model(config, observed)
    model.load_state_arrays(ckpt.arrays)
    return model


def transfer_train(source_run: Path | str, target: Graph, config: TrainConfig,
                   run_dir: Path | str | None = None) -> TrainedModel:
    """Retrain everything but the reward on a new node set.

    The reward parameters are loaded from the source run's checkpoint and
    frozen; policy, critics, value, and encoder are re-initialized.
    """
    source_run = Path(source_run)
    ckpt = load_checkpoint(source_run / "checkpoint", prefix="reward.")
    if not ckpt.arrays:
        raise ValueError(f"{source_run}: checkpoint has no reward parameters")
    model = build_model(config, target)
    model.reward.load_state_dict({
        name[len("reward."):]: torch.from_numpy(arr)
        for name, arr in ckpt.arrays.items()
    })
    trainer = Trainer(config, target, run_dir=run_dir, freeze_reward=True,
                      model=model)
    return trainer.run()
