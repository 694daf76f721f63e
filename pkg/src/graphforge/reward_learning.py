"""Latent reward over pooled states, trained by maximum-entropy inverse
optimal control.

Measured trajectories are built by replaying the observed graph's edges in
random permutation order; generated trajectories come from policy rollouts.
The reward is pushed up on measured returns and down on a softmax of
generated returns, with an L1 penalty on generated return magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .encoder import StateEncoder, pooled_prefix_states
from .graph import Graph
from .nets import mlp

WEIGHT_MODES = ("uniform", "importance")


class RewardNet(nn.Module):
    """Two-layer perceptron mapping a pooled state to a scalar reward."""

    def __init__(self, embed_dim: int, hidden: int = 256):
        super().__init__()
        self.net = mlp(embed_dim, 1, hidden)

    def forward(self, states: torch.Tensor) -> torch.Tensor:
        single = states.ndim == 1
        out = self.net(states.unsqueeze(0) if single else states).squeeze(-1)
        return out.squeeze(0) if single else out

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {
            f"reward.{name}": t.detach().numpy()
            for name, t in self.state_dict().items()
        }


@dataclass
class Trajectory:
    """Ordered pooled states of one construction episode."""

    states: np.ndarray                   # (T+1, d) float32
    policy_log_prob: float | None = None  # generated trajectories only
    source: str = "generated"

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float32)
        if self.states.ndim != 2 or self.states.shape[0] < 1:
            raise ValueError(f"states must be (T+1, d), got {self.states.shape}")
        if self.source not in ("measured", "generated"):
            raise ValueError(f"unknown source {self.source!r}")
        if self.source == "measured" and self.policy_log_prob is not None:
            raise ValueError("measured trajectories carry no policy log-prob")

    def __len__(self) -> int:
        return self.states.shape[0]


def trajectory_return(traj: Trajectory, net: RewardNet) -> torch.Tensor:
    """Sum of per-state rewards along the trajectory."""
    dtype = next(net.parameters()).dtype
    return net(torch.from_numpy(traj.states).to(dtype)).sum()


def batched_returns(trajs: list[Trajectory], net: RewardNet) -> torch.Tensor:
    """Per-trajectory returns in one reward forward pass."""
    dtype = next(net.parameters()).dtype
    stacked = torch.from_numpy(
        np.concatenate([t.states for t in trajs], axis=0)
    ).to(dtype)
    rewards = net(stacked)
    lengths = [len(t) for t in trajs]
    index = torch.repeat_interleave(
        torch.arange(len(trajs)), torch.tensor(lengths)
    )
    out = torch.zeros(len(trajs), dtype=rewards.dtype)
    return out.index_add(0, index, rewards)


def expert_trajectories(observed: Graph, encoder: StateEncoder, count: int,
                        rng: np.random.Generator,
                        features: np.ndarray | None = None) -> list[Trajectory]:
    """Measured trajectories from random permutations of the observed edges.

    Every trajectory starts at the empty edge set and ends at the full
    observed graph; the pooled state is recorded after each edge addition.
    """
    if observed.num_edges < 1:
        raise ValueError("observed graph needs at least one edge")
    feats = features if features is not None else observed.features
    if feats is None:
        raise ValueError("observed graph has no node features")
    edges = observed.edge_array()
    out = []
    for _ in range(count):
        order = rng.permutation(len(edges))
        states = pooled_prefix_states(encoder, feats, edges[order])
        out.append(Trajectory(states=states, source="measured"))
    return out


def ioc_loss(measured: list[Trajectory], generated: list[Trajectory],
             net: RewardNet, l1_coeff: float = 0.0,
             weight_mode: str = "uniform") -> torch.Tensor:
    """Inverse optimal control objective.

    ``-mean measured return + log(mean weighted exp generated return)``,
    plus ``l1_coeff`` times the mean absolute generated return. Importance
    mode weights each generated trajectory by softmax(-policy log prob);
    uniform mode weights them equally.
    """
    if not measured or not generated:
        raise ValueError("both trajectory pools must be nonempty")
    if weight_mode not in WEIGHT_MODES:
        raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")
    r_meas = batched_returns(measured, net)
    r_gen = batched_returns(generated, net)
    m = len(generated)
    if weight_mode == "importance":
        lps = [t.policy_log_prob for t in generated]
        if any(lp is None for lp in lps):
            raise ValueError("importance weighting needs policy log-probs")
        log_z = torch.log_softmax(
            -torch.tensor(lps, dtype=r_gen.dtype), dim=0
        )
    else:
        log_z = torch.zeros(m, dtype=r_gen.dtype)
    loss = (
        -r_meas.mean()
        + torch.logsumexp(r_gen + log_z, dim=0)
        - math.log(m)
        + l1_coeff * r_gen.abs().mean()
    )
    if not torch.isfinite(loss):
        raise RuntimeError("inverse reward objective is non-finite")
    return loss


def sample_pool(pool: list[Trajectory], k: int,
                rng: np.random.Generator) -> list[Trajectory]:
    """k draws, without replacement when the pool is large enough."""
    if not pool:
        raise ValueError("empty trajectory pool")
    replace = len(pool) < k
    idx = rng.choice(len(pool), size=k, replace=replace)
    return [pool[i] for i in idx]


def reward_update(measured_pool: list[Trajectory], generated_pool: list[Trajectory],
                  net: RewardNet, optimizer: torch.optim.Optimizer,
                  iterations: int, meas_samples: int, gen_samples: int,
                  l1_coeff: float, rng: np.random.Generator,
                  weight_mode: str = "uniform") -> dict:
    """Run ``iterations`` sampled gradient steps on the reward objective."""
    losses = []
    for _ in range(iterations):
        meas = sample_pool(measured_pool, meas_samples, rng)
        gen = sample_pool(generated_pool, gen_samples, rng)
        loss = ioc_loss(meas, gen, net, l1_coeff=l1_coeff, weight_mode=weight_mode)
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()
        value = float(loss.item())
        if not math.isfinite(value):
            raise RuntimeError("reward update diverged")
        losses.append(value)
    return {"J_R": losses[-1] if losses else float("nan"),
            "J_R_mean": float(np.mean(losses)) if losses else float("nan")}
