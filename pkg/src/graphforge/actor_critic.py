"""Maximum-entropy actor-critic updates.

Twin soft Q networks are regressed on a bootstrapped target built from an
exponentially averaged value network; the value network regresses on the
entropy-corrected minimum of the twins; the policy minimizes
``alpha * log pi - min Q`` through reparameterized samples, with gradients
continuing through the pooled state representation into the encoder. The
entropy temperature is tuned automatically against a target entropy.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

from .encoder import StateEncoder, encode_batch
from .env import Batch
from .nets import mlp
from .policy import GaussianEdgePolicy


class TrainingDiverged(RuntimeError):
    """Non-finite loss or parameter; carries the last good checkpoint path."""

    def __init__(self, message: str, checkpoint_path=None):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path


class SoftActorCritic:
    """Owns the critic/value/temperature parameters and all optimizers."""

    def __init__(self, policy: GaussianEdgePolicy, encoder: StateEncoder,
                 embed_dim: int, hidden: int = 256, discount: float = 0.99,
                 tau: float = 0.001, policy_lr: float = 1e-4,
                 qf_lr: float = 1e-3, value_lr: float = 1e-3,
                 emb_lr: float = 1e-4, alpha_lr: float = 1e-4,
                 target_entropy: float | None = None,
                 auto_entropy: bool = True):
        if not 0.0 <= discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {discount}")
        if not 0.0 < tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {tau}")
        self.policy = policy
        self.encoder = encoder
        self.discount = discount
        self.tau = tau
        self.auto_entropy = auto_entropy
        # two independent d-dim action components
        self.target_entropy = (
            float(target_entropy) if target_entropy is not None else -2.0 * embed_dim
        )

        self.q1 = mlp(3 * embed_dim, 1, hidden, n_hidden=2)
        self.q2 = mlp(3 * embed_dim, 1, hidden, n_hidden=2)
        self.value = mlp(embed_dim, 1, hidden, n_hidden=2)
        self.value_target = mlp(embed_dim, 1, hidden, n_hidden=2)
        self.value_target.load_state_dict(self.value.state_dict())
        for p in self.value_target.parameters():
            p.requires_grad_(False)
        self.log_alpha = nn.Parameter(torch.zeros(1))

        self.value_opt = torch.optim.Adam(self.value.parameters(), lr=value_lr)
        self.q_opt = torch.optim.Adam(
            list(self.q1.parameters()) + list(self.q2.parameters()), lr=qf_lr
        )
        self.policy_opt = torch.optim.Adam(policy.parameters(), lr=policy_lr)
        self.emb_opt = torch.optim.Adam(encoder.parameters(), lr=emb_lr)
        self.alpha_opt = torch.optim.Adam([self.log_alpha], lr=alpha_lr)

    @property
    def alpha(self) -> float:
        return float(self.log_alpha.exp().item())

    def q_values(self, s: torch.Tensor, a: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        x = torch.cat([s, a], dim=-1)
        return self.q1(x).squeeze(-1), self.q2(x).squeeze(-1)

    def q_loss(self, s: torch.Tensor, a: torch.Tensor, r: torch.Tensor,
               s_next: torch.Tensor) -> torch.Tensor:
        """Mean Bellman residual over the batch and over both Q nets."""
        with torch.no_grad():
            target = r + self.discount * self.value_target(s_next).squeeze(-1)
        q1, q2 = self.q_values(s, a)
        loss1 = (0.5 * (q1 - target) ** 2).mean()
        loss2 = (0.5 * (q2 - target) ** 2).mean()
        return 0.5 * (loss1 + loss2)

    def value_loss(self, s: torch.Tensor,
                   generator: torch.Generator | None = None,
                   noise: torch.Tensor | None = None) -> torch.Tensor:
        """Regression of V toward min-Q of a fresh policy sample minus entropy."""
        with torch.no_grad():
            act = self.policy.sample(s, noise=noise, generator=generator)
            q1, q2 = self.q_values(s, act.concat())
            target = torch.minimum(q1, q2) - self.log_alpha.exp() * act.log_prob
        v = self.value(s).squeeze(-1)
        return (0.5 * (v - target) ** 2).mean()

    def policy_loss(self, states: torch.Tensor,
                    generator: torch.Generator | None = None,
                    noise: torch.Tensor | None = None
                    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Reparameterized policy objective; grads reach the policy and,
        when ``states`` carries a graph-encoder history, the encoder."""
        act = self.policy.sample(states, noise=noise, generator=generator)
        q1, q2 = self.q_values(states, act.concat())
        q_min = torch.minimum(q1, q2)
        alpha = self.log_alpha.exp().detach()
        loss = (alpha * act.log_prob - q_min).mean()
        return loss, act.log_prob

    def alpha_loss(self, log_pi: torch.Tensor) -> torch.Tensor:
        return (-self.log_alpha.exp() * (log_pi.detach() + self.target_entropy)).mean()

    def soft_update(self) -> None:
        with torch.no_grad():
            for tgt, src in zip(self.value_target.parameters(), self.value.parameters()):
                tgt.mul_(1.0 - self.tau).add_(src, alpha=self.tau)

    def train_step(self, batch: Batch, features: torch.Tensor,
                   generator: torch.Generator | None = None) -> dict:
        """One gradient step on every trainable component.

        All gradients are taken from the same parameter snapshot, then
        applied in order: value, twin Q, policy, encoder, temperature,
        followed by the target EMA update.
        """
        dtype = self.log_alpha.dtype
        s = torch.from_numpy(batch.s).to(dtype)
        a = torch.from_numpy(batch.a).to(dtype)
        r = torch.from_numpy(batch.r).to(dtype)
        s_next = torch.from_numpy(batch.s_next).to(dtype)

        j_v = self.value_loss(s, generator=generator)
        j_q = self.q_loss(s, a, r, s_next)

        # refresh the sampled states through the encoder so its parameters
        # receive the policy gradient
        z = encode_batch(self.encoder, features, batch.snapshots)
        states = z.mean(dim=1)
        j_pi, log_pi = self.policy_loss(states, generator=generator)
        j_alpha = self.alpha_loss(log_pi) if self.auto_entropy else None

        for name, loss in (("J_V", j_v), ("J_Q", j_q), ("J_pi", j_pi)):
            if not torch.isfinite(loss):
                raise TrainingDiverged(f"{name} became non-finite")

        value_params = list(self.value.parameters())
        q_params = list(self.q1.parameters()) + list(self.q2.parameters())
        policy_params = list(self.policy.parameters())
        emb_params = list(self.encoder.parameters())

        grads_v = torch.autograd.grad(j_v, value_params)
        grads_q = torch.autograd.grad(j_q, q_params)
        grads_pi = torch.autograd.grad(j_pi, policy_params + emb_params)

        self._apply(self.value_opt, value_params, grads_v)
        self._apply(self.q_opt, q_params, grads_q)
        self._apply(self.policy_opt, policy_params, grads_pi[: len(policy_params)])
        self._apply(self.emb_opt, emb_params, grads_pi[len(policy_params):])
        if j_alpha is not None:
            self.alpha_opt.zero_grad(set_to_none=True)
            j_alpha.backward()
            self.alpha_opt.step()
        self.soft_update()

        metrics = {
            "J_Q": float(j_q.item()),
            "J_V": float(j_v.item()),
            "J_pi": float(j_pi.item()),
            "alpha": self.alpha,
        }
        if not all(math.isfinite(v) for v in metrics.values()):
            raise TrainingDiverged("non-finite metric after update")
        return metrics

    @staticmethod
    def _apply(optimizer, params, grads) -> None:
        optimizer.zero_grad(set_to_none=True)
        for p, g in zip(params, grads):
            p.grad = g
        optimizer.step()

    def named_modules_for_checkpoint(self) -> dict:
        return {
            "q1": self.q1, "q2": self.q2,
            "value": self.value, "value_target": self.value_target,
        }

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = {}
        for prefix, module in self.named_modules_for_checkpoint().items():
            for name, tensor in module.state_dict().items():
                out[f"{prefix}.{name}"] = tensor.detach().numpy()
        out["log_alpha"] = self.log_alpha.detach().numpy()
        return out
