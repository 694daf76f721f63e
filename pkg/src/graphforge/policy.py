"""Gaussian policy over a continuous latent action space.

The policy head maps a pooled graph state to the mean and log-variance of a
d-dimensional Gaussian. An action is a pair of independent samples from that
one distribution, squashed through tanh; each component is matched against
the node embeddings by inner-product similarity to pick an endpoint, so the
action space does not grow with the graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .nets import mlp

LOG_VAR_MIN = -20.0
LOG_VAR_MAX = 2.0


@dataclass
class Action:
    """Two squashed action components plus their joint log-density."""

    a1: torch.Tensor
    a2: torch.Tensor
    log_prob: torch.Tensor

    def concat(self) -> torch.Tensor:
        return torch.cat([self.a1, self.a2], dim=-1)


def _tanh_log_det(pre: torch.Tensor) -> torch.Tensor:
    # log(1 - tanh(u)^2) = 2*(log 2 - u - softplus(-2u)), stable for large |u|
    return 2.0 * (math.log(2.0) - pre - nn.functional.softplus(-2.0 * pre))


class GaussianEdgePolicy(nn.Module):
    def __init__(self, embed_dim: int, hidden: int = 256,
                 log_var_bounds: tuple[float, float] = (LOG_VAR_MIN, LOG_VAR_MAX)):
        super().__init__()
        low, high = log_var_bounds
        if not (math.isfinite(low) and math.isfinite(high) and low < high):
            raise ValueError(f"bad log-variance bounds {log_var_bounds}")
        self.embed_dim = embed_dim
        self.log_var_bounds = (float(low), float(high))
        self.net = mlp(embed_dim, 2 * embed_dim, hidden)

    def forward(self, state: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Pooled state(s) -> (mean, clamped log-variance)."""
        out = self.net(state)
        mu, log_var = out.chunk(2, dim=-1)
        log_var = torch.clamp(log_var, *self.log_var_bounds)
        return mu, log_var

    def sample(self, state: torch.Tensor, noise: torch.Tensor | None = None,
               generator: torch.Generator | None = None) -> Action:
        """Draw a reparameterized action pair.

        ``state`` is (d,) or (B, d). ``noise``, when given, is a fixed
        (2, d) / (2, B, d) standard-normal draw making the sample a
        deterministic, differentiable function of the parameters.
        """
        if not torch.isfinite(state).all():
            raise ValueError("non-finite state input")
        mu, log_var = self.forward(state)
        sigma = torch.exp(0.5 * log_var)
        if noise is None:
            eps = torch.randn(
                (2,) + mu.shape, dtype=mu.dtype, device=mu.device,
                generator=generator,
            )
        else:
            eps = torch.as_tensor(noise, dtype=mu.dtype, device=mu.device)
            if eps.shape != (2,) + mu.shape:
                raise ValueError(
                    f"noise shape {tuple(eps.shape)} != {(2,) + tuple(mu.shape)}"
                )
        pre = mu.unsqueeze(0) + sigma.unsqueeze(0) * eps
        squashed = torch.tanh(pre)
        # Gaussian log-density of the pre-squash samples ...
        log_prob = (
            -0.5 * ((pre - mu.unsqueeze(0)) / sigma.unsqueeze(0)) ** 2
            - 0.5 * math.log(2.0 * math.pi)
            - 0.5 * log_var.unsqueeze(0)
        )
        # ... minus the tanh change-of-variables correction, summed over
        # dimensions and both components
        log_prob = (log_prob - _tanh_log_det(pre)).sum(dim=-1).sum(dim=0)
        return Action(a1=squashed[0], a2=squashed[1], log_prob=log_prob)


def select_nodes(action: Action, Z: torch.Tensor | np.ndarray) -> tuple[int, int]:
    """Map action components to node indices by embedding similarity.

    Picks argmax_v sigmoid(<a_i, z_v>) for each component; the sigmoid is
    monotone so the raw inner product decides, and ties break toward the
    lowest node index. The mapping is not differentiated through.
    """
    if isinstance(Z, torch.Tensor):
        Z = Z.detach().cpu().numpy()
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.shape[0] < 1:
        raise ValueError(f"embedding matrix must be (n, d), got {Z.shape}")
    a1 = action.a1.detach().cpu().numpy().reshape(-1)
    a2 = action.a2.detach().cpu().numpy().reshape(-1)
    v1 = int(np.argmax(Z @ a1))
    v2 = int(np.argmax(Z @ a2))
    return v1, v2
