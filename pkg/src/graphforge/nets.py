"""Small perceptron builders shared by the policy, critic, and reward nets."""

from __future__ import annotations

import torch
from torch import nn


def mlp(in_dim: int, out_dim: int, hidden: int, n_hidden: int = 1) -> nn.Sequential:
    """ReLU perceptron with ``n_hidden`` hidden layers of width ``hidden``."""
    layers: list[nn.Module] = []
    width = in_dim
    for _ in range(n_hidden):
        layers.append(nn.Linear(width, hidden))
        layers.append(nn.ReLU())
        width = hidden
    layers.append(nn.Linear(width, out_dim))
    return nn.Sequential(*layers)


def all_finite(module: nn.Module) -> bool:
    return all(torch.isfinite(p).all() for p in module.parameters())
