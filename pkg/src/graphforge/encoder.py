"""Message-passing state encoder.

Node embeddings are produced by a fixed number of propagation rounds: each
round sends a learned message from every node to its neighbors, aggregates
incoming messages with an elementwise max (zero vector for isolated nodes),
and updates each node from its previous embedding and the aggregate. The
graph-level state is the mean of the node embeddings, which is stable across
graphs of different size.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .nets import mlp


def edges_to_index(edges, device=None) -> torch.Tensor:
    """(m, 2) undirected edges -> (2, 2m) directed src/dst index tensor."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if arr.shape[0] == 0:
        return torch.empty(2, 0, dtype=torch.int64, device=device)
    src = np.concatenate([arr[:, 0], arr[:, 1]])
    dst = np.concatenate([arr[:, 1], arr[:, 0]])
    return torch.from_numpy(np.stack([src, dst])).to(device=device)


def max_aggregate(messages: torch.Tensor, edge_index: torch.Tensor,
                  num_nodes: int) -> torch.Tensor:
    """Elementwise max of incoming messages per node; zeros when none."""
    d = messages.shape[1]
    if edge_index.shape[1] == 0:
        return messages.new_zeros((num_nodes, d))
    src, dst = edge_index
    base = messages.new_full((num_nodes, d), -torch.inf)
    gathered = base.scatter_reduce(
        0, dst.unsqueeze(1).expand(-1, d), messages[src],
        reduce="amax", include_self=True,
    )
    return torch.where(torch.isinf(gathered), gathered.new_zeros(()), gathered)


class StateEncoder(nn.Module):
    """p-round message-passing network mapping (features, edges) to embeddings."""

    def __init__(self, in_features: int, embed_dim: int, hidden: int = 256,
                 rounds: int = 2):
        super().__init__()
        if embed_dim < 1 or rounds < 1:
            raise ValueError("embed_dim and rounds must be >= 1")
        self.in_features = in_features
        self.embed_dim = embed_dim
        self.rounds = rounds
        self.input_proj = nn.Linear(in_features, embed_dim)
        self.message_net = mlp(embed_dim, embed_dim, hidden)
        self.update_net = mlp(2 * embed_dim, embed_dim, hidden)

    def forward(self, features: torch.Tensor, edge_index: torch.Tensor) -> torch.Tensor:
        if features.shape[1] != self.in_features:
            raise ValueError(
                f"expected {self.in_features} feature columns, got {features.shape[1]}"
            )
        h = self.input_proj(features)
        n = features.shape[0]
        for _ in range(self.rounds):
            agg = max_aggregate(self.message_net(h), edge_index, n)
            h = self.update_net(torch.cat([h, agg], dim=1))
        return h

    @torch.no_grad()
    def encode(self, features: np.ndarray, edges) -> torch.Tensor:
        """Embed one graph given numpy features and an undirected edge array."""
        dtype = next(self.parameters()).dtype
        feats = torch.as_tensor(np.asarray(features), dtype=dtype)
        return self.forward(feats, edges_to_index(edges))


def pool_state(Z: torch.Tensor) -> torch.Tensor:
    """Graph-level state: mean over node embeddings."""
    if Z.shape[0] < 1:
        raise ValueError("cannot pool an empty embedding matrix")
    return Z.mean(dim=0)


def encode_batch(encoder: StateEncoder, features: torch.Tensor,
                 edge_arrays: list) -> torch.Tensor:
    """Embed B same-node-set graphs in one forward pass; returns (B, n, d).

    Gradients flow back to the encoder parameters, which is what the policy
    update needs when it refreshes state representations from stored
    adjacency snapshots.
    """
    b = len(edge_arrays)
    n = features.shape[0]
    feats = features.repeat(b, 1)
    src_parts = []
    dst_parts = []
    for i, edges in enumerate(edge_arrays):
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if arr.shape[0] == 0:
            continue
        off = i * n
        src_parts.append(arr[:, 0] + off)
        src_parts.append(arr[:, 1] + off)
        dst_parts.append(arr[:, 1] + off)
        dst_parts.append(arr[:, 0] + off)
    if src_parts:
        index = torch.from_numpy(
            np.stack([np.concatenate(src_parts), np.concatenate(dst_parts)])
        ).to(features.device)
    else:
        index = torch.empty(2, 0, dtype=torch.int64, device=features.device)
    out = encoder.forward(feats, index)
    return out.view(b, n, -1)


@torch.no_grad()
def pooled_prefix_states(encoder: StateEncoder, features: np.ndarray,
                         edge_sequence: np.ndarray,
                         max_batch_nodes: int = 200_000) -> np.ndarray:
    """Pooled states of every prefix of an edge sequence, (T+1, d) float32.

    Prefix k holds the first k edges. Prefixes are packed into block-diagonal
    batches so long sequences stay a handful of forward passes.
    """
    dtype = next(encoder.parameters()).dtype
    feats = torch.as_tensor(np.asarray(features), dtype=dtype)
    n = feats.shape[0]
    seq = np.asarray(edge_sequence, dtype=np.int64).reshape(-1, 2)
    t = seq.shape[0]
    per_chunk = max(1, max_batch_nodes // n)
    pooled = np.empty((t + 1, encoder.embed_dim), dtype=np.float32)
    for start in range(0, t + 1, per_chunk):
        stop = min(start + per_chunk, t + 1)
        arrays = [seq[:k] for k in range(start, stop)]
        z = encode_batch(encoder, feats, arrays)
        pooled[start:stop] = z.mean(dim=1).to(torch.float32).numpy()
    return pooled
