"""Sequential edge-construction environment and replay buffer.

An episode starts from the node set with no edges. Each step proposes a node
pair: self-loops are rejected with no state change, repeated edges bump a
per-edge counter, and new edges trigger a full re-embedding of the graph.
The episode ends once every existing edge has been re-proposed at least
``k_repeat`` times, or after ``max_path_length`` steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .encoder import StateEncoder, pool_state
from .graph import Graph, canonical_edge
from .validation import check_positive_int

EVENT_NEW = "new"
EVENT_REPEAT = "repeat"
EVENT_SELFLOOP = "selfloop"


@dataclass(frozen=True)
class EnvConfig:
    k_repeat: int = 100
    max_path_length: int = 1000
    seed: int = 0

    def __post_init__(self):
        check_positive_int(self.k_repeat, "k_repeat")
        check_positive_int(self.max_path_length, "max_path_length")


class EdgeTrace:
    """Append-only edge sequence; (trace, count) pairs act as snapshots."""

    __slots__ = ("_arr", "count")

    def __init__(self, initial: np.ndarray | None = None, capacity: int = 64):
        if initial is not None and len(initial):
            initial = np.asarray(initial, dtype=np.int64).reshape(-1, 2)
            capacity = max(capacity, 2 * len(initial))
            self._arr = np.empty((capacity, 2), dtype=np.int64)
            self._arr[: len(initial)] = initial
            self.count = len(initial)
        else:
            self._arr = np.empty((capacity, 2), dtype=np.int64)
            self.count = 0

    def append(self, u: int, v: int) -> None:
        if self.count == len(self._arr):
            grown = np.empty((2 * len(self._arr), 2), dtype=np.int64)
            grown[: self.count] = self._arr
            self._arr = grown
        self._arr[self.count] = (u, v)
        self.count += 1

    def view(self, k: int) -> np.ndarray:
        return self._arr[:k]


@dataclass
class EnvState:
    graph: Graph
    Z: torch.Tensor
    pooled: np.ndarray
    repeat_counts: dict = field(default_factory=dict)
    step_index: int = 0


@dataclass
class Transition:
    """One replay record: (s, a, r, s_next, adjacency snapshot)."""

    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray
    snapshot: tuple[EdgeTrace, int]
    log_prob: float = 0.0


class GraphBuildEnv:
    """Single-episode-at-a-time edge construction environment.

    Parameters
    ----------
    node_graph:
        The node set with features and an empty edge set.
    encoder:
        State encoder used to re-embed the graph after each new edge.
    config:
        Termination parameters.
    reward_fn:
        Optional callable mapping the pooled next-state vector (float32
        numpy) to a scalar reward; rewards are 0 when omitted.
    """

    def __init__(self, node_graph: Graph, encoder: StateEncoder,
                 config: EnvConfig, reward_fn=None):
        if node_graph.num_edges != 0:
            raise ValueError("env node set must have an empty edge set")
        if node_graph.features is None:
            raise ValueError("env node set needs node features")
        self.base = node_graph.copy()
        self.encoder = encoder
        self.config = config
        self.reward_fn = reward_fn
        self.rng = np.random.default_rng(config.seed)
        self.state: EnvState | None = None
        self.trace: EdgeTrace | None = None
        self._action_dim = 2 * encoder.embed_dim
        self._below_k = 0

    def _embed(self, graph: Graph) -> tuple[torch.Tensor, np.ndarray]:
        Z = self.encoder.encode(graph.features, graph.edge_array())
        pooled = pool_state(Z).to(torch.float32).numpy()
        return Z, pooled

    def reset(self, initial_edges: np.ndarray | None = None) -> EnvState:
        """Start a new episode; optionally pre-populate edges.

        The pre-populated form backs the link-prediction protocol where the
        observed graph is the initial state; normal training always starts
        from the empty edge set.
        """
        graph = self.base.copy()
        if initial_edges is not None:
            for u, v in np.asarray(initial_edges, dtype=np.int64).reshape(-1, 2):
                graph.add_edge(int(u), int(v))
        Z, pooled = self._embed(graph)
        self.state = EnvState(
            graph=graph, Z=Z, pooled=pooled,
            repeat_counts={e: 0 for e in graph.edges}, step_index=0,
        )
        self.trace = EdgeTrace(initial=graph.edge_array())
        self._below_k = graph.num_edges  # all counters start below k_repeat
        return self.state

    def step(self, v1: int, v2: int, action: np.ndarray | None = None,
             log_prob: float = 0.0) -> tuple[Transition, str, bool]:
        """Apply a node-pair proposal; returns (transition, event, terminal)."""
        state = self.state
        if state is None:
            raise RuntimeError("call reset() before step()")
        n = state.graph.n
        if not (0 <= v1 < n and 0 <= v2 < n):
            raise ValueError(f"node pair ({v1}, {v2}) out of range for n={n}")

        s_before = state.pooled
        if v1 == v2:
            event = EVENT_SELFLOOP
        elif state.graph.has_edge(v1, v2):
            event = EVENT_REPEAT
            key = canonical_edge(v1, v2)
            count = state.repeat_counts[key] + 1
            state.repeat_counts[key] = count
            if count == self.config.k_repeat:
                self._below_k -= 1
        else:
            event = EVENT_NEW
            state.graph.add_edge(v1, v2)
            key = canonical_edge(v1, v2)
            state.repeat_counts[key] = 0
            self._below_k += 1
            self.trace.append(*key)
            state.Z, state.pooled = self._embed(state.graph)

        state.step_index += 1
        s_after = state.pooled
        reward = float(self.reward_fn(s_after)) if self.reward_fn is not None else 0.0

        terminal = (
            (self._below_k == 0 and state.graph.num_edges >= 1)
            or state.step_index >= self.config.max_path_length
        )
        if action is None:
            action = np.zeros(self._action_dim, dtype=np.float32)
        transition = Transition(
            s=s_before, a=np.asarray(action, dtype=np.float32), r=reward,
            s_next=s_after, snapshot=(self.trace, self.trace.count),
            log_prob=float(log_prob),
        )
        return transition, event, terminal


@dataclass
class Batch:
    s: np.ndarray
    a: np.ndarray
    r: np.ndarray
    s_next: np.ndarray
    snapshots: list[np.ndarray]


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions with uniform resampling."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        check_positive_int(capacity, "capacity")
        self.capacity = capacity
        self._s = np.zeros((capacity, state_dim), dtype=np.float32)
        self._a = np.zeros((capacity, action_dim), dtype=np.float32)
        self._r = np.zeros(capacity, dtype=np.float32)
        self._s_next = np.zeros((capacity, state_dim), dtype=np.float32)
        self._snap: list[tuple[EdgeTrace, int] | None] = [None] * capacity
        self._pos = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, t: Transition) -> None:
        i = self._pos
        self._s[i] = t.s
        self._a[i] = t.a
        self._r[i] = t.r
        self._s_next[i] = t.s_next
        self._snap[i] = t.snapshot
        self._pos = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch | None:
        """Uniform sample with replacement, or None while underfull."""
        if self._size < batch_size:
            return None
        idx = rng.integers(0, self._size, size=batch_size)
        snapshots = []
        for i in idx:
            trace, count = self._snap[i]
            snapshots.append(trace.view(count))
        return Batch(
            s=self._s[idx], a=self._a[idx], r=self._r[idx],
            s_next=self._s_next[idx], snapshots=snapshots,
        )
