"""graphforge: learn graph construction policies from one observed graph.

A construction policy over a continuous latent action space is trained with
maximum-entropy actor-critic updates against a latent reward learned by
inverse optimal control from the observed graph. The package also ships the
graph statistics, link-prediction, and reward-transfer evaluation harness
plus a command-line front end.
"""

from .actor_critic import SoftActorCritic, TrainingDiverged
from .config import TrainConfig
from .datasets import (
    DatasetSpec,
    degree_bucket_features,
    gen_barabasi_albert,
    gen_erdos_renyi,
    load_edge_list,
    write_edge_list,
)
from .encoder import StateEncoder, pool_state
from .env import EnvConfig, GraphBuildEnv, ReplayBuffer, Transition
from .estimator import GraphForge
from .evaluation import (
    EvalReport,
    LinkPredSplit,
    binary_metrics,
    construction_eval,
    generate_graph,
    linkpred_split,
    score_candidates,
)
from .graph import Graph
from .policy import Action, GaussianEdgePolicy, select_nodes
from .reward_learning import (
    RewardNet,
    Trajectory,
    expert_trajectories,
    ioc_loss,
    reward_update,
    trajectory_return,
)
from .stats import (
    DeviationReport,
    StatsReport,
    compute_stats,
    degree_histogram,
    percent_deviation,
)
from .training import TrainedModel, Trainer, build_model, load_model, run_train, transfer_train

__version__ = "0.1.0"

__all__ = [
    "Action",
    "DatasetSpec",
    "DeviationReport",
    "EnvConfig",
    "EvalReport",
    "GaussianEdgePolicy",
    "Graph",
    "GraphBuildEnv",
    "GraphForge",
    "LinkPredSplit",
    "ReplayBuffer",
    "RewardNet",
    "SoftActorCritic",
    "StateEncoder",
    "StatsReport",
    "TrainConfig",
    "TrainedModel",
    "Trainer",
    "TrainingDiverged",
    "Trajectory",
    "Transition",
    "binary_metrics",
    "build_model",
    "compute_stats",
    "construction_eval",
    "degree_bucket_features",
    "degree_histogram",
    "expert_trajectories",
    "gen_barabasi_albert",
    "gen_erdos_renyi",
    "generate_graph",
    "ioc_loss",
    "linkpred_split",
    "load_edge_list",
    "load_model",
    "percent_deviation",
    "pool_state",
    "reward_update",
    "run_train",
    "score_candidates",
    "select_nodes",
    "trajectory_return",
    "transfer_train",
    "write_edge_list",
]
