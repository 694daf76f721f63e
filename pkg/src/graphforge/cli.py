"""Command-line entry points: train, generate, eval-stats, linkpred, transfer."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import torch

from .config import TrainConfig
from .datasets import DatasetSpec, write_edge_list
from .evaluation import (
    binary_metrics,
    construction_eval,
    format_deviation_table,
    generate_graph,
    linkpred_split,
    score_candidates,
    summarize_deviations,
)
from .graph import Graph
from .stats import compute_stats
from .training import Trainer, attach_features, load_model, run_train, transfer_train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphforge",
        description="Learn graph construction policies from a single observed graph.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train on an observed graph")
    _add_config_args(train)
    train.add_argument("--out", required=True, help="run directory to create")

    gen = sub.add_parser("generate", help="roll out a trained policy")
    gen.add_argument("--checkpoint", required=True,
                     help="run directory holding config.txt and checkpoint/")
    gen.add_argument("--nodes", type=int, default=None,
                     help="node count for generation (defaults to training graph)")
    gen.add_argument("--like", default=None,
                     help="dataset spec/path supplying the node set and features")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="edge-list output path")
    gen.add_argument("--budget-multiple", type=float, default=None)
    gen.add_argument("--reference-edges", type=int, default=None)

    evals = sub.add_parser("eval-stats", help="construction-quality report")
    evals.add_argument("--checkpoint", required=True, help="run directory")
    evals.add_argument("--graph", default=None,
                       help="observed graph (defaults to the training dataset)")
    evals.add_argument("--samples", type=int, default=3)
    evals.add_argument("--seed", type=int, default=0)
    evals.add_argument("--out", default=None, help="optional report file")

    lp = sub.add_parser("linkpred", help="held-out link prediction protocol")
    lp.add_argument("--graph", required=True, help="graph file or dataset spec")
    lp.add_argument("--test-frac", type=float, default=0.1)
    lp.add_argument("--seed", type=int, default=0)
    lp.add_argument("--out", default=None, help="run directory for the retrain")
    _add_config_args(lp)

    tr = sub.add_parser("transfer", help="frozen-reward transfer to a new graph")
    tr.add_argument("--source-run", required=True)
    tr.add_argument("--target", required=True, help="graph file or dataset spec")
    tr.add_argument("--out", default=None, help="run directory for the target run")
    tr.add_argument("--seed", type=int, default=None)
    _add_config_args(tr)

    return parser


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="config file (key = value)")
    parser.add_argument("--preset", choices=["paper", "desk"], default=None)
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a single config key")


def _resolve_config(args) -> TrainConfig:
    if args.config:
        config = TrainConfig.from_file(args.config)
        if args.preset:
            raise SystemExit("use either --config or --preset, not both")
    elif args.preset == "desk":
        config = TrainConfig.desk_preset()
    else:
        config = TrainConfig()
    if args.set:
        text = config.to_text() + "\n".join(
            item.replace("=", " = ", 1) for item in args.set
        )
        config = TrainConfig.from_text(text)
    return config.validate()


def _load_graph_arg(spec_text: str, config: TrainConfig) -> Graph:
    spec = DatasetSpec.parse(spec_text, seed=config.seed,
                             one_indexed=config.one_indexed)
    return attach_features(spec.load(), config)


def cmd_train(args) -> int:
    config = _resolve_config(args)
    run_dir = run_train(config, args.out)
    print(f"run complete: {run_dir}")
    return 0


def cmd_generate(args) -> int:
    model = load_model(args.checkpoint)
    config = model.config
    if args.like:
        base = _load_graph_arg(args.like, config)
        reference = base.num_edges or model.observed.num_edges
    elif args.nodes is None or args.nodes == model.observed.n:
        base = model.observed
        reference = model.observed.num_edges
    else:
        base = Graph(args.nodes)
        attach_features(base, config)  # all-isolated degree buckets
        print("note: --nodes without --like gives every node identical features",
              file=sys.stderr)
        reference = model.observed.num_edges
    if args.reference_edges is not None:
        reference = args.reference_edges
    multiple = (args.budget_multiple if args.budget_multiple is not None
                else config.edge_budget_multiple)
    gen = torch.Generator().manual_seed(args.seed)
    g = generate_graph(base, model.policy, model.encoder, model.env_config(),
                       multiple, reference, torch_gen=gen,
                       deterministic=config.eval_deterministic)
    write_edge_list(g, args.out)
    print(f"wrote {g.num_edges} edges for {g.n} nodes to {args.out}")
    return 0


def cmd_eval_stats(args) -> int:
    model = load_model(args.checkpoint)
    observed = (_load_graph_arg(args.graph, model.config)
                if args.graph else model.observed)
    report = construction_eval(
        observed, model.policy, model.encoder, model.env_config(),
        samples=args.samples,
        edge_budget_multiple=model.config.edge_budget_multiple,
        seed=args.seed, deterministic=model.config.eval_deterministic,
    )
    print("observed statistics:")
    print(compute_stats(observed).to_text(), end="")
    table = format_deviation_table([("trained", report)])
    print(table, end="")
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    return 0


def cmd_linkpred(args) -> int:
    config = _resolve_config(args)
    observed = _load_graph_arg(args.graph, config)
    split = linkpred_split(observed, test_frac=args.test_frac, seed=args.seed)
    attach_features(split.train_graph, config)
    trainer = Trainer(config, split.train_graph, run_dir=args.out)
    model = trainer.run()

    print("mode\tAUC\tAP")
    for mode in ("policy", "embed"):
        gen = torch.Generator().manual_seed(args.seed)
        scores, labels = score_candidates(
            split, mode, model.encoder, policy=model.policy,
            env_config=model.env_config(), torch_gen=gen,
        )
        auc, ap = binary_metrics(scores, labels)
        print(f"{mode}\t{auc:.4f}\t{ap:.4f}")
    return 0


def cmd_transfer(args) -> int:
    config = _resolve_config(args)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    config = config.replace(dataset=args.target).validate()
    target = _load_graph_arg(args.target, config)
    obs_stats = compute_stats(target)

    run_dir = Path(args.out) if args.out else None
    transferred = transfer_train(args.source_run, target, config,
                                 run_dir=run_dir)
    reward_report = construction_eval(
        target, transferred.policy, transferred.encoder,
        transferred.env_config(), samples=config.eval_samples,
        edge_budget_multiple=config.edge_budget_multiple, seed=config.seed,
        deterministic=config.eval_deterministic, label="reward",
    )

    source_model = load_model(args.source_run)
    direct_reports = []
    for i in range(config.eval_samples):
        gen = torch.Generator().manual_seed(config.seed * 100003 + i)
        g = generate_graph(
            attach_features(target.copy(), config), source_model.policy,
            source_model.encoder, source_model.env_config(),
            config.edge_budget_multiple, target.num_edges, torch_gen=gen,
            deterministic=config.eval_deterministic,
        )
        direct_reports.append(compute_stats(g))
    direct_report = summarize_deviations(obs_stats, direct_reports, label="direct")

    table = format_deviation_table([
        ("target (reward)", reward_report),
        ("target (direct)", direct_report),
    ])
    print(table, end="")
    if run_dir is not None:
        (run_dir / "transfer_report.tsv").write_text(table, encoding="utf-8")
    return 0


COMMANDS = {
    "train": cmd_train,
    "generate": cmd_generate,
    "eval-stats": cmd_eval_stats,
    "linkpred": cmd_linkpred,
    "transfer": cmd_transfer,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
