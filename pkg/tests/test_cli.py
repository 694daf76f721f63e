import numpy as np
import pytest

from graphforge import TrainConfig, load_edge_list
from graphforge.cli import main

MICRO_OVERRIDES = [
    "--set", "num_epochs=2", "--set", "num_steps_per_epoch=25",
    "--set", "max_path_length=25", "--set", "num_steps_before_training_online=10",
    "--set", "batch_size=8", "--set", "replay_buffer_size=200",
    "--set", "n_embed_size=8", "--set", "net_size=32",
    "--set", "reward_iter=2", "--set", "meas_samples=2",
    "--set", "gen_samples=2", "--set", "gen_from_policy=4",
    "--set", "checkpoint_every=0",
]


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    run_dir = tmp_path_factory.mktemp("cli") / "run"
    code = main([
        "train", "--preset", "desk", "--set", "dataset=ba:15:2",
        "--set", "seed=2", *MICRO_OVERRIDES, "--out", str(run_dir),
    ])
    assert code == 0
    return run_dir


def test_unknown_flag_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["train", "--bogus"])
    assert excinfo.value.code != 0


def test_missing_checkpoint_is_an_error(tmp_path, capsys):
    code = main(["generate", "--checkpoint", str(tmp_path / "none"),
                 "--out", str(tmp_path / "g.edges")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_train_writes_run_dir(trained_run):
    assert (trained_run / "config.txt").exists()
    assert (trained_run / "checkpoint" / "params.bin").exists()
    config = TrainConfig.from_file(trained_run / "config.txt")
    assert config.num_epochs == 2


def test_config_file_and_preset_conflict(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text(TrainConfig.desk_preset().to_text())
    with pytest.raises(SystemExit):
        main(["train", "--config", str(cfg), "--preset", "desk",
              "--out", str(tmp_path / "r")])


def test_generate_round_trips_through_loader(trained_run, tmp_path, capsys):
    out = tmp_path / "g.edges"
    code = main(["generate", "--checkpoint", str(trained_run),
                 "--nodes", "15", "--seed", "7", "--out", str(out),
                 "--budget-multiple", "1.0"])
    assert code == 0
    g = load_edge_list(out, n_hint=15)
    assert g.n == 15
    assert g.num_edges > 0


def test_generate_like_target(trained_run, tmp_path):
    out = tmp_path / "g2.edges"
    code = main(["generate", "--checkpoint", str(trained_run),
                 "--like", "ba:20:2", "--seed", "3", "--out", str(out)])
    assert code == 0
    assert load_edge_list(out, n_hint=20).n == 20


def test_eval_stats_prints_report(trained_run, tmp_path, capsys):
    out = tmp_path / "report.tsv"
    code = main(["eval-stats", "--checkpoint", str(trained_run),
                 "--samples", "2", "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr().out
    assert "triangle_count" in captured
    assert out.read_text().startswith("model\t")


def test_linkpred_protocol(tmp_path, capsys):
    code = main([
        "linkpred", "--graph", "ba:20:2", "--test-frac", "0.1", "--seed", "1",
        "--preset", "desk", "--set", "seed=1", *MICRO_OVERRIDES,
    ])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "mode\tAUC\tAP"
    rows = {line.split("\t")[0] for line in lines[1:]}
    assert rows == {"policy", "embed"}
    for line in lines[1:]:
        _, auc, ap = line.split("\t")
        assert 0.0 <= float(auc) <= 1.0
        assert 0.0 <= float(ap) <= 1.0


def test_transfer_two_arm_report(trained_run, tmp_path, capsys):
    out_dir = tmp_path / "transfer"
    code = main([
        "transfer", "--source-run", str(trained_run), "--target", "ba:18:2",
        "--preset", "desk", "--set", "seed=4", *MICRO_OVERRIDES,
        "--out", str(out_dir),
    ])
    assert code == 0
    table = capsys.readouterr().out
    assert "target (reward)" in table
    assert "target (direct)" in table
    assert (out_dir / "transfer_report.tsv").exists()
    # the transfer run froze the source reward
    from graphforge.checkpoint import load_checkpoint

    source_reward = load_checkpoint(trained_run / "checkpoint", prefix="reward.")
    target_reward = load_checkpoint(out_dir / "checkpoint", prefix="reward.")
    for name, arr in source_reward.arrays.items():
        np.testing.assert_array_equal(target_reward.arrays[name], arr)
