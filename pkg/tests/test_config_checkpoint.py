import math

import numpy as np
import pytest

from graphforge import TrainConfig
from graphforge.checkpoint import CheckpointError, load_checkpoint, save_checkpoint

REFERENCE_DEFAULTS = {
    "num_epochs": 10000,
    "num_steps_per_epoch": 500,
    "num_steps_per_eval": 1000,
    "num_steps_before_training_online": 25,
    "replay_buffer_size": 100000,
    "batch_size": 128,
    "max_path_length": 1000,
    "discount": 0.99,
    "reward_iter": 30,
    "irl_episode_per_train": 10,
    "meas_samples": 5,
    "gen_samples": 10,
    "prop_rounds": 2,
    "reward_lr": 0.01,
    "soft_target_tau": 0.001,
    "policy_lr": 1e-4,
    "qf_lr": 1e-3,
    "train_with_reparameterization": True,
    "eval_deterministic": False,
    "use_automatic_entropy_tuning": True,
    "gen_from_policy": 10,
    "term_threshold": 100,
    "l1_coeff": 0.1,
    "n_embed_size": 32,
    "net_size": 256,
}


def test_reference_defaults():
    config = TrainConfig()
    for key, value in REFERENCE_DEFAULTS.items():
        assert getattr(config, key) == value, key


def test_every_reference_key_accepted_and_round_trips():
    text = "\n".join(
        f"{k} = {'TRUE' if v is True else 'FALSE' if v is False else v}"
        for k, v in REFERENCE_DEFAULTS.items()
    )
    config = TrainConfig.from_text(text)
    reparsed = TrainConfig.from_text(config.to_text())
    for key in REFERENCE_DEFAULTS:
        assert getattr(reparsed, key) == getattr(config, key)


def test_full_round_trip_including_auto_entropy():
    config = TrainConfig.desk_preset(seed=9, dataset="er:50:0.1")
    reparsed = TrainConfig.from_text(config.to_text())
    for field in config.__dataclass_fields__:
        a, b = getattr(config, field), getattr(reparsed, field)
        if isinstance(a, float) and math.isnan(a):
            assert math.isnan(b)
        else:
            assert a == b, field
    explicit = config.replace(target_entropy=-3.5)
    assert TrainConfig.from_text(explicit.to_text()).target_entropy == -3.5


def test_alias_keys_accepted():
    config = TrainConfig.from_text("train_policy_with_reprarameterization = TRUE")
    assert config.train_with_reparameterization
    config = TrainConfig.from_text("k_repeat = 7")
    assert config.term_threshold == 7


def test_config_errors():
    with pytest.raises(ValueError, match="unknown config key"):
        TrainConfig.from_text("bogus_key = 3")
    with pytest.raises(ValueError, match="line 1"):
        TrainConfig.from_text("num_epochs three")
    with pytest.raises(ValueError):
        TrainConfig.from_text("discount = 1.5")
    with pytest.raises(ValueError):
        TrainConfig.from_text("batch_size = 0")
    with pytest.raises(ValueError, match="reparameterized"):
        TrainConfig.from_text("train_with_reparameterization = FALSE")
    with pytest.raises(ValueError, match="boolean"):
        TrainConfig.from_text("eval_deterministic = maybe")


def test_resolved_target_entropy():
    assert TrainConfig().resolved_target_entropy() == -64.0
    assert TrainConfig(n_embed_size=8).resolved_target_entropy() == -16.0
    assert TrainConfig(target_entropy=-5.0).resolved_target_entropy() == -5.0


def test_desk_preset_scales_down():
    desk = TrainConfig.desk_preset()
    assert desk.num_epochs == 500
    assert desk.term_threshold == 2
    assert desk.n_embed_size < TrainConfig().n_embed_size
    assert desk.validate() is desk


def test_content_hash_changes_with_values():
    a = TrainConfig()
    b = TrainConfig(seed=1)
    assert a.content_hash() != b.content_hash()
    assert a.content_hash() == TrainConfig().content_hash()


# -- checkpoint format --------------------------------------------------------


def _arrays(rng):
    return {
        "encoder.w": rng.normal(size=(3, 4)).astype(np.float32),
        "policy.b": rng.normal(size=5).astype(np.float32),
        "reward.net.0.weight": rng.normal(size=(2, 2)).astype(np.float32),
        "log_alpha": np.float32(0.25).reshape(()),
    }


def test_checkpoint_bitwise_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    arrays = _arrays(rng)
    save_checkpoint(tmp_path / "ck", arrays, epoch=7, config_hash="abc")
    first = {
        name: (tmp_path / "ck" / name).read_bytes()
        for name in ("manifest.tsv", "params.bin", "meta.txt")
    }
    ckpt = load_checkpoint(tmp_path / "ck")
    assert ckpt.epoch == 7 and ckpt.config_hash == "abc"
    for name, arr in arrays.items():
        np.testing.assert_array_equal(ckpt.arrays[name], arr)
        assert ckpt.arrays[name].dtype == np.float32
    save_checkpoint(tmp_path / "ck2", ckpt.arrays, epoch=7, config_hash="abc")
    for name, blob in first.items():
        assert (tmp_path / "ck2" / name).read_bytes() == blob


def test_checkpoint_prefix_subset(tmp_path):
    arrays = _arrays(np.random.default_rng(1))
    save_checkpoint(tmp_path / "ck", arrays, epoch=0, config_hash="h")
    subset = load_checkpoint(tmp_path / "ck", prefix="reward.")
    assert list(subset.arrays) == ["reward.net.0.weight"]
    np.testing.assert_array_equal(
        subset.arrays["reward.net.0.weight"], arrays["reward.net.0.weight"])


def test_checkpoint_truncation_names_array(tmp_path):
    arrays = _arrays(np.random.default_rng(2))
    save_checkpoint(tmp_path / "ck", arrays, epoch=0, config_hash="h")
    blob = (tmp_path / "ck" / "params.bin").read_bytes()
    (tmp_path / "ck" / "params.bin").write_bytes(blob[:-4])
    with pytest.raises(CheckpointError, match="log_alpha"):
        load_checkpoint(tmp_path / "ck")


def test_checkpoint_missing_manifest(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "nothing")
