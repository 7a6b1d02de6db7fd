from pathlib import Path

import numpy as np
import pytest

from utils import (
    linerun_meta, maze_dataset, maze_meta, randomize, synthetic_dataset, tiny_policy_config, tiny_trajnet_config,
)

from src.numeric import RngStream, ShapeMismatch, Tape, check_gradients, mse_loss
from src.policy import (
    Conditioning, Policy, PolicyConfig, conditioning_features, conditioning_width, load_policy, policy_forward,
    save_policy, train_policy,
)
from src.trajnet import encode, init_params, load_trajnet, train_trajnet
from src.utils import IncompatibleError, RunDir, UsageError


def trained_trajnet(tmp_path, dataset, **overrides):
    config = tiny_trajnet_config(dataset.meta, **overrides)
    result = train_trajnet(config, dataset, 0, RunDir(tmp_path / "trajnet"))
    return load_trajnet(result.checkpoints[-1])


def test_001():
    """The conditioning width follows the mode"""
    config = tiny_trajnet_config(maze_meta())
    assert conditioning_width(Conditioning.BOTTLENECK, config) == 2 * 8
    assert conditioning_width(Conditioning.EXPLICIT_FUTURE, config) == 4 * 2
    assert conditioning_width(Conditioning.NONE, None) == 0
    with pytest.raises(IncompatibleError):
        conditioning_width(Conditioning.BOTTLENECK, None)


def test_002():
    """The policy maps [s, g, c] to one action per row"""
    policy = Policy(tiny_policy_config(), 4, 2, 2, 16, RngStream(0))
    out = policy_forward(policy, np.zeros((5, 4)), np.zeros((5, 2)), np.zeros((5, 16)))
    assert out.shape == (5, 2)
    assert policy.input_width == 22
    with pytest.raises(ShapeMismatch):
        policy_forward(policy, np.zeros((5, 4)), np.zeros((5, 2)))
    with pytest.raises(ShapeMismatch):
        policy_forward(policy, np.zeros((5, 4)), np.zeros((5, 3)), np.zeros((5, 16)))


def test_003():
    """Policy loss gradients agree with central differences"""
    policy = Policy(tiny_policy_config(hidden_layers=2, hidden_width=6, activation="gelu"), 4, 2, 2, 3, RngStream(1))
    randomize(policy.params.tensors, seed=1)
    rng = RngStream(2)
    states, goals, cond = rng.normal(size=(6, 4)), rng.normal(size=(6, 2)), rng.normal(size=(6, 3))
    actions = rng.uniform(-1, 1, size=(6, 2))
    errors = check_gradients(lambda: mse_loss(policy_forward(policy, states, goals, cond), actions),
                             policy.params.tensors)
    assert max(errors.values()) <= 1e-5


def test_004():
    """Bottleneck features are the flattened encoding of the unmasked history"""
    meta = maze_meta()
    model = init_params(tiny_trajnet_config(meta), meta, RngStream(0))
    history = RngStream(1).normal(size=(3, 3, 4))
    goals = RngStream(2).normal(size=(3, 2))
    features = conditioning_features(Conditioning.BOTTLENECK, model, history, goals)
    assert features.shape == (3, 16)
    assert np.array_equal(features, encode(model, history, None, goals).data.reshape(3, -1))
    assert conditioning_features(Conditioning.NONE, None, history, goals).shape == (3, 0)


def test_005():
    """No gradient reaches a frozen TrajNet through the conditioning features"""
    meta = maze_meta()
    model = init_params(tiny_trajnet_config(meta), meta, RngStream(0))
    model.params.freeze()
    tape = Tape()
    with tape.recording():
        conditioning_features(Conditioning.EXPLICIT_FUTURE, model, np.zeros((2, 3, 4)), np.zeros((2, 2)))
    assert len(tape) == 0


def test_006(tmp_path):
    """Goal-conditioned cloning trains without a TrajNet and keeps the newest checkpoints"""
    dataset = synthetic_dataset(tmp_path / "data", maze_meta())
    config = tiny_policy_config(conditioning="none", epochs=4, retain_checkpoints=2)
    run = RunDir(tmp_path / "run")
    result = train_policy(config, dataset, 0, run)
    assert [p.name for p in run.list_checkpoints("policy")] == ["policy-epoch-003.ckpt", "policy-epoch-004.ckpt"]
    assert len(result.epoch_losses) == 4
    assert len(run.metrics.select("policy-epoch")) == 4
    bundle = load_policy(run.list_checkpoints("policy")[-1])
    assert bundle.trajnet is None and bundle.history == 1


def test_007(tmp_path):
    """Policy training leaves the TrajNet untouched and links to it by digest"""
    dataset = maze_dataset(tmp_path / "data", n=8)
    trajnet = trained_trajnet(tmp_path, dataset)
    before = trajnet.model.params.checksum()
    trajnet_bytes = trajnet.path.read_bytes()
    run = RunDir(tmp_path / "policy")
    train_policy(tiny_policy_config(), dataset, 0, run, trajnet)
    assert trajnet.model.params.checksum() == before
    assert trajnet.path.read_bytes() == trajnet_bytes

    bundle = load_policy(run.list_checkpoints("policy")[-1])
    assert bundle.conditioning is Conditioning.BOTTLENECK
    assert bundle.history == trajnet.config.k
    assert bundle.trajnet.model.params.checksum() == before


def test_008(tmp_path):
    """A TrajNet file that changed after policy training is refused"""
    dataset = synthetic_dataset(tmp_path / "data", maze_meta())
    trajnet = trained_trajnet(tmp_path, dataset)
    run = RunDir(tmp_path / "policy")
    train_policy(tiny_policy_config(epochs=1), dataset, 0, run, trajnet)
    other = train_trajnet(tiny_trajnet_config(dataset.meta, epochs=1), dataset, 5, RunDir(tmp_path / "other"))
    trajnet.path.write_bytes(Path(other.checkpoints[-1]).read_bytes())
    with pytest.raises(IncompatibleError):
        load_policy(run.list_checkpoints("policy")[-1])


def test_009(tmp_path):
    """Bottleneck conditioning without a TrajNet is a usage error"""
    dataset = synthetic_dataset(tmp_path / "data", maze_meta())
    with pytest.raises(UsageError):
        train_policy(tiny_policy_config(), dataset, 0, RunDir(tmp_path / "run"))


def test_010(tmp_path):
    """A TrajNet trained on other dimensions is incompatible"""
    maze = synthetic_dataset(tmp_path / "maze", maze_meta())
    line = synthetic_dataset(tmp_path / "line", linerun_meta())
    trajnet = trained_trajnet(tmp_path, line)
    with pytest.raises(IncompatibleError):
        train_policy(tiny_policy_config(), maze, 0, RunDir(tmp_path / "run"), trajnet)


def test_011():
    """Conditioning names accept hyphens and reject unknown modes"""
    assert Conditioning.parse("explicit-future") is Conditioning.EXPLICIT_FUTURE
    assert Conditioning.parse("none") is Conditioning.NONE
    with pytest.raises(UsageError):
        Conditioning.parse("latent")


def test_012(tmp_path):
    """A saved policy reloads with bit-identical outputs"""
    meta = maze_meta()
    dataset = synthetic_dataset(tmp_path / "data", meta)
    trajnet = trained_trajnet(tmp_path, dataset)
    policy = Policy(tiny_policy_config(), 4, 2, 2, 16, RngStream(3))
    path = save_policy(tmp_path / "policy.ckpt", policy, trajnet.stats, meta, 3, trajnet.path)
    bundle = load_policy(path)
    rng = RngStream(4)
    states, goals, cond = rng.normal(size=(2, 4)), rng.normal(size=(2, 2)), rng.normal(size=(2, 16))
    assert np.array_equal(policy_forward(policy, states, goals, cond).data,
                          policy_forward(bundle.policy, states, goals, cond).data)


def test_013(tmp_path):
    """Explicit-future conditioning trains over the decoded future"""
    dataset = synthetic_dataset(tmp_path / "data", linerun_meta())
    trajnet = trained_trajnet(tmp_path, dataset)
    run = RunDir(tmp_path / "policy")
    result = train_policy(tiny_policy_config(conditioning="explicit_future"), dataset, 0, run, trajnet)
    assert result.policy.cond_width == trajnet.config.p * trajnet.config.recon_width
    assert all(np.isfinite(result.epoch_losses))


def test_014():
    """Default and replaced policy configs keep their conditioning mode"""
    assert PolicyConfig().conditioning is Conditioning.BOTTLENECK
    assert Conditioning.parse(Conditioning.EXPLICIT_FUTURE) is Conditioning.EXPLICIT_FUTURE
    replaced = PolicyConfig().replace(conditioning=Conditioning.NONE)
    assert replaced.conditioning is Conditioning.NONE
    assert PolicyConfig.from_dict(replaced.to_dict()).conditioning is Conditioning.NONE
