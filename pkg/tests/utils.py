import contextlib
import io
import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from src.cli import main
from src.data import DatasetMeta, GoalMode, NormStats, Trajectory, load_dataset, save_dataset
from src.envs import CollectorConfig, collect_dataset, make_env
from src.evaluation import Agent
from src.numeric import RngStream
from src.policy import PolicyConfig
from src.trajnet import TrajNetConfig


def maze_meta(max_steps=60, references=None):
    return DatasetMeta(
        env_id="minimaze",
        state_dim=4,
        action_dim=2,
        max_episode_steps=max_steps,
        goal_mode=GoalMode.TARGET_STATE,
        goal_subspace=[0, 1],
        reference_scores=references,
        layout="corridor-S",
    )


def linerun_meta(max_steps=20, references=None):
    return DatasetMeta(
        env_id="linerun",
        state_dim=2,
        action_dim=1,
        max_episode_steps=max_steps,
        goal_mode=GoalMode.RETURN_TO_GO,
        goal_subspace=[],
        reference_scores=references or {"random": 0.0, "expert": 1.0},
    )


def random_trajectory(meta, length, rng):
    return Trajectory(
        states=rng.normal(0.0, 1.0, size=(length, meta.state_dim)),
        actions=rng.uniform(-1.0, 1.0, size=(length, meta.action_dim)),
        rewards=rng.uniform(0.0, 1.0, size=length),
    )


def synthetic_dataset(path, meta, n=10, length=12, seed=0):
    """Random-walk trajectories written to ``path`` and loaded back."""
    rng = RngStream(seed)
    trajectories = [random_trajectory(meta, length, rng.split(i)) for i in range(n)]
    save_dataset(path, meta, trajectories)
    return load_dataset(path)


def maze_dataset(path, n=10, seed=0, style="play", episode_length=40):
    env = make_env("minimaze", "corridor-S")
    config = CollectorConfig(n_trajectories=n, style=style, episode_length=episode_length, reference_episodes=2)
    return load_dataset(collect_dataset(env, config, seed, path))


def linerun_dataset(path, n=10, seed=0, horizon=30):
    env = make_env("linerun", episode_cap=horizon)
    config = CollectorConfig(n_trajectories=n, reference_episodes=2)
    return load_dataset(collect_dataset(env, config, seed, path))


def tiny_trajnet_config(meta, **overrides):
    """A TrajNet small enough to train in a unit test, resolved against ``meta``."""
    fields = dict(
        d_model=8, n_heads=2, encoder_layers=1, decoder_layers=1, n_slots=2, k=3, p=4,
        dropout=0.0, learning_rate=1e-3, batch_size=8, epochs=2, steps_per_epoch=2, validation_samples=8,
    )
    fields.update(overrides)
    return TrajNetConfig(**fields).resolve(meta)


def tiny_policy_config(**overrides):
    fields = dict(hidden_layers=1, hidden_width=16, epochs=2, batch_size=8, steps_per_epoch=2, retain_checkpoints=5)
    fields.update(overrides)
    return PolicyConfig(**fields)


def tiny_config_document(**sections):
    """A run config document with tiny trajnet and policy sections."""
    document = {
        "trajnet": {
            "d_model": 8, "n_heads": 2, "encoder_layers": 1, "decoder_layers": 1, "n_slots": 2,
            "k": 3, "p": 4, "dropout": 0.0, "learning_rate": 1e-3, "batch_size": 8,
            "epochs": 5, "steps_per_epoch": 2, "validation_samples": 8,
        },
        "policy": {
            "hidden_layers": 1, "hidden_width": 16, "epochs": 5, "batch_size": 8, "steps_per_epoch": 2,
        },
        "data": {"reference_episodes": 2, "episode_length": 40},
        "eval": {"n_episodes": 2, "episode_cap": 30},
    }
    for name, values in sections.items():
        document.setdefault(name, {}).update(values)
    return document


def write_config(path, document):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f)
    return str(path)


def randomize(params, seed=0, scale=0.5):
    """Replace every parameter with N(0, scale) values so gradients are far from zero."""
    rng = RngStream(seed)
    for name, tensor in params.items():
        tensor.data = rng.split(name).normal(0.0, scale, size=tensor.shape)


def identity_stats(meta):
    return NormStats(
        state_mean=np.zeros(meta.state_dim),
        state_std=np.ones(meta.state_dim),
        goal_mode=meta.goal_mode,
        goal_subspace=list(meta.goal_subspace),
    )


class ConstantAgent(Agent):
    """Always emits the same action; records what it was shown."""

    def __init__(self, meta, action, history=1):
        self.dataset_meta = meta
        self.stats = identity_stats(meta)
        self.history = history
        self.action = np.asarray(action, dtype=np.float64)
        self.seen_states = []
        self.seen_actions = []
        self.seen_goals = []

    def act(self, history_states, history_actions, goals):
        self.seen_states.append(history_states.copy())
        self.seen_actions.append(history_actions.copy())
        self.seen_goals.append(goals.copy())
        return np.repeat(self.action[None], len(history_states), axis=0)


class Pipeline:
    """Runs the command-line entry point in-process and captures its output."""

    def __init__(self, *argv):
        self.argv = [str(a) for a in argv]

    def run(self):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            try:
                code = main(self.argv)
            except SystemExit as e:
                code = e.code
        return code, out.getvalue(), err.getvalue()


def checked_params(store):
    """Parameters with a non-trivial gradient; softmax ignores key biases, so theirs is identically zero."""
    return {name: t for name, t in store.items() if not name.endswith(".key.bias")}
