"""
Rollout evaluation of trained agents.

An agent sees the last ``k`` observations (the buffer starts as ``k`` copies
of the first observation), the previous actions, and a goal: the env's fixed
evaluation goal for target-state tasks, or the remaining return-to-go for
return tasks. Episodes of one checkpoint are stepped in lock-step so the
networks run batched; each episode draws only from its own stream
``RngStream(seed).split(f"episode/{i}")``.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ..data import DatasetMeta, GoalMode, NormStats
from ..envs import LineRun, MiniMaze, env_from_meta
from ..numeric import RngStream
from ..policy import PolicyBundle, conditioning_features, load_policy, policy_forward
from ..policy import COMPONENT as POLICY
from ..trajnet import TrajNetBundle, load_trajnet, zero_shot_actions
from ..trajnet import COMPONENT as TRAJNET
from ..utils.checkpoint import read_checkpoint
from ..utils.config import ConfigSection
from ..utils.error import IncompatibleError, UsageError
from ..utils.log import get_logger
from ..utils.run_dir import RunDir, checkpoint_epoch
from .protocol import LAST_K, RunRecord

log = get_logger("evaluation")

DEFAULT_EPISODES = {"minimaze": 100, "linerun": 10}


def thread_count() -> int:
    """``GCPC_THREADS``, default 1."""
    raw = os.environ.get("GCPC_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError:
        raise UsageError(f"GCPC_THREADS must be a positive integer, got '{raw}'")
    if threads < 1:
        raise UsageError(f"GCPC_THREADS must be a positive integer, got '{raw}'")
    return threads


@dataclass
class EvalConfig(ConfigSection):
    """
    Attributes:
        n_episodes (int | None): Episodes per checkpoint; None picks 100 for
            MiniMaze and 10 for LineRun
        episode_cap (int | None): None uses the dataset's max_episode_steps
        target_return (float | None): rtg tasks only; None uses the expert reference
        goal_cell (List[int] | None): MiniMaze only; overrides the layout's goal cell
        last_k (int): Checkpoints considered by the best-of-last protocol
    """

    SECTION = "eval"

    n_episodes: Optional[int] = None
    episode_cap: Optional[int] = None
    target_return: Optional[float] = None
    goal_cell: Optional[List[int]] = None
    last_k: int = LAST_K

    def validate(self) -> None:
        if self.n_episodes is not None and self.n_episodes < 1:
            raise UsageError(f"eval.n_episodes must be >= 1, got {self.n_episodes}")
        if self.episode_cap is not None and self.episode_cap < 1:
            raise UsageError(f"eval.episode_cap must be >= 1, got {self.episode_cap}")
        if self.last_k < 1:
            raise UsageError(f"eval.last_k must be >= 1, got {self.last_k}")
        if self.goal_cell is not None and len(self.goal_cell) != 2:
            raise UsageError(f"eval.goal_cell must be [row, col], got {self.goal_cell}")

    def resolve(self, meta: DatasetMeta) -> "EvalConfig":
        """Fill environment-dependent defaults from ``meta``."""
        return self.replace(
            n_episodes=self.n_episodes or DEFAULT_EPISODES.get(meta.env_id, 10),
            episode_cap=self.episode_cap or meta.max_episode_steps,
        )


class Agent:
    """
    Anything that maps a batch of histories and goals to actions.

    Attributes:
        history (int): Length ``k`` of the observation buffer
        stats (NormStats): Normalization applied to states and goals
        dataset_meta (DatasetMeta): Metadata of the training data
    """

    history: int = 1
    stats: NormStats
    dataset_meta: DatasetMeta

    def act(self, history_states: np.ndarray, history_actions: np.ndarray, goals: np.ndarray) -> np.ndarray:
        """
        Args:
            history_states: Normalized ``[E, k, state_dim]``
            history_actions: ``[E, k, action_dim]``; the last entry is the
                not-yet-chosen current action and is zero
            goals: Normalized ``[E, goal_width]``
        """
        raise NotImplementedError


class PolicyAgent(Agent):
    """A stage-2 policy over its frozen TrajNet."""

    def __init__(self, bundle: PolicyBundle):
        self.bundle = bundle
        self.history = bundle.history
        self.stats = bundle.stats
        self.dataset_meta = bundle.dataset_meta

    def act(self, history_states, history_actions, goals):
        trajnet = self.bundle.trajnet.model if self.bundle.trajnet is not None else None
        cond = conditioning_features(self.bundle.conditioning, trajnet, history_states, goals, history_actions)
        return policy_forward(self.bundle.policy, history_states[:, -1], goals, cond).data


class ZeroShotAgent(Agent):
    """Reads actions off a TrajNet decoder trained with ``include_actions``."""

    def __init__(self, bundle: TrajNetBundle):
        if not bundle.config.include_actions:
            raise IncompatibleError("zero-shot evaluation needs a TrajNet trained with include_actions")
        self.bundle = bundle
        self.history = bundle.config.k
        self.stats = bundle.stats
        self.dataset_meta = bundle.dataset_meta

    def act(self, history_states, history_actions, goals):
        goals = goals if self.bundle.config.goal_conditioning else None
        return zero_shot_actions(self.bundle.model, history_states, history_actions, goals)


def load_agent(path) -> Agent:
    """Load a POLICY checkpoint, or a TRAJNET checkpoint for zero-shot evaluation."""
    component = read_checkpoint(path).component
    if component == POLICY:
        return PolicyAgent(load_policy(path))
    if component == TRAJNET:
        return ZeroShotAgent(load_trajnet(path))
    raise IncompatibleError(f"{path}: cannot evaluate a {component} checkpoint")


@dataclass
class EpisodeResult:
    """
    Attributes:
        ret (float): Undiscounted return
        success (bool): Goal reached (MiniMaze); always False for LineRun
        length (int): Steps taken
        trace (np.ndarray): Observations ``[length, state_dim]`` seen before each action
        aborted (bool): Ended early on a non-finite action
    """

    ret: float = 0.0
    success: bool = False
    length: int = 0
    trace: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    aborted: bool = False


def _goal_values(agent: Agent, goal, accumulated: np.ndarray, t: int) -> np.ndarray:
    """Raw goals for every episode at 1-based timestep ``t``."""
    meta = agent.dataset_meta
    if meta.goal_mode is GoalMode.TARGET_STATE:
        return np.repeat(np.asarray(goal, dtype=np.float64)[None], len(accumulated), axis=0)
    remaining = float(goal) - accumulated
    return (remaining / (meta.max_episode_steps - t + 1.0))[:, None]


def rollout_episodes(env: Union[MiniMaze, LineRun], agent: Agent, goal, rngs: Sequence[RngStream],
                     cap: int) -> List[EpisodeResult]:
    """
    Run one episode per stream in lock-step.

    Args:
        goal: Target position for MiniMaze, target return for LineRun
        cap: Maximum steps per episode
    """
    n = len(rngs)
    k = agent.history
    states = [env.reset(rng) for rng in rngs]
    first = np.stack([env.observe(s) for s in states])
    history = np.repeat(first[:, None], k, axis=1)
    actions = np.zeros((n, k, env.action_dim))
    accumulated = np.zeros(n)
    traces: List[List[np.ndarray]] = [[] for _ in range(n)]
    results = [EpisodeResult() for _ in range(n)]
    live = np.ones(n, dtype=bool)

    for t in range(1, cap + 1):
        idx = np.flatnonzero(live)
        if not len(idx):
            break
        goals = _goal_values(agent, goal, accumulated[idx], t)
        chosen = agent.act(agent.stats.normalize_states(history[idx]), actions[idx], agent.stats.normalize_goal(goals))
        for row, i in enumerate(idx):
            action = chosen[row]
            result = results[i]
            if not np.all(np.isfinite(action)):
                log.warning("episode %d: non-finite action at step %d; counted as failure", i, t)
                result.aborted, result.success = True, False
                live[i] = False
                continue
            action = np.clip(action, -1.0, 1.0)
            traces[i].append(history[i, -1].copy())
            states[i], reward, done = env.step(states[i], action)
            accumulated[i] += reward
            result.length = t
            if isinstance(env, MiniMaze) and reward > 0:
                result.success = True
            actions[i, -1] = action
            history[i] = np.concatenate([history[i, 1:], env.observe(states[i])[None]])
            actions[i] = np.concatenate([actions[i, 1:], np.zeros((1, env.action_dim))])
            if done:
                live[i] = False

    for i, result in enumerate(results):
        result.ret = float(accumulated[i])
        result.trace = np.array(traces[i]).reshape(len(traces[i]), env.state_dim)
    return results


def rollout_episode(env, agent: Agent, goal, rng: RngStream, cap: int) -> EpisodeResult:
    """A single episode; same semantics as ``rollout_episodes``."""
    return rollout_episodes(env, agent, goal, [rng], cap)[0]


def normalized_score(ret: float, references: Optional[Dict[str, float]]) -> float:
    """``100 (R - R_random) / (R_expert - R_random)``."""
    if not references or "random" not in references or "expert" not in references:
        raise IncompatibleError("return-to-go evaluation needs random and expert reference scores")
    span = references["expert"] - references["random"]
    if span == 0:
        raise IncompatibleError("expert and random reference scores coincide")
    return 100.0 * (ret - references["random"]) / span


def evaluate_agent(agent: Agent, config: EvalConfig, seed: int, env=None) -> float:
    """
    Score one agent: success rate x 100 for MiniMaze, normalized return for LineRun.
    """
    meta = agent.dataset_meta
    config = config.resolve(meta)
    env = env or env_from_meta(meta, config.episode_cap)
    rngs = [RngStream(seed).split(f"episode/{i}") for i in range(config.n_episodes)]
    if meta.goal_mode is GoalMode.TARGET_STATE:
        goal = env.eval_goal() if config.goal_cell is None else env.spec.center(tuple(config.goal_cell))
        if config.goal_cell is not None:
            env = MiniMaze(env.spec, goal)
        results = rollout_episodes(env, agent, goal, rngs, config.episode_cap)
        return 100.0 * float(np.mean([r.success for r in results]))
    references = meta.reference_scores
    target = config.target_return if config.target_return is not None else normalized_target(references)
    results = rollout_episodes(env, agent, target, rngs, config.episode_cap)
    return normalized_score(float(np.mean([r.ret for r in results])), references)


def normalized_target(references: Optional[Dict[str, float]]) -> float:
    if not references or "expert" not in references:
        raise IncompatibleError("return-to-go evaluation needs an expert reference score")
    return float(references["expert"])


def evaluate_checkpoint(path, config: EvalConfig, seed: int) -> float:
    """Load ``path`` and score it with ``evaluate_agent``."""
    return evaluate_agent(load_agent(path), config, seed)


def run_checkpoints(run: RunDir, last_k: int = LAST_K) -> List[Path]:
    """
    The last ``last_k`` epoch checkpoints of a run: policy checkpoints when
    present, otherwise TrajNet checkpoints (zero-shot runs).
    """
    found = run.list_checkpoints("policy") or run.list_checkpoints("trajnet")
    if not found:
        raise IncompatibleError(f"missing checkpoints in {run.checkpoints}")
    return found[-last_k:]


def evaluate_run(run: RunDir, config: EvalConfig, eval_seeds: Sequence[int],
                 threads: Optional[int] = None) -> List[RunRecord]:
    """
    Score the run's last checkpoints under each evaluation seed.

    Checkpoints are scored concurrently on ``threads`` workers; metrics are
    appended afterwards in (seed, epoch) order so the log does not depend on
    scheduling.
    """
    threads = threads or thread_count()
    paths = run_checkpoints(run, config.last_k)
    agents = [load_agent(p) for p in paths]
    epochs = [checkpoint_epoch(p) for p in paths]
    training_seed = _training_seed(run)
    jobs = [(seed, agent) for seed in eval_seeds for agent in agents]

    log.info("evaluating %d checkpoints of %s under %d seeds on %d threads",
             len(paths), run.root, len(eval_seeds), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        scores = list(pool.map(lambda job: evaluate_agent(job[1], config, job[0]), jobs))

    records = []
    n_episodes = config.resolve(agents[0].dataset_meta).n_episodes
    for s, seed in enumerate(eval_seeds):
        seed_scores = scores[s * len(agents):(s + 1) * len(agents)]
        for epoch, score in zip(epochs, seed_scores):
            run.metrics.append("eval", seed=seed, epoch=epoch, score=score, n_episodes=n_episodes)
        record = RunRecord(seed=training_seed, scores=seed_scores, epochs=epochs, run=str(run.root),
                           eval_seed=seed)
        log.info("seed %d: scores %s -> %.2f", seed, ["%.2f" % v for v in seed_scores], record.chosen)
        records.append(record)
    return records


def _training_seed(run: RunDir) -> int:
    if not run.config_path.exists():
        return 0
    document: Dict[str, Any] = run.read_config()
    return int(document.get("run", {}).get("seed", 0))
