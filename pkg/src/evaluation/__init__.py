"""
Rollout evaluation, the best-of-last-five checkpoint protocol and multi-seed
aggregation.
"""

from .harness import (
    DEFAULT_EPISODES, Agent, EpisodeResult, EvalConfig, PolicyAgent, ZeroShotAgent, evaluate_agent,
    evaluate_checkpoint, evaluate_run, load_agent, normalized_score, normalized_target, rollout_episode,
    rollout_episodes, run_checkpoints, thread_count,
)
from .protocol import LAST_K, AggregateReport, RunRecord, aggregate_seeds, best_of_last_k, interquartile_mean

__all__ = [
    # Rollouts
    "Agent",
    "DEFAULT_EPISODES",
    "EpisodeResult",
    "EvalConfig",
    "PolicyAgent",
    "ZeroShotAgent",
    "evaluate_agent",
    "evaluate_checkpoint",
    "evaluate_run",
    "load_agent",
    "normalized_score",
    "normalized_target",
    "rollout_episode",
    "rollout_episodes",
    "run_checkpoints",
    "thread_count",
    # Protocol
    "LAST_K",
    "AggregateReport",
    "RunRecord",
    "aggregate_seeds",
    "best_of_last_k",
    "interquartile_mean",
]
