"""
Stage 2: the goal-conditioned MLP policy over a frozen TrajNet's bottleneck
(or decoded future), its training loop and checkpoints.
"""

from .checkpoint import COMPONENT, PolicyBundle, load_policy, save_policy
from .config import Conditioning, PolicyConfig
from .policynet import (
    Policy, conditioning_features, conditioning_width, decode_explicit_future, policy_forward,
)
from .trainer import PolicyTrainResult, train_policy

__all__ = [
    "COMPONENT",
    "Conditioning",
    "PolicyConfig",
    "Policy",
    "PolicyBundle",
    "PolicyTrainResult",
    "conditioning_features",
    "conditioning_width",
    "decode_explicit_future",
    "load_policy",
    "policy_forward",
    "save_policy",
    "train_policy",
]
