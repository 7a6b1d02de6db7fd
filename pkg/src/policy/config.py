"""Policy network hyperparameters."""

from dataclasses import dataclass
from enum import Enum

from ..numeric import Activation
from ..utils.config import ConfigSection
from ..utils.error import UsageError


class Conditioning(str, Enum):
    BOTTLENECK = "bottleneck"
    EXPLICIT_FUTURE = "explicit_future"
    NONE = "none"

    @classmethod
    def parse(cls, value) -> "Conditioning":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace("-", "_"))
        except ValueError:
            raise UsageError(f"unknown conditioning '{value}'; valid: bottleneck, explicit-future, none")


@dataclass
class PolicyConfig(ConfigSection):
    SECTION = "policy"

    hidden_layers: int = 2
    hidden_width: int = 256
    activation: Activation = Activation.RELU
    dropout: float = 0.0
    learning_rate: float = 1e-3
    epochs: int = 20
    batch_size: int = 256
    steps_per_epoch: int = 20
    conditioning: Conditioning = Conditioning.BOTTLENECK
    retain_checkpoints: int = 5

    def __post_init__(self):
        self.conditioning = Conditioning.parse(self.conditioning)
        try:
            self.activation = Activation(self.activation)
        except ValueError:
            raise UsageError(f"unknown policy.activation '{self.activation}'; valid: gelu, relu")

    def validate(self) -> None:
        if self.hidden_layers < 1 or self.hidden_width < 1:
            raise UsageError("policy needs at least one hidden layer of width >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise UsageError(f"policy.dropout must be in [0, 1), got {self.dropout}")
        for name in ("epochs", "batch_size", "steps_per_epoch", "retain_checkpoints"):
            if getattr(self, name) < 1:
                raise UsageError(f"policy.{name} must be >= 1")
