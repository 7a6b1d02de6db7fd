"""
Deterministic random streams.

Streams wrap numpy's counter-based Philox generator keyed by a 64-bit seed.
Child streams are derived by label: ``split(label)`` keys a new generator with
blake2b(parent seed, label), so any sample, episode or trajectory can be
reproduced from (seed, label) alone regardless of the order in which streams
are created.

Transforms: uniforms are Philox doubles in [0, 1); normals use numpy's
ziggurat transform of the same bit stream; permutations are Fisher-Yates
shuffles of ``arange(n)``.
"""

import hashlib
from typing import Optional, Sequence, Union

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, label: Union[str, int]) -> int:
    """Stream id = hash(parent seed, label), truncated to 64 bits."""
    digest = hashlib.blake2b(f"{seed & MASK64}/{label}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """
    A seeded, splittable random stream.

    Attributes:
        seed (int): The 64-bit key of this stream
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._bitgen = np.random.Philox(key=self.seed)
        self._gen = np.random.Generator(self._bitgen)

    @property
    def counter(self) -> int:
        """Current Philox counter (first word)."""
        return int(self._bitgen.state["state"]["counter"][0])

    def split(self, label: Union[str, int]) -> "RngStream":
        return RngStream(derive_seed(self.seed, label))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def integers(self, low: int, high: int, size=None):
        """Uniform integers in ``[low, high)``."""
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice(self, n: int, size: Optional[int] = None, replace: bool = True) -> np.ndarray:
        return self._gen.choice(n, size=size, replace=replace)

    def pick(self, options: Sequence):
        return options[int(self._gen.integers(0, len(options)))]

    def __repr__(self):
        return f"RngStream(seed={self.seed})"
