"""Deterministic, label-splittable random streams."""
import hashlib
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from src.core.errors import InvalidParameterError

_MAX_SEED = 2**64
_CATEGORICAL_TOL = 1e-9


def _label_entropy(label: str) -> int:
    """Map a label onto 64 bits; stable across interpreter runs, unlike hash()."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class SeedTree:
    """Root seed plus the path of labels naming one consumer of randomness."""

    root_seed: int
    path: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= int(self.root_seed) < _MAX_SEED:
            raise InvalidParameterError(
                f"root_seed must be a 64-bit unsigned integer, got {self.root_seed}"
            )
        object.__setattr__(self, "root_seed", int(self.root_seed))
        object.__setattr__(self, "path", tuple(str(label) for label in self.path))

    def derive(self, label: str) -> "SeedTree":
        """Return the child tree for ``label``."""
        return SeedTree(self.root_seed, (*self.path, str(label)))

    def entropy(self) -> list[int]:
        return [self.root_seed, *(_label_entropy(label) for label in self.path)]

    def stream(self) -> "RandomStream":
        """Open a fresh stream; identical trees always open identical streams."""
        seed_sequence = np.random.SeedSequence(self.entropy())
        return RandomStream(np.random.Generator(np.random.PCG64(seed_sequence)))

    def to_dict(self) -> dict[str, Any]:
        return {"root_seed": self.root_seed, "path": list(self.path)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SeedTree":
        return cls(int(data["root_seed"]), tuple(data.get("path", ())))


def derive(tree: SeedTree, label: str) -> SeedTree:
    """Functional alias for :meth:`SeedTree.derive`."""
    return tree.derive(label)


class RandomStream:
    """Single-owner wrapper around a numpy Generator with the draws the package needs."""

    def __init__(self, generator: np.random.Generator) -> None:
        self.generator = generator

    @property
    def state(self) -> dict[str, Any]:
        """Bit-generator state; feeding it to :meth:`from_state` resumes the stream."""
        return self.generator.bit_generator.state

    @classmethod
    def from_state(cls, state: dict[str, Any]) -> "RandomStream":
        bit_generator = np.random.PCG64()
        bit_generator.state = state
        return cls(np.random.Generator(bit_generator))

    def next_uniform(self, size: Optional[int] = None) -> Any:
        return self.generator.random(size)

    def next_integer(self, n: int) -> int:
        return int(self.generator.integers(n))

    def next_gaussian(self, mean: float = 0.0, std: float = 1.0, size: Optional[int] = None) -> Any:
        if std < 0:
            raise InvalidParameterError(f"Gaussian std must be non-negative, got {std}")
        return self.generator.normal(mean, std, size)

    def next_index(self, cdf: np.ndarray) -> int:
        """
        Inverse-CDF draw from a precomputed cumulative table.

        Args:
            cdf: Non-decreasing cumulative probabilities ending at 1

        Returns:
            Index of the first entry whose cumulative mass exceeds a uniform draw
        """
        u = self.generator.random()
        index = int(np.searchsorted(cdf, u, side="right"))
        if index >= cdf.size:
            # round-off left cdf[-1] just below u; fall back to the last atom with mass
            index = int(np.flatnonzero(np.diff(cdf, prepend=0.0) > 0.0)[-1])
        return index

    def next_categorical(self, weights: Sequence[float] | np.ndarray) -> int:
        """
        Draw an index from a categorical distribution in the given order.

        Raises:
            InvalidParameterError: If weights are negative or do not sum to one
        """
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidParameterError("Categorical weights must be a non-empty vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidParameterError(f"Categorical weights must be finite and non-negative: {w}")
        if abs(w.sum() - 1.0) > _CATEGORICAL_TOL:
            raise InvalidParameterError(f"Categorical weights sum to {w.sum()}, expected 1")
        return self.next_index(np.cumsum(w))

    def next_dirichlet(self, concentration: Sequence[float] | np.ndarray) -> np.ndarray:
        """Dirichlet draw via normalised gamma variates."""
        alpha = np.asarray(concentration, dtype=float)
        if alpha.ndim != 1 or alpha.size == 0:
            raise InvalidParameterError("Dirichlet concentration must be a non-empty vector")
        if np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
            raise InvalidParameterError(f"Dirichlet concentration must be positive: {alpha}")
        gammas = self.generator.standard_gamma(alpha)
        return gammas / gammas.sum()
