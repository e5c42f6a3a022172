"""Mixed continuous / integer / categorical search spaces and their unit-box encoding.

Continuous and integer parameters map affinely (through log space when
flagged) onto one coordinate each; categorical parameters occupy a
one-hot block. Decoding is total on [0, 1]^d: integers round half-up on
the mapped value and clamp, categorical blocks take the argmax with ties
going to the lowest level index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class Continuous:
    name: str
    lo: float
    hi: float
    log: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"{self.name}: need lo < hi, got [{self.lo}, {self.hi}]")
        if self.log and self.lo <= 0:
            raise ValueError(f"{self.name}: log scale requires lo > 0")

    width = 1

    def encode(self, value) -> list[float]:
        v = float(value)
        if not self.lo <= v <= self.hi:
            raise ValueError(f"{self.name}: value {v} outside [{self.lo}, {self.hi}]")
        if self.log:
            return [(math.log(v) - math.log(self.lo)) / (math.log(self.hi) - math.log(self.lo))]
        return [(v - self.lo) / (self.hi - self.lo)]

    def decode(self, block) -> float:
        x = min(1.0, max(0.0, float(block[0])))
        if self.log:
            return math.exp(math.log(self.lo) + x * (math.log(self.hi) - math.log(self.lo)))
        return self.lo + x * (self.hi - self.lo)

    def sample(self, rng: np.random.Generator):
        if self.log:
            return math.exp(rng.uniform(math.log(self.lo), math.log(self.hi)))
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class Integer:
    name: str
    lo: int
    hi: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"{self.name}: need lo < hi, got [{self.lo}, {self.hi}]")

    width = 1

    def encode(self, value) -> list[float]:
        v = int(value)
        if not self.lo <= v <= self.hi:
            raise ValueError(f"{self.name}: value {v} outside [{self.lo}, {self.hi}]")
        return [(v - self.lo) / (self.hi - self.lo)]

    def decode(self, block) -> int:
        x = min(1.0, max(0.0, float(block[0])))
        mapped = self.lo + x * (self.hi - self.lo)
        return int(min(self.hi, max(self.lo, math.floor(mapped + 0.5))))

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.lo, self.hi + 1))


@dataclass(frozen=True)
class Categorical:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        if len(self.levels) < 2:
            raise ValueError(f"{self.name}: need at least 2 levels")
        if len(set(self.levels)) != len(self.levels):
            raise ValueError(f"{self.name}: levels must be unique")

    @property
    def width(self) -> int:
        return len(self.levels)

    def encode(self, value) -> list[float]:
        if value not in self.levels:
            raise ValueError(f"{self.name}: unknown level {value!r}")
        block = [0.0] * len(self.levels)
        block[self.levels.index(value)] = 1.0
        return block

    def decode(self, block) -> str:
        return self.levels[int(np.argmax(block))]

    def sample(self, rng: np.random.Generator) -> str:
        return self.levels[int(rng.integers(0, len(self.levels)))]


ParamSpec = Union[Continuous, Integer, Categorical]


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[ParamSpec, ...]

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("parameter names must be unique")
        if not self.params:
            raise ValueError("search space needs at least one parameter")

    @property
    def encoded_dim(self) -> int:
        return sum(p.width for p in self.params)

    def blocks(self):
        """(param, start, stop) coordinate slices in encoding order."""
        start = 0
        for p in self.params:
            yield p, start, start + p.width
            start += p.width

    def encode(self, assignment: dict) -> np.ndarray:
        missing = [p.name for p in self.params if p.name not in assignment]
        if missing:
            raise ValueError(f"assignment missing parameters: {missing}")
        out: list[float] = []
        for p in self.params:
            out.extend(p.encode(assignment[p.name]))
        return np.asarray(out, dtype=np.float64)

    def decode(self, x: np.ndarray) -> dict:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.encoded_dim,):
            raise ValueError(f"expected vector of length {self.encoded_dim}, got {x.shape}")
        return {p.name: p.decode(x[i:j]) for p, i, j in self.blocks()}

    def snap(self, x: np.ndarray) -> np.ndarray:
        """Project an encoded vector onto the realizable grid (encode of decode)."""
        return self.encode(self.decode(x))

    def snap_batch(self, X: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`snap` over rows."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.clip(X, 0.0, 1.0)
        for p, i, j in self.blocks():
            if isinstance(p, Integer):
                mapped = p.lo + out[:, i] * (p.hi - p.lo)
                ints = np.clip(np.floor(mapped + 0.5), p.lo, p.hi)
                out[:, i] = (ints - p.lo) / (p.hi - p.lo)
            elif isinstance(p, Categorical):
                block = out[:, i:j]
                hot = np.zeros_like(block)
                hot[np.arange(block.shape[0]), np.argmax(block, axis=1)] = 1.0
                out[:, i:j] = hot
        return out

    def sample(self, rng: np.random.Generator) -> dict:
        return {p.name: p.sample(rng) for p in self.params}

    def continuous_coords(self) -> list[int]:
        return [i for p, i, _ in self.blocks() if isinstance(p, Continuous)]
