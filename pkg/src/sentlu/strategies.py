"""Traversal policies that resolve the encoder's start, extension and restart choices."""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from .graph import LabeledGraph


class Strategy(str, enum.Enum):
    RANDOM = "random"
    MIN_DEGREE = "min-degree"
    MAX_DEGREE = "max-degree"
    ANCHOR = "anchor"

    @classmethod
    def parse(cls, name: "str | Strategy") -> "Strategy":
        if isinstance(name, Strategy):
            return name
        key = name.strip().lower().replace("_", "-")
        aliases = {"min": "min-degree", "max": "max-degree", "mindegree": "min-degree",
                   "maxdegree": "max-degree"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(
                f"unknown strategy {name!r}; expected one of {[s.value for s in cls]}"
            ) from None

    def __str__(self) -> str:
        return self.value


ALL_STRATEGIES = tuple(Strategy)


def make_rng(*key: int) -> np.random.Generator:
    """Counter-based generator keyed by a tuple of non-negative ints.

    Keying by (seed, graph index, permutation index) lets any worker
    reproduce the stream of any work item independently.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def _uniform(candidates: Sequence[int], rng: np.random.Generator) -> int:
    if len(candidates) == 1:
        return candidates[0]
    return candidates[int(rng.integers(len(candidates)))]


def _extreme(g: LabeledGraph, candidates: Sequence[int], rng: np.random.Generator,
             lowest: bool) -> int:
    deg = g.degrees
    target = min(deg[v] for v in candidates) if lowest else max(deg[v] for v in candidates)
    return _uniform([v for v in candidates if deg[v] == target], rng)


def _check(candidates: Sequence[int]) -> list[int]:
    if not candidates:
        raise ValueError("empty candidate set")
    return sorted(candidates)


def choose_start(strategy: Strategy, g: LabeledGraph, candidates: Sequence[int],
                 rng: np.random.Generator) -> int:
    cands = _check(candidates)
    if strategy is Strategy.RANDOM:
        return _uniform(cands, rng)
    return _extreme(g, cands, rng, lowest=strategy is Strategy.MIN_DEGREE)


def choose_extension(strategy: Strategy, g: LabeledGraph, current: int,
                     candidates: Sequence[int], rng: np.random.Generator) -> int:
    cands = _check(candidates)
    if strategy is Strategy.RANDOM:
        return _uniform(cands, rng)
    return _extreme(g, cands, rng, lowest=strategy is not Strategy.MAX_DEGREE)


def choose_restart(strategy: Strategy, g: LabeledGraph, candidates: Sequence[int],
                   rng: np.random.Generator) -> int:
    # same degree rule as the start choice; static degrees throughout
    return choose_start(strategy, g, candidates, rng)
