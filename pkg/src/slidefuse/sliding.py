"""SlideFuse: sliding-window probabilities and fusion scoring."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .corpus_io import SystemRun, query_sort_key
from .profiles import RelevanceProfile, raw_probability

__all__ = [
    "DEFAULT_W",
    "Window",
    "FusedList",
    "FusionEnsemble",
    "window_bounds",
    "window_probability",
    "window_probabilities",
    "fuse",
    "fuse_all",
]

DEFAULT_W = 5


class Window(NamedTuple):
    a: int
    b: int

    @property
    def size(self) -> int:
        return self.b - self.a + 1


@dataclass(frozen=True)
class FusedList:
    """Merged ranking for one query, sorted by descending score then ascending doc_id."""

    query_id: str
    entries: tuple[tuple[str, float], ...] = ()

    @classmethod
    def from_scores(cls, query_id: str, scores: Mapping[str, float]) -> "FusedList":
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls(query_id, tuple((d, float(s)) for d, s in ordered))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.entries]

    @property
    def scores(self) -> dict[str, float]:
        return dict(self.entries)


@dataclass(frozen=True)
class FusionEnsemble:
    """Input systems paired with the profiles trained on them."""

    members: tuple[tuple[SystemRun, RelevanceProfile], ...]

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise ValueError("a fusion ensemble needs at least one member")
        tags = [run.system_tag for run, _ in members]
        if len(set(tags)) != len(tags):
            raise ValueError(f"system tags must be distinct, got {tags}")
        for run, profile in members:
            if run.system_tag != profile.system_tag:
                raise ValueError(f"run {run.system_tag!r} paired with profile {profile.system_tag!r}")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[SystemRun, RelevanceProfile]]) -> "FusionEnsemble":
        return cls(tuple(pairs))

    def with_member(self, run: SystemRun, profile: RelevanceProfile) -> "FusionEnsemble":
        return FusionEnsemble(self.members + ((run, profile),))


def window_bounds(p: int, w: int, n: int) -> Window:
    """Clamp ``[p - w, p + w]`` to the positions ``0..n-1`` of a list of length ``n``."""
    if w < 0:
        raise ValueError(f"window half-width must be non-negative, got {w}")
    if not 0 <= p < n:
        raise ValueError(f"position {p} outside result list of length {n}")
    return Window(max(p - w, 0), min(p + w, n - 1))


def window_probability(profile: RelevanceProfile, p: int, w: int, n: int) -> float:
    a, b = window_bounds(p, w, n)
    total = 0.0
    for i in range(a, b + 1):
        total += raw_probability(profile, i)
    return total / (b - a + 1)


def window_probabilities(profile: RelevanceProfile, w: int, n: int) -> np.ndarray:
    """:func:`window_probability` for every position of a length-``n`` list.

    Summation runs left to right across each window, so results are bitwise
    equal to the scalar version.
    """
    if w < 0:
        raise ValueError(f"window half-width must be non-negative, got {w}")
    if n <= 0:
        return np.zeros(0)
    raw = profile.probabilities(n)
    positions = np.arange(n)
    a = np.maximum(positions - w, 0)
    b = np.minimum(positions + w, n - 1)
    total = np.zeros(n)
    for offset in range(-w, w + 1):
        idx = a + (offset + w)
        valid = idx <= b
        total[valid] += raw[idx[valid]]
    return total / (b - a + 1)


class _WindowCache:
    def __init__(self, w: int):
        self.w = w
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    def get(self, member: int, profile: RelevanceProfile, n: int) -> np.ndarray:
        key = (member, n)
        if key not in self._cache:
            self._cache[key] = window_probabilities(profile, self.w, n)
        return self._cache[key]


def _fuse(ensemble: FusionEnsemble, query_id: str, cache: _WindowCache) -> FusedList:
    scores: dict[str, float] = defaultdict(float)
    for m, (run, profile) in enumerate(ensemble.members):
        rl = run.lists.get(query_id)
        if rl is None or len(rl) == 0:
            continue
        probs = cache.get(m, profile, len(rl))
        for entry in rl.entries:
            scores[entry.doc_id] += probs[entry.rank]
    return FusedList.from_scores(query_id, scores)


def fuse(ensemble: FusionEnsemble, query_id: str, w: int = DEFAULT_W) -> FusedList:
    """Score each document by summing its window probabilities over the systems returning it.

    Each system's window is clamped to that system's own list length. A query no
    member answered yields an empty list.
    """
    return _fuse(ensemble, query_id, _WindowCache(w))


def fuse_all(ensemble: FusionEnsemble, query_ids: Sequence[str] | None = None, w: int = DEFAULT_W) -> dict[str, FusedList]:
    """Fuse many queries, reusing window curves across queries with equal list lengths."""
    if query_ids is None:
        query_ids = sorted({q for run, _ in ensemble.members for q in run.lists}, key=query_sort_key)
    cache = _WindowCache(w)
    return {q: _fuse(ensemble, q, cache) for q in query_ids}
