"""Comparison fusers: CombMNZ, ProbFuse and SegFuse.

ProbFuse uses the "all queries" estimator: the per-query fraction of relevant
documents in a segment, averaged over every training query. SegFuse segment
sizes grow as ``10 * 2**(k-1) - 5`` and its score weights the segment
probability by ``1 + normalized score``.
"""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .corpus_io import Qrels, RankedEntry, ResultList, SystemRun
from .sliding import FusedList

__all__ = [
    "DEFAULT_SEGMENTS",
    "SegmentProfile",
    "normalize_scores",
    "combmnz",
    "equal_segment_lengths",
    "segfuse_sizes",
    "segfuse_boundaries",
    "probfuse_train",
    "probfuse_fuse",
    "segfuse_train",
    "segfuse_fuse",
]

DEFAULT_SEGMENTS = 25


@dataclass(frozen=True)
class SegmentProfile:
    """Per-segment probability of relevance for one input system.

    ``boundaries`` hold segment start positions. When ``segments`` is set the
    profile is a ProbFuse profile and every list is cut into that many equal
    segments of its own length; ``boundaries`` then describe the longest
    training list. Otherwise ``boundaries`` are fixed positions used for any list
    and positions at or past ``extent`` fall outside every trained segment.
    """

    system_tag: str
    boundaries: tuple[int, ...]
    seg_probability: tuple[float, ...]
    segments: int | None = None
    extent: int | None = None

    def __post_init__(self) -> None:
        if self.boundaries and self.boundaries[0] != 0:
            raise ValueError("segment boundaries must start at 0")
        if any(b >= c for b, c in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError("segment boundaries must be strictly increasing")
        if any(not 0.0 <= p <= 1.0 for p in self.seg_probability):
            raise ValueError("segment probabilities must lie in [0, 1]")

    def segment_index(self, p: int, n: int) -> int:
        """0-based segment holding position ``p`` of a list of length ``n``."""
        if self.segments is not None:
            return _equal_segment_index(p, n, self.segments)
        if self.extent is not None and p >= self.extent:
            return len(self.boundaries)
        return bisect.bisect_right(self.boundaries, p) - 1

    def probability(self, k: int) -> float:
        return self.seg_probability[k] if 0 <= k < len(self.seg_probability) else 0.0


def normalize_scores(result_list: ResultList) -> ResultList:
    """Min-max rescale raw scores into [0, 1]; a constant list maps to all 1.0."""
    if len(result_list) == 0:
        raise ValueError(f"cannot normalize empty result list for query {result_list.query_id}")
    scores = result_list.scores
    lo, hi = min(scores), max(scores)
    if hi == lo:
        normed = [1.0] * len(scores)
    else:
        normed = [(s - lo) / (hi - lo) for s in scores]
    return ResultList(
        result_list.query_id,
        tuple(RankedEntry(e.doc_id, e.rank, s) for e, s in zip(result_list.entries, normed)),
    )


def combmnz(lists: Iterable[ResultList]) -> FusedList:
    """Sum of min-max normalized scores times the number of lists returning the document."""
    lists = list(lists)
    if not lists:
        raise ValueError("combmnz needs at least one result list")
    query_ids = {rl.query_id for rl in lists}
    if len(query_ids) != 1:
        raise ValueError(f"combmnz lists must share one query id, got {sorted(query_ids)}")
    total: dict[str, float] = defaultdict(float)
    hits: dict[str, int] = defaultdict(int)
    for rl in lists:
        if len(rl) == 0:
            continue
        for entry in normalize_scores(rl).entries:
            total[entry.doc_id] += entry.raw_score
            hits[entry.doc_id] += 1
    return FusedList.from_scores(query_ids.pop(), {d: total[d] * hits[d] for d in total})


def equal_segment_lengths(n: int, x: int) -> list[int]:
    """Lengths of ``x`` equal segments of ``n`` positions; the last absorbs the remainder."""
    if x < 1:
        raise ValueError(f"segment count must be >= 1, got {x}")
    base = n // x
    return [base] * (x - 1) + [n - base * (x - 1)]


def _equal_segment_index(p: int, n: int, x: int) -> int:
    base = n // x
    if base == 0:
        return x - 1
    return min(p // base, x - 1)


def segfuse_sizes(count: int) -> list[int]:
    return [10 * 2 ** (k - 1) - 5 for k in range(1, count + 1)]


def segfuse_boundaries(n: int) -> tuple[int, ...]:
    """Start positions of the SegFuse segments needed to cover ``n`` positions."""
    starts = []
    pos, k = 0, 1
    while pos < n:
        starts.append(pos)
        pos += 10 * 2 ** (k - 1) - 5
        k += 1
    return tuple(starts)


def _segment_estimates(
    run: SystemRun,
    training_queries: Iterable[str],
    qrels: Qrels,
    count: int,
    segments_of,
) -> tuple[float, ...]:
    """Mean over training queries of (relevant in segment k) / (segment k length in that list)."""
    training_queries = list(dict.fromkeys(training_queries))
    if not training_queries:
        raise ValueError("training needs at least one training query")
    totals = [0.0] * count
    for qid in training_queries:
        rl = run.lists.get(qid)
        if rl is None or len(rl) == 0:
            continue
        relevant = qrels.relevant(qid)
        hits = [0] * count
        sizes = [0] * count
        for entry in rl.entries:
            k = segments_of(entry.rank, len(rl))
            if k >= count:
                continue
            sizes[k] += 1
            if entry.doc_id in relevant:
                hits[k] += 1
        for k in range(count):
            if sizes[k]:
                totals[k] += hits[k] / sizes[k]
    return tuple(t / len(training_queries) for t in totals)


def probfuse_train(run: SystemRun, training_queries: Iterable[str], qrels: Qrels, x: int = DEFAULT_SEGMENTS) -> SegmentProfile:
    if x < 1:
        raise ValueError(f"segment count must be >= 1, got {x}")
    training_queries = list(training_queries)
    probs = _segment_estimates(run, training_queries, qrels, x, lambda p, n: _equal_segment_index(p, n, x))
    longest = max((len(run.lists[q]) for q in training_queries if q in run.lists), default=0)
    starts = []
    pos = 0
    for length in equal_segment_lengths(longest, x):
        if not starts or pos > starts[-1]:
            starts.append(pos)
        pos += length
    return SegmentProfile(run.system_tag, tuple(starts) or (0,), probs, segments=x)


def _by_tag(profiles: Mapping[str, SegmentProfile] | Iterable[SegmentProfile]) -> Mapping[str, SegmentProfile]:
    if isinstance(profiles, Mapping):
        return profiles
    return {p.system_tag: p for p in profiles}


def _query_id(lists: Mapping[str, ResultList]) -> str:
    ids = {rl.query_id for rl in lists.values()}
    if len(ids) != 1:
        raise ValueError(f"lists must share one query id, got {sorted(ids)}")
    return ids.pop()


def probfuse_fuse(
    lists: Mapping[str, ResultList],
    profiles: Mapping[str, SegmentProfile] | Iterable[SegmentProfile],
    x: int | None = None,
) -> FusedList:
    """Sum over systems of ``P(segment k) / k`` with 1-based segment index ``k``.

    ``lists`` maps system tags to that system's list for the query. ``x``
    defaults to the segment count each profile was trained with.
    """
    profiles = _by_tag(profiles)
    scores: dict[str, float] = defaultdict(float)
    for tag, rl in lists.items():
        profile = profiles[tag]
        segments = x if x is not None else profile.segments
        n = len(rl)
        for entry in rl.entries:
            if segments is not None:
                k = _equal_segment_index(entry.rank, n, segments)
            else:
                k = profile.segment_index(entry.rank, n)
            scores[entry.doc_id] += profile.probability(k) / (k + 1)
    return FusedList.from_scores(_query_id(lists), scores)


def segfuse_train(run: SystemRun, training_queries: Iterable[str], qrels: Qrels) -> SegmentProfile:
    training_queries = list(training_queries)
    longest = max((len(run.lists[q]) for q in training_queries if q in run.lists), default=0)
    boundaries = segfuse_boundaries(longest) or (0,)
    probs = _segment_estimates(
        run,
        training_queries,
        qrels,
        len(boundaries),
        lambda p, n: bisect.bisect_right(boundaries, p) - 1,
    )
    extent = boundaries[-1] + segfuse_sizes(len(boundaries))[-1]
    return SegmentProfile(run.system_tag, boundaries, probs, extent=extent)


def segfuse_fuse(
    lists: Mapping[str, ResultList],
    profiles: Mapping[str, SegmentProfile] | Iterable[SegmentProfile],
) -> FusedList:
    """Sum over systems of ``P(segment k) * (1 + min-max normalized score)``.

    Positions past the segments seen in training contribute nothing.
    """
    profiles = _by_tag(profiles)
    scores: dict[str, float] = defaultdict(float)
    for tag, rl in lists.items():
        if len(rl) == 0:
            continue
        profile = profiles[tag]
        for entry in normalize_scores(rl).entries:
            k = profile.segment_index(entry.rank, len(rl))
            scores[entry.doc_id] += profile.probability(k) * (1.0 + entry.raw_score)
    return FusedList.from_scores(_query_id(lists), scores)
