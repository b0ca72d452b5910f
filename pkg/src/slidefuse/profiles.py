"""Training phase: per-position relevance probabilities for one input system."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .corpus_io import Qrels, SystemRun

__all__ = [
    "RelevanceProfile",
    "build_profile",
    "raw_probability",
    "emit_probability_curve",
    "format_curve",
]


@dataclass(frozen=True, eq=False)
class RelevanceProfile:
    """Relevant-document tallies and support per 0-based position.

    ``support[p]`` counts the training queries whose result list is longer than
    ``p``; ``relevant_counts[p]`` counts those whose document at ``p`` is judged
    relevant.
    """

    system_tag: str
    relevant_counts: np.ndarray
    support: np.ndarray

    def __post_init__(self) -> None:
        rc = np.asarray(self.relevant_counts, dtype=np.int64)
        sp = np.asarray(self.support, dtype=np.int64)
        if rc.shape != sp.shape or rc.ndim != 1:
            raise ValueError("relevant_counts and support must be 1-d vectors of equal length")
        if (rc < 0).any() or (rc > sp).any():
            raise ValueError("relevant_counts must lie in [0, support]")
        if sp.size > 1 and (np.diff(sp) > 0).any():
            raise ValueError("support must be non-increasing in position")
        rc.flags.writeable = False
        sp.flags.writeable = False
        object.__setattr__(self, "relevant_counts", rc)
        object.__setattr__(self, "support", sp)

    @property
    def max_position(self) -> int:
        """Largest position with non-zero support, or -1 for an empty profile."""
        nz = np.flatnonzero(self.support)
        return int(nz[-1]) if nz.size else -1

    def probabilities(self, length: int | None = None) -> np.ndarray:
        """Raw probabilities for positions ``0..length-1`` (zero where unsupported)."""
        if length is None:
            length = self.max_position + 1
        out = np.zeros(length, dtype=float)
        n = min(length, self.support.size)
        sp = self.support[:n]
        mask = sp > 0
        out[:n][mask] = self.relevant_counts[:n][mask] / sp[mask]
        return out


def build_profile(run: SystemRun, training_queries: Iterable[str], qrels: Qrels) -> RelevanceProfile:
    """Tally per-position relevance over the training queries of one run.

    Unjudged documents count as nonrelevant. A training query the run never
    answered behaves as an empty result list.
    """
    training_queries = set(training_queries)
    if not training_queries:
        raise ValueError("build_profile needs at least one training query")
    lists = [run.lists[q] for q in training_queries if q in run.lists]
    length = max((len(rl) for rl in lists), default=0)
    support = np.zeros(length, dtype=np.int64)
    counts = np.zeros(length, dtype=np.int64)
    for rl in lists:
        support[: len(rl)] += 1
        relevant = qrels.relevant(rl.query_id)
        for entry in rl.entries:
            if entry.doc_id in relevant:
                counts[entry.rank] += 1
    return RelevanceProfile(run.system_tag, counts, support)


def raw_probability(profile: RelevanceProfile, p: int) -> float:
    """Fraction of supporting training queries with a relevant document at ``p``; 0 without support."""
    if p < 0 or p >= profile.support.size:
        return 0.0
    s = profile.support[p]
    if s == 0:
        return 0.0
    return float(profile.relevant_counts[p] / s)


def emit_probability_curve(profile: RelevanceProfile, w: int | None = None) -> list[tuple[int, float]]:
    """Rows of ``(position, probability)`` for positions ``0..max_position``.

    With ``w`` given, each value is the sliding-window mean over a list as long
    as the profile; otherwise the raw per-position probabilities.
    """
    length = profile.max_position + 1
    if length == 0:
        return []
    if w is None:
        values = profile.probabilities(length)
    else:
        from .sliding import window_probabilities

        values = window_probabilities(profile, w, length)
    return [(p, float(v)) for p, v in enumerate(values)]


def format_curve(rows: Iterable[tuple[int, float]], header: str = "position\tprobability") -> str:
    lines = [header]
    lines.extend(f"{p}\t{v:.6f}" for p, v in rows)
    return "\n".join(lines) + "\n"
