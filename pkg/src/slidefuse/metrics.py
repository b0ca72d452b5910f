"""MAP, bpref and P10, following trec_eval conventions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus_io import Qrels, query_sort_key

__all__ = [
    "MEASURES",
    "MetricScores",
    "average_precision",
    "bpref",
    "p10",
    "evaluate_run",
]

MEASURES = ("map", "bpref", "P10")


@dataclass(frozen=True)
class MetricScores:
    per_query: Mapping[str, float] = field(default_factory=dict)

    @property
    def mean(self) -> float:
        if not self.per_query:
            return 0.0
        return sum(self.per_query.values()) / len(self.per_query)


def _doc_ids(ranking) -> Sequence[str]:
    return ranking.doc_ids if hasattr(ranking, "doc_ids") else list(ranking)


def _require_relevant(qrels: Qrels, query_id: str) -> int:
    r = qrels.num_relevant(query_id)
    if r == 0:
        raise ValueError(f"query {query_id} has no judged-relevant documents")
    return r


def average_precision(ranking, qrels: Qrels, query_id: str) -> float:
    """Sum of precision at each retrieved relevant document, over all relevant documents.

    Unjudged documents count as nonrelevant; unretrieved relevant documents add zero.
    """
    r = _require_relevant(qrels, query_id)
    relevant = qrels.relevant(query_id)
    hits = 0
    total = 0.0
    for rank, doc in enumerate(_doc_ids(ranking), start=1):
        if doc in relevant:
            hits += 1
            total += hits / rank
    return total / r


def bpref(ranking, qrels: Qrels, query_id: str) -> float:
    """Preference of relevant over judged-nonrelevant documents; unjudged documents are skipped.

    A relevant document ranked below ``n`` judged nonrelevant ones contributes
    ``1 - min(n, R) / min(R, NN)``.
    """
    r = _require_relevant(qrels, query_id)
    nn = qrels.num_nonrelevant(query_id)
    denom = min(r, nn)
    nonrel_above = 0
    total = 0.0
    for doc in _doc_ids(ranking):
        judged = qrels.judgment(query_id, doc)
        if judged is None:
            continue
        if judged:
            total += 1.0 - min(nonrel_above, r) / denom if nonrel_above else 1.0
        else:
            nonrel_above += 1
    return total / r


def p10(ranking, qrels: Qrels, query_id: str) -> float:
    relevant = qrels.relevant(query_id)
    return sum(1 for doc in list(_doc_ids(ranking))[:10] if doc in relevant) / 10


_FUNCS = {"map": average_precision, "bpref": bpref, "P10": p10}


def evaluate_run(fused: Mapping[str, object], qrels: Qrels) -> dict[str, MetricScores]:
    """Score every query of ``fused`` that has at least one judged-relevant document.

    Returns one :class:`MetricScores` per name in :data:`MEASURES`.
    """
    evaluable = [q for q in sorted(fused, key=query_sort_key) if qrels.num_relevant(q) > 0]
    if not evaluable:
        raise ValueError("no query in the run has a judged-relevant document")
    return {
        name: MetricScores({q: func(fused[q], qrels, q) for q in evaluable})
        for name, func in _FUNCS.items()
    }
