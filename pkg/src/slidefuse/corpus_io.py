"""TREC run file and qrels parsing/serialization.

Internal ranks are 0-based. The rank column written to run files is 1-based,
as trec_eval expects.
"""

from __future__ import annotations

import io
import os
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, NamedTuple, Union

__all__ = [
    "ParseError",
    "RankedEntry",
    "ResultList",
    "SystemRun",
    "Qrels",
    "parse_run_file",
    "parse_qrels",
    "read_run_file",
    "read_qrels",
    "write_run_file",
    "query_sort_key",
]

Source = Union[str, bytes, IO[str], IO[bytes], Iterable[str], Iterable[bytes]]


class ParseError(ValueError):
    """Malformed input line. Carries the 1-based line number and the source name."""

    def __init__(self, message: str, line: int, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(self._render())

    def _render(self) -> str:
        where = f"{self.source}:{self.line}" if self.source else f"line {self.line}"
        return f"{where}: {self.message}"

    def with_source(self, source: str) -> "ParseError":
        return ParseError(self.message, self.line, source)


class RankedEntry(NamedTuple):
    doc_id: str
    rank: int
    raw_score: float


@dataclass(frozen=True)
class ResultList:
    """One system's ordered answer to one query."""

    query_id: str
    entries: tuple[RankedEntry, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for i, entry in enumerate(self.entries):
            if entry.rank != i:
                raise ValueError(
                    f"query {self.query_id}: entry {entry.doc_id} has rank {entry.rank}, expected {i}"
                )
            if entry.doc_id in seen:
                raise ValueError(f"query {self.query_id}: duplicate doc_id {entry.doc_id}")
            seen.add(entry.doc_id)

    @classmethod
    def from_ranking(cls, query_id: str, doc_ids: Iterable[str], scores: Iterable[float] | None = None) -> "ResultList":
        """Build a list from doc ids already in rank order.

        Without ``scores`` the raw scores descend from the list length to 1.
        """
        doc_ids = list(doc_ids)
        if scores is None:
            scores = [float(len(doc_ids) - i) for i in range(len(doc_ids))]
        entries = tuple(RankedEntry(d, i, float(s)) for i, (d, s) in enumerate(zip(doc_ids, scores, strict=True)))
        return cls(query_id, entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    @property
    def scores(self) -> list[float]:
        return [e.raw_score for e in self.entries]


@dataclass(frozen=True)
class SystemRun:
    """All result lists produced by one input system (one topfile)."""

    system_tag: str
    lists: Mapping[str, ResultList] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for qid, rl in self.lists.items():
            if rl.query_id != qid:
                raise ValueError(f"result list for {rl.query_id} stored under key {qid}")

    @property
    def query_ids(self) -> list[str]:
        return sorted(self.lists, key=query_sort_key)

    def get(self, query_id: str) -> ResultList | None:
        return self.lists.get(query_id)


class Qrels:
    """Binary relevance judgments. Pairs that were never judged are reported as ``None``."""

    def __init__(self, judgments: Mapping[tuple[str, str], bool] | None = None):
        self._judgments: dict[tuple[str, str], bool] = dict(judgments or {})
        self._relevant: dict[str, set[str]] = defaultdict(set)
        self._nonrelevant: dict[str, set[str]] = defaultdict(set)
        for (qid, doc), rel in self._judgments.items():
            (self._relevant if rel else self._nonrelevant)[qid].add(doc)

    def __len__(self) -> int:
        return len(self._judgments)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Qrels) and self._judgments == other._judgments

    def __repr__(self) -> str:
        return f"Qrels({len(self._judgments)} judgments over {len(self.query_ids)} queries)"

    @property
    def judgments(self) -> Mapping[tuple[str, str], bool]:
        return self._judgments

    @property
    def query_ids(self) -> list[str]:
        return sorted({qid for qid, _ in self._judgments}, key=query_sort_key)

    def judgment(self, query_id: str, doc_id: str) -> bool | None:
        """True for relevant, False for judged nonrelevant, None when unjudged."""
        return self._judgments.get((query_id, doc_id))

    def is_relevant(self, query_id: str, doc_id: str) -> bool:
        return self._judgments.get((query_id, doc_id), False)

    def relevant(self, query_id: str) -> frozenset[str]:
        return frozenset(self._relevant.get(query_id, ()))

    def nonrelevant(self, query_id: str) -> frozenset[str]:
        return frozenset(self._nonrelevant.get(query_id, ()))

    def num_relevant(self, query_id: str) -> int:
        return len(self._relevant.get(query_id, ()))

    def num_nonrelevant(self, query_id: str) -> int:
        return len(self._nonrelevant.get(query_id, ()))


_NUMERIC = re.compile(r"^\d+$")


def query_sort_key(query_id: str) -> tuple:
    """Numeric query ids sort numerically and before any non-numeric ids."""
    if _NUMERIC.match(query_id):
        return (0, int(query_id), query_id)
    return (1, 0, query_id)


def _lines(source: Source) -> Iterable[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def _data_lines(source: Source):
    for lineno, line in enumerate(_lines(source), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped.split()


def parse_run_file(source: Source) -> SystemRun:
    """Parse ``query_id Q0 doc_id rank score tag`` lines.

    Lists are re-ranked by descending score; the file's rank column only breaks
    score ties, then doc_id. Ranks are reassigned as contiguous 0-based positions.
    """
    rows: dict[str, list[tuple[float, int, str]]] = defaultdict(list)
    seen: set[tuple[str, str]] = set()
    tag = None
    for lineno, fields in _data_lines(source):
        if len(fields) != 6:
            raise ParseError(f"expected 6 fields, found {len(fields)}", lineno)
        qid, _, doc, rank_s, score_s, line_tag = fields
        try:
            score = float(score_s)
        except ValueError:
            raise ParseError(f"non-numeric score {score_s!r}", lineno) from None
        if score != score:
            raise ParseError("score is NaN", lineno)
        try:
            rank = int(rank_s)
        except ValueError:
            raise ParseError(f"non-integer rank {rank_s!r}", lineno) from None
        if (qid, doc) in seen:
            raise ParseError(f"duplicate document {doc} for query {qid}", lineno)
        seen.add((qid, doc))
        if tag is None:
            tag = line_tag
        rows[qid].append((score, rank, doc))

    lists = {}
    for qid, items in rows.items():
        items.sort(key=lambda t: (-t[0], t[1], t[2]))
        lists[qid] = ResultList(qid, tuple(RankedEntry(doc, i, score) for i, (score, _, doc) in enumerate(items)))
    return SystemRun(tag or "", lists)


def parse_qrels(source: Source) -> Qrels:
    """Parse ``query_id iteration doc_id judgment`` lines; judgment > 0 means relevant."""
    judgments: dict[tuple[str, str], bool] = {}
    for lineno, fields in _data_lines(source):
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, found {len(fields)}", lineno)
        qid, _, doc, judgment_s = fields
        try:
            relevant = int(judgment_s) > 0
        except ValueError:
            raise ParseError(f"non-integer judgment {judgment_s!r}", lineno) from None
        key = (qid, doc)
        if key in judgments and judgments[key] != relevant:
            raise ParseError(f"conflicting judgments for ({qid}, {doc})", lineno)
        judgments[key] = relevant
    return Qrels(judgments)


def _read(path: str | os.PathLike, parser):
    with open(path, encoding="utf-8") as fh:
        try:
            return parser(fh)
        except ParseError as exc:
            raise exc.with_source(os.fspath(path)) from None


def read_run_file(path: str | os.PathLike) -> SystemRun:
    return _read(path, parse_run_file)


def read_qrels(path: str | os.PathLike) -> Qrels:
    return _read(path, parse_qrels)


def _format_score(score: float) -> str:
    return repr(float(score))


def write_run_file(fused: Mapping[str, "object"], tag: str) -> bytes:
    """Serialize fused rankings to TREC run lines.

    ``fused`` maps query ids to anything exposing ``entries`` as ``(doc_id, score)``
    pairs (a :class:`~slidefuse.sliding.FusedList`). Queries are written in
    :func:`query_sort_key` order and documents by descending score, then doc_id.
    """
    out = io.StringIO()
    for qid in sorted(fused, key=query_sort_key):
        entries = sorted(fused[qid].entries, key=lambda e: (-e[1], e[0]))
        for rank, (doc, score) in enumerate(entries, start=1):
            out.write(f"{qid} Q0 {doc} {rank} {_format_score(score)} {tag}\n")
    return out.getvalue().encode("utf-8")
