"""Seeded synthetic fusion corpora for demos and tests.

Each system places relevant documents with its own positional prior
``base * exp(-position / decay)``. Weak systems also favour a shared set of
popular nonrelevant "decoy" documents, which rewards agreement-based fusion for
the wrong documents. Judgments are incomplete: every relevant document is
judged, but only the decoys and a sample of the other nonrelevant documents are.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus_io import Qrels, RankedEntry, ResultList, SystemRun

__all__ = ["SystemSpec", "DEFAULT_SYSTEMS", "SyntheticCorpus", "make_corpus", "write_corpus"]


@dataclass(frozen=True)
class SystemSpec:
    tag: str
    base: float
    decay: float
    decoy_rate: float
    score_scale: float = 1.0
    score_offset: float = 0.0


DEFAULT_SYSTEMS = (
    SystemSpec("sysA", base=0.85, decay=25.0, decoy_rate=0.00, score_scale=10.0),
    SystemSpec("sysB", base=0.70, decay=20.0, decoy_rate=0.05, score_scale=1.0),
    SystemSpec("sysC", base=0.50, decay=15.0, decoy_rate=0.10, score_scale=100.0, score_offset=50.0),
    SystemSpec("sysD", base=0.20, decay=10.0, decoy_rate=0.60, score_scale=0.5),
    SystemSpec("sysE", base=0.10, decay=8.0, decoy_rate=0.70, score_scale=3.0, score_offset=-2.0),
    SystemSpec("sysF", base=0.05, decay=5.0, decoy_rate=0.80, score_scale=20.0),
)


@dataclass(frozen=True)
class SyntheticCorpus:
    runs: tuple[SystemRun, ...]
    qrels: Qrels

    @property
    def query_ids(self) -> list[str]:
        return list(self.runs[0].lists)


def _system_list(rng, spec: SystemSpec, qid: str, relevant, decoys, others, length: int) -> ResultList:
    rel = list(rng.permutation(relevant))
    dec = list(rng.permutation(decoys))
    oth = list(rng.permutation(others))
    docs = []
    for pos in range(length):
        u = rng.random()
        if rel and u < spec.base * np.exp(-pos / spec.decay):
            docs.append(rel.pop())
        elif dec and rng.random() < spec.decoy_rate:
            docs.append(dec.pop())
        elif oth:
            docs.append(oth.pop())
        else:
            break
    # Noisy, decreasing raw scores on a system-specific scale.
    raw = np.sort(rng.gamma(2.0, 1.0, size=len(docs)))[::-1]
    scores = spec.score_offset + spec.score_scale * raw
    return ResultList(qid, tuple(RankedEntry(d, i, float(s)) for i, (d, s) in enumerate(zip(docs, scores))))


def make_corpus(
    n_queries: int = 200,
    systems: Sequence[SystemSpec] = DEFAULT_SYSTEMS,
    list_length: int = 100,
    seed: int = 0,
    relevant_range: tuple[int, int] = (5, 30),
    n_decoys: int = 30,
    pool_size: int = 400,
    judged_fraction: float = 0.2,
) -> SyntheticCorpus:
    """Generate ``len(systems)`` runs over ``n_queries`` queries with shared qrels."""
    rng = np.random.default_rng(seed)
    lists: dict[str, dict[str, ResultList]] = {s.tag: {} for s in systems}
    judgments: dict[tuple[str, str], bool] = {}
    for q in range(1, n_queries + 1):
        qid = str(q)
        n_rel = int(rng.integers(relevant_range[0], relevant_range[1] + 1))
        relevant = [f"R{q}-{i:03d}" for i in range(n_rel)]
        decoys = [f"J{q}-{i:03d}" for i in range(n_decoys)]
        others = [f"N{q}-{i:04d}" for i in range(pool_size)]
        for d in relevant:
            judgments[(qid, d)] = True
        for d in decoys:
            judgments[(qid, d)] = False
        for d in others:
            if rng.random() < judged_fraction:
                judgments[(qid, d)] = False
        for spec in systems:
            lists[spec.tag][qid] = _system_list(rng, spec, qid, relevant, decoys, others, list_length)
    runs = tuple(SystemRun(s.tag, lists[s.tag]) for s in systems)
    return SyntheticCorpus(runs, Qrels(judgments))


def write_corpus(corpus: SyntheticCorpus, directory: str | os.PathLike) -> tuple[list[Path], Path]:
    """Write one TREC run file per system plus ``qrels.txt``; returns (run paths, qrels path)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    run_paths = []
    for run in corpus.runs:
        path = directory / f"{run.system_tag}.run"
        with open(path, "w", encoding="utf-8") as fh:
            for qid in run.lists:
                for e in run.lists[qid].entries:
                    fh.write(f"{qid} Q0 {e.doc_id} {e.rank + 1} {e.raw_score!r} {run.system_tag}\n")
        run_paths.append(path)
    qrels_path = directory / "qrels.txt"
    with open(qrels_path, "w", encoding="utf-8") as fh:
        for (qid, doc), rel in corpus.qrels.judgments.items():
            fh.write(f"{qid} 0 {doc} {int(rel)}\n")
    return run_paths, qrels_path
