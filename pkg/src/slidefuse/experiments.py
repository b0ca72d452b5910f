"""Experiment harness: shuffled training splits, four-way fusion comparison,
training-size sensitivity and paired significance tests.

Config files are TOML::

    qrels = "qrels.txt"          # paths are relative to the config file
    seed = 7
    shuffles = 5
    training_fraction = 0.10
    w = 5
    segments = 25
    fractions = [0.1, 0.2, 0.3, 0.4, 0.5]   # sweep only
    measure = "map"                           # sweep only: map, bpref or P10

    [[groups]]
    name = "first"                            # optional
    runs = ["a.run", "b.run", "c.run"]
"""

from __future__ import annotations

import io
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .baselines import DEFAULT_SEGMENTS, combmnz, probfuse_fuse, probfuse_train, segfuse_fuse, segfuse_train
from .corpus_io import Qrels, SystemRun, query_sort_key, read_qrels, read_run_file
from .metrics import MEASURES, MetricScores, evaluate_run
from .profiles import build_profile
from .sliding import DEFAULT_W, FusionEnsemble, fuse_all

__all__ = [
    "ALGORITHMS",
    "DEFAULT_FRACTIONS",
    "ConfigError",
    "RunGroup",
    "ExperimentConfig",
    "TTestResult",
    "ExperimentReport",
    "SweepReport",
    "load_config",
    "load_groups",
    "split_queries",
    "fuse_split",
    "run_experiment",
    "run_loaded_experiment",
    "coefficient_of_variation",
    "training_size_sweep",
    "paired_t_test",
]

ALGORITHMS = ("CombMNZ", "ProbFuse", "SegFuse", "SlideFuse")
DEFAULT_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5)
MEASURE_TITLES = {"map": "MAP", "bpref": "bpref", "P10": "P10"}
_ORDINALS = ("first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth")


class ConfigError(ValueError):
    def __init__(self, message: str, keys: Sequence[str] = ()):
        self.keys = tuple(keys)
        super().__init__(message + (f": {', '.join(self.keys)}" if self.keys else ""))


@dataclass(frozen=True)
class RunGroup:
    name: str
    runs: tuple[str, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    run_groups: tuple[RunGroup, ...]
    qrels_path: str
    shuffle_count: int = 5
    training_fraction: float = 0.10
    w: int = DEFAULT_W
    probfuse_segments: int = DEFAULT_SEGMENTS
    seed: int = 0
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    measure: str = "map"

    def __post_init__(self) -> None:
        problems = []
        if not self.run_groups:
            problems.append("groups")
        seen: set[str] = set()
        for group in self.run_groups:
            paths = {os.path.normpath(p) for p in group.runs}
            if paths & seen:
                raise ConfigError("a topfile appears in more than one group", sorted(paths & seen))
            seen |= paths
        if not 0 < self.training_fraction < 1:
            problems.append("training_fraction")
        if self.shuffle_count < 1:
            problems.append("shuffles")
        if self.w < 0:
            problems.append("w")
        if self.seed < 0:
            problems.append("seed")
        if self.probfuse_segments < 1:
            problems.append("segments")
        if not self.fractions or any(not 0 < f < 1 for f in self.fractions):
            problems.append("fractions")
        if self.measure not in MEASURES:
            problems.append("measure")
        if problems:
            raise ConfigError("invalid config values", problems)


_KEYS = {"qrels", "seed", "shuffles", "training_fraction", "w", "segments", "fractions", "measure", "groups"}


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib

    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    unknown = sorted(set(raw) - _KEYS)
    if unknown:
        raise ConfigError("unknown config keys", unknown)
    missing = [k for k in ("qrels", "groups") if k not in raw]
    if missing:
        raise ConfigError("missing config keys", missing)
    base = path.parent

    def resolve(p) -> str:
        if not isinstance(p, str):
            raise ConfigError("paths must be strings", [repr(p)])
        return str(base / p)

    groups = []
    if not isinstance(raw["groups"], list):
        raise ConfigError("groups must be an array of tables", ["groups"])
    for i, g in enumerate(raw["groups"]):
        if not isinstance(g, dict) or "runs" not in g:
            raise ConfigError("each group needs a runs list", [f"groups[{i}]"])
        extra = sorted(set(g) - {"name", "runs"})
        if extra:
            raise ConfigError("unknown group keys", [f"groups[{i}].{k}" for k in extra])
        name = g.get("name", _ORDINALS[i] if i < len(_ORDINALS) else f"run{i + 1}")
        groups.append(RunGroup(str(name), tuple(resolve(p) for p in g["runs"])))

    typed = {"seed": int, "shuffles": int, "w": int, "segments": int, "training_fraction": (int, float)}
    bad = [k for k, t in typed.items() if k in raw and (isinstance(raw[k], bool) or not isinstance(raw[k], t))]
    if "fractions" in raw and not (
        isinstance(raw["fractions"], list) and all(isinstance(f, (int, float)) for f in raw["fractions"])
    ):
        bad.append("fractions")
    if "measure" in raw and not isinstance(raw["measure"], str):
        bad.append("measure")
    if bad:
        raise ConfigError("wrongly typed config values", bad)

    return ExperimentConfig(
        run_groups=tuple(groups),
        qrels_path=resolve(raw["qrels"]),
        shuffle_count=raw.get("shuffles", 5),
        training_fraction=float(raw.get("training_fraction", 0.10)),
        w=raw.get("w", DEFAULT_W),
        probfuse_segments=raw.get("segments", DEFAULT_SEGMENTS),
        seed=raw.get("seed", 0),
        fractions=tuple(float(f) for f in raw.get("fractions", DEFAULT_FRACTIONS)),
        measure=raw.get("measure", "map"),
    )


def load_groups(config: ExperimentConfig) -> tuple[dict[str, list[SystemRun]], Qrels]:
    """Parse every topfile and the qrels named by ``config``."""
    qrels = read_qrels(config.qrels_path)
    cache: dict[str, SystemRun] = {}
    groups = {}
    for group in config.run_groups:
        if len(group.runs) < 2:
            raise ValueError(f"group {group.name} needs at least 2 systems, has {len(group.runs)}")
        runs = []
        for path in group.runs:
            if path not in cache:
                cache[path] = read_run_file(path)
            runs.append(cache[path])
        groups[group.name] = runs
    return groups, qrels


def split_queries(
    query_ids: Sequence[str], training_fraction: float, seed: int, shuffle_index: int
) -> tuple[list[str], list[str]]:
    """Shuffle with a PCG64 stream keyed by ``(seed, shuffle_index)``; the first
    ``floor(fraction * Q)`` queries (at least one) train, the rest test."""
    query_ids = list(query_ids)
    if seed < 0 or shuffle_index < 0:
        raise ValueError("seed and shuffle index must be non-negative")
    if len(query_ids) < 2:
        raise ValueError("need at least 2 queries to split into training and test sets")
    if not 0 < training_fraction < 1:
        raise ValueError(f"training fraction must be in (0, 1), got {training_fraction}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, shuffle_index])))
    order = rng.permutation(len(query_ids))
    shuffled = [query_ids[i] for i in order]
    # tolerance keeps e.g. 0.29 * 100 from flooring to 28
    n_train = min(max(1, math.floor(training_fraction * len(query_ids) + 1e-9)), len(query_ids) - 1)
    return shuffled[:n_train], shuffled[n_train:]


def _check_tags(systems: Sequence[SystemRun]) -> None:
    tags = [r.system_tag for r in systems]
    if len(set(tags)) != len(tags):
        raise ValueError(f"systems in a group must have distinct tags, got {tags}")


def fuse_split(
    systems: Sequence[SystemRun],
    qrels: Qrels,
    training: Sequence[str],
    test: Sequence[str],
    w: int = DEFAULT_W,
    segments: int = DEFAULT_SEGMENTS,
    algorithms: Sequence[str] = ALGORITHMS,
) -> dict[str, dict]:
    """Train on ``training`` and fuse every ``test`` query with each algorithm.

    Returns ``{algorithm: {query_id: FusedList}}``. CombMNZ ignores the training queries.
    """
    _check_tags(systems)
    out: dict[str, dict] = {}
    if "CombMNZ" in algorithms:
        out["CombMNZ"] = {
            q: combmnz([r.lists[q] for r in systems if q in r.lists])
            for q in test
            if any(q in r.lists for r in systems)
        }
    by_query = {q: {r.system_tag: r.lists[q] for r in systems if q in r.lists} for q in test}
    by_query = {q: lists for q, lists in by_query.items() if lists}
    if "ProbFuse" in algorithms:
        profiles = {r.system_tag: probfuse_train(r, training, qrels, segments) for r in systems}
        out["ProbFuse"] = {q: probfuse_fuse(lists, profiles) for q, lists in by_query.items()}
    if "SegFuse" in algorithms:
        profiles = {r.system_tag: segfuse_train(r, training, qrels) for r in systems}
        out["SegFuse"] = {q: segfuse_fuse(lists, profiles) for q, lists in by_query.items()}
    if "SlideFuse" in algorithms:
        ensemble = FusionEnsemble(tuple((r, build_profile(r, training, qrels)) for r in systems))
        out["SlideFuse"] = fuse_all(ensemble, list(by_query), w=w)
    return {a: out[a] for a in algorithms}


def _group_queries(systems: Sequence[SystemRun]) -> list[str]:
    return sorted({q for r in systems for q in r.lists}, key=query_sort_key)


def _evaluate_shuffle(systems, qrels, query_ids, fraction, seed, shuffle_index, w, segments):
    training, test = split_queries(query_ids, fraction, seed, shuffle_index)
    fused = fuse_split(systems, qrels, training, test, w=w, segments=segments)
    return {algo: evaluate_run(runs, qrels) for algo, runs in fused.items()}


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class TTestResult:
    t: float
    n: int
    significant_5: bool
    significant_1: bool
    degenerate: bool = False

    @property
    def flag(self) -> str:
        if self.significant_1:
            return "**"
        if self.significant_5:
            return "*"
        return ""


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-tailed paired t-test of ``a - b`` with ``n - 1`` degrees of freedom.

    Constant non-zero differences give an infinite t, flagged significant at 1%
    and marked ``degenerate``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-d and of equal length")
    n = a.size
    if n < 2:
        raise ValueError("paired t-test needs at least 2 pairs")
    d = a - b
    if np.all(d == d[0]):
        if d[0] == 0.0:
            return TTestResult(0.0, n, False, False)
        return TTestResult(math.copysign(math.inf, d[0]), n, True, True, degenerate=True)
    t = float(d.mean() / (d.std(ddof=1) / math.sqrt(n)))
    crit5 = stats.t.ppf(1 - 0.05 / 2, n - 1)
    crit1 = stats.t.ppf(1 - 0.01 / 2, n - 1)
    return TTestResult(t, n, bool(abs(t) > crit5), bool(abs(t) > crit1))


def coefficient_of_variation(values: Sequence[float]) -> float:
    """Population standard deviation over the mean."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("coefficient of variation of an empty sequence")
    mean = values.mean()
    if mean == 0:
        raise ValueError("coefficient of variation undefined for zero mean")
    return float(values.std(ddof=0) / mean)


# ---------------------------------------------------------------- reports


def _vs_best(scores: Mapping[str, float]) -> float | None:
    best = max(scores[a] for a in ALGORITHMS if a != "SlideFuse")
    if best == 0:
        return None
    return (scores["SlideFuse"] - best) / best * 100.0


def _best_other(scores: Mapping[str, float]) -> str:
    others = [a for a in ALGORITHMS if a != "SlideFuse"]
    return max(others, key=lambda a: (scores[a], -others.index(a)))


def _table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() for r in rows) + "\n"


def _pct(v: float | None) -> str:
    return "n/a" if v is None else f"{v:.2f}%"


@dataclass
class ExperimentReport:
    """Per-group scores averaged over shuffles, with overall averages.

    ``scores[measure][group][algorithm]`` holds group rows; ``significance`` the
    paired test of SlideFuse against the best other algorithm of each row.
    """

    groups: tuple[str, ...]
    scores: dict[str, dict[str, dict[str, float]]]
    significance: dict[str, dict[str, TTestResult]]
    shuffle_count: int = 1

    @property
    def averages(self) -> dict[str, dict[str, float]]:
        return {
            m: {a: float(np.mean([self.scores[m][g][a] for g in self.groups])) for a in ALGORITHMS}
            for m in MEASURES
        }

    def vs_best(self, measure: str, group: str | None = None) -> float | None:
        """Percentage difference between SlideFuse and the best other algorithm;
        ``group=None`` compares the averages row."""
        row = self.averages[measure] if group is None else self.scores[measure][group]
        return _vs_best(row)

    def best_other(self, measure: str, group: str | None = None) -> str:
        row = self.averages[measure] if group is None else self.scores[measure][group]
        return _best_other(row)

    def format_text(self) -> str:
        out = io.StringIO()
        averages = self.averages
        for m in MEASURES:
            out.write(f"{MEASURE_TITLES[m]}\n")
            rows = [["", *ALGORITHMS, "vs. Best"]]
            for g in self.groups:
                sig = self.significance[m][g].flag
                cell = _pct(self.vs_best(m, g)) + (f" {sig}" if sig else "")
                rows.append([g, *(f"{self.scores[m][g][a]:.4f}" for a in ALGORITHMS), cell])
            rows.append(["average", *(f"{averages[m][a]:.4f}" for a in ALGORITHMS), _pct(self.vs_best(m))])
            out.write(_table(rows))
            out.write("\n")
        return out.getvalue()

    def format_tsv(self) -> str:
        out = io.StringIO()
        out.write("\t".join(["measure", "run", *ALGORITHMS, "best_other", "vs_best", "t", "significance"]) + "\n")
        averages = self.averages
        for m in MEASURES:
            for g in self.groups:
                test = self.significance[m][g]
                vs = self.vs_best(m, g)
                out.write(
                    "\t".join(
                        [
                            m,
                            g,
                            *(f"{self.scores[m][g][a]:.6f}" for a in ALGORITHMS),
                            self.best_other(m, g),
                            "" if vs is None else f"{vs:.4f}",
                            f"{test.t:.6f}",
                            test.flag,
                        ]
                    )
                    + "\n"
                )
            vs = self.vs_best(m)
            out.write(
                "\t".join(
                    [m, "average", *(f"{averages[m][a]:.6f}" for a in ALGORITHMS), self.best_other(m),
                     "" if vs is None else f"{vs:.4f}", "", ""]
                )
                + "\n"
            )
        return out.getvalue()


def run_loaded_experiment(
    groups: Mapping[str, Sequence[SystemRun]],
    qrels: Qrels,
    *,
    shuffle_count: int = 5,
    training_fraction: float = 0.10,
    w: int = DEFAULT_W,
    segments: int = DEFAULT_SEGMENTS,
    seed: int = 0,
) -> ExperimentReport:
    """Compare the four algorithms on already-parsed run groups.

    Group rows average each measure's mean over the shuffles. Significance pools
    the per-query (shuffle, query) pairs of SlideFuse and the row's best other
    algorithm.
    """
    scores: dict[str, dict[str, dict[str, float]]] = {m: {} for m in MEASURES}
    significance: dict[str, dict[str, TTestResult]] = {m: {} for m in MEASURES}
    for name, systems in groups.items():
        if len(systems) < 2:
            raise ValueError(f"group {name} needs at least 2 systems, has {len(systems)}")
        query_ids = _group_queries(systems)
        per_shuffle = [
            _evaluate_shuffle(systems, qrels, query_ids, training_fraction, seed, i, w, segments)
            for i in range(shuffle_count)
        ]
        for m in MEASURES:
            row = {a: float(np.mean([res[a][m].mean for res in per_shuffle])) for a in ALGORITHMS}
            scores[m][name] = row
            rival = _best_other(row)
            slide, other = [], []
            for res in per_shuffle:
                s: MetricScores = res["SlideFuse"][m]
                o: MetricScores = res[rival][m]
                for q in s.per_query:
                    slide.append(s.per_query[q])
                    other.append(o.per_query[q])
            significance[m][name] = paired_t_test(slide, other)
    return ExperimentReport(tuple(groups), scores, significance, shuffle_count)


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    groups, qrels = load_groups(config)
    return run_loaded_experiment(
        groups,
        qrels,
        shuffle_count=config.shuffle_count,
        training_fraction=config.training_fraction,
        w=config.w,
        segments=config.probfuse_segments,
        seed=config.seed,
    )


@dataclass
class SweepReport:
    """Coefficient of variation of one measure across training-set sizes.

    ``scores[group][algorithm]`` lists the shuffle-averaged score at each fraction.
    """

    groups: tuple[str, ...]
    fractions: tuple[float, ...]
    measure: str
    scores: dict[str, dict[str, list[float]]] = field(default_factory=dict)

    @property
    def cv(self) -> dict[str, dict[str, float]]:
        return {g: {a: coefficient_of_variation(self.scores[g][a]) for a in ALGORITHMS} for g in self.groups}

    def format_text(self) -> str:
        pct = ", ".join(f"{f * 100:g}%" for f in self.fractions)
        head = f"Coefficient of variation for {MEASURE_TITLES[self.measure]} (training sizes {pct})\n"
        cv = self.cv
        rows = [["", *ALGORITHMS]]
        rows += [[g, *(f"{cv[g][a]:.4f}" for a in ALGORITHMS)] for g in self.groups]
        return head + _table(rows)

    def format_tsv(self) -> str:
        cols = [f"{self.measure}@{f:g}" for f in self.fractions]
        out = io.StringIO()
        out.write("\t".join(["run", "algorithm", "cv", *cols]) + "\n")
        cv = self.cv
        for g in self.groups:
            for a in ALGORITHMS:
                vals = [f"{v:.6f}" for v in self.scores[g][a]]
                out.write("\t".join([g, a, f"{cv[g][a]:.6f}", *vals]) + "\n")
        return out.getvalue()


def training_size_sweep(
    config: ExperimentConfig,
    fractions: Sequence[float] | None = None,
    measure: str | None = None,
    groups: Mapping[str, Sequence[SystemRun]] | None = None,
    qrels: Qrels | None = None,
) -> SweepReport:
    """Evaluate every algorithm at each training fraction and tabulate the CV.

    Pre-parsed ``groups`` and ``qrels`` skip reading the files named by ``config``.
    """
    fractions = tuple(config.fractions if fractions is None else fractions)
    measure = config.measure if measure is None else measure
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    if any(not 0 < f < 1 for f in fractions):
        raise ValueError("fractions must lie in (0, 1)")
    if groups is None or qrels is None:
        groups, qrels = load_groups(config)
    scores: dict[str, dict[str, list[float]]] = {}
    for name, systems in groups.items():
        query_ids = _group_queries(systems)
        per_algo: dict[str, list[float]] = defaultdict(list)
        for fraction in fractions:
            per_shuffle = [
                _evaluate_shuffle(
                    systems, qrels, query_ids, fraction, config.seed, i, config.w, config.probfuse_segments
                )
                for i in range(config.shuffle_count)
            ]
            for a in ALGORITHMS:
                per_algo[a].append(float(np.mean([res[a][measure].mean for res in per_shuffle])))
        scores[name] = dict(per_algo)
    return SweepReport(tuple(groups), fractions, measure, scores)
