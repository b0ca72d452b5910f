"""Exit criteria. Run alone with ``pytest tests/test_acceptance.py -v``."""

import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from slidefuse.baselines import combmnz, probfuse_fuse, probfuse_train
from slidefuse.cli import main
from slidefuse.corpus_io import ResultList, SystemRun
from slidefuse.experiments import (
    ALGORITHMS,
    ExperimentConfig,
    RunGroup,
    fuse_split,
    load_config,
    paired_t_test,
    run_experiment,
    split_queries,
    training_size_sweep,
)
from slidefuse.metrics import average_precision, bpref, evaluate_run, p10
from slidefuse.profiles import RelevanceProfile, build_profile, raw_probability
from slidefuse.sliding import FusedList, FusionEnsemble, Window, fuse_all, window_bounds, window_probabilities, window_probability
from slidefuse.synthetic import make_corpus, write_corpus

from test_experiments import T_A, T_B, T_HAND
from test_metrics import HAND


@pytest.fixture(scope="module")
def corpus():
    return make_corpus(n_queries=200, seed=11)


@pytest.fixture(scope="module")
def corpus_config(corpus, tmp_path_factory):
    d = tmp_path_factory.mktemp("acceptance")
    runs, qrels = write_corpus(corpus, d)
    cfg = d / "exp.toml"
    cfg.write_text(
        f'qrels = "{qrels.name}"\nseed = 2024\nshuffles = 5\ntraining_fraction = 0.10\nw = 5\nsegments = 25\n'
        "\n[[groups]]\nname = \"first\"\nruns = [" + ", ".join(f'"{p.name}"' for p in runs) + "]\n"
    )
    return cfg


@pytest.mark.criterion("Metric oracle suite: MAP/bpref/P10 hand values within 1e-9, < 1 s")
def test_metric_oracle_suite(metric_fixture):
    start = time.perf_counter()
    run, qrels = metric_fixture
    assert average_precision(run["q1"], qrels, "q1") == pytest.approx(0.8333333333333, abs=1e-9)
    assert bpref(run["q1"], qrels, "q1") == pytest.approx(0.75, abs=1e-9)
    assert p10(run["q2"], qrels, "q2") == pytest.approx(0.3, abs=1e-9)
    scores = evaluate_run(run, qrels)
    assert len(scores["map"].per_query) >= 5
    for m, per_query in HAND.items():
        for q, expected in per_query.items():
            assert scores[m].per_query[q] == pytest.approx(float(expected), abs=1e-9)
        assert scores[m].mean == pytest.approx(float(sum(per_query.values()) / len(per_query)), abs=1e-9)
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion("Window equivalence: 100 random 1000-position profiles, w in {0,1,5,20}, within 1e-12; 40+-5 -> 35..45; < 5 s")
def test_window_equivalence():
    start = time.perf_counter()
    assert window_bounds(40, 5, 1000) == Window(35, 45)
    rng = np.random.default_rng(20071)
    n = 1000
    for _ in range(100):
        support = np.sort(rng.integers(0, 40, size=n))[::-1]
        counts = rng.integers(0, support + 1)
        prof = RelevanceProfile("s", counts, support)
        raw = [int(c) / int(s) if s else 0.0 for c, s in zip(counts, support)]
        for w in (0, 1, 5, 20):
            vec = window_probabilities(prof, w, n)
            for p in range(n):
                a, b = max(p - w, 0), min(p + w, n - 1)
                total = 0.0
                for i in range(a, b + 1):
                    total += raw[i]
                naive = total / (b - a + 1)
                assert abs(vec[p] - naive) <= 1e-12
            for p in range(0, n, 7):
                assert abs(window_probability(prof, p, w, n) - vec[p]) <= 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, elapsed


@pytest.mark.criterion("Degeneracy identities: w=0 vs raw fusion, ProbFuse x=1, constant-profile smoothing")
def test_degeneracy_identities(corpus):
    runs, qrels = list(corpus.runs), corpus.qrels
    train, test = split_queries(corpus.query_ids, 0.1, 5, 0)

    ensemble = FusionEnsemble(tuple((r, build_profile(r, train, qrels)) for r in runs))
    slid = fuse_all(ensemble, test, w=0)
    for q in test:
        raw_scores = {}
        for run, prof in ensemble.members:
            for e in run.lists[q]:
                raw_scores[e.doc_id] = raw_scores.get(e.doc_id, 0.0) + raw_probability(prof, e.rank)
        assert slid[q] == FusedList.from_scores(q, raw_scores)

    profiles = {r.system_tag: probfuse_train(r, train, qrels, 1) for r in runs}
    for r in runs:
        fractions = [len(qrels.relevant(q) & set(r.lists[q].doc_ids)) / len(r.lists[q]) for q in train]
        assert profiles[r.system_tag].seg_probability[0] == pytest.approx(sum(fractions) / len(train), abs=1e-12)
    for q in test:
        fused = probfuse_fuse({r.system_tag: r.lists[q] for r in runs}, profiles)
        whole = {}
        for r in runs:
            for d in r.lists[q].doc_ids:
                whole[d] = whole.get(d, 0.0) + profiles[r.system_tag].seg_probability[0]
        assert fused.scores == pytest.approx(whole, abs=1e-12)

    const = RelevanceProfile("c", np.full(300, 7), np.full(300, 20))
    assert np.array_equal(window_probabilities(const, 0, 300), const.probabilities())
    for w in (1, 5, 20, 400):
        # sequential summation of up to 300 equal terms; same 1e-12 bound as the window criterion
        assert np.abs(window_probabilities(const, w, 300) - 0.35).max() <= 1e-12


@pytest.mark.criterion("End-to-end hand oracle: 3 systems, 4 documents, 2 training queries")
def test_end_to_end_hand_oracle(hand_fixture):
    runs, qrels = hand_fixture
    ensemble = FusionEnsemble(tuple((r, build_profile(r, {"T1", "T2"}, qrels)) for r in runs))
    fused = fuse_all(ensemble, ["Q"], w=1)["Q"]
    # raw: A (1/2,1/2,1/2,0)  B (1/2,1/2,0)  C (0,0,1,1); windows of half-width 1
    expected = {
        "x1": F(1, 2) + F(1, 3) + F(2, 3),
        "x2": F(1, 2) + F(1, 2) + F(1),
        "x3": F(1, 3) + F(1, 4) + F(0),
        "x4": F(1, 4) + F(1, 3),
    }
    order = sorted(expected, key=lambda d: (-expected[d], d))
    assert fused.doc_ids == order == ["x2", "x1", "x3", "x4"]
    for doc, score in fused.entries:
        assert F(score) == expected[doc] or abs(score - float(expected[doc])) <= 2 * math.ulp(float(expected[doc]))


@pytest.mark.criterion("Directional comparison: SlideFuse mean MAP > CombMNZ mean MAP on 200-query synthetic corpus, < 30 s")
def test_directional_table2(corpus_config):
    start = time.perf_counter()
    report = run_experiment(load_config(corpus_config))
    elapsed = time.perf_counter() - start
    avg = report.averages["map"]
    print(f"\nMAP averages: " + "  ".join(f"{a} {avg[a]:.4f}" for a in ALGORITHMS) + f"  ({elapsed:.1f} s)")
    assert avg["SlideFuse"] > avg["CombMNZ"]
    assert elapsed < 30.0


@pytest.mark.criterion("Training-size sensitivity: sweep 10%..50% yields CVs; CombMNZ CV reflects only split variation")
def test_table1_analogue(corpus):
    fractions = (0.1, 0.2, 0.3, 0.4, 0.5)
    config = ExperimentConfig((RunGroup("first", ()),), "unused", shuffle_count=2, seed=2024, fractions=fractions)
    sweep = training_size_sweep(config, groups={"first": list(corpus.runs)}, qrels=corpus.qrels)
    cv = sweep.cv
    assert list(cv) == ["first"] and list(cv["first"]) == list(ALGORITHMS)
    assert all(math.isfinite(v) and v >= 0 for v in cv["first"].values())
    # CombMNZ at each fraction is exactly the training-free fusion of that fraction's test split
    for i, f in enumerate(fractions):
        means = []
        for s in range(2):
            _, test = split_queries(corpus.query_ids, f, 2024, s)
            fused = {q: combmnz([r.lists[q] for r in corpus.runs]) for q in test}
            means.append(evaluate_run(fused, corpus.qrels)["map"].mean)
        assert sweep.scores["first"]["CombMNZ"][i] == pytest.approx(np.mean(means), abs=1e-12)
    table = sweep.format_text().splitlines()
    assert "10%, 20%, 30%, 40%, 50%" in table[0]
    assert table[1].split() == list(ALGORITHMS)
    print("\n" + sweep.format_text())


@pytest.mark.criterion("Statistics oracle: paired t within 1e-9 of hand value; identical inputs give t=0, no flags")
def test_statistics_oracle():
    res = paired_t_test(T_A, T_B)
    assert abs(res.t - T_HAND) <= 1e-9
    same = paired_t_test(T_A, T_A)
    assert same.t == 0.0 and not same.significant_5 and not same.significant_1 and same.flag == ""


@pytest.mark.criterion("Determinism: two cmd_experiment invocations give byte-identical reports")
def test_determinism(tmp_path, capsys):
    runs, qrels = write_corpus(make_corpus(n_queries=60, list_length=80, seed=3), tmp_path)
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        f'qrels = "{qrels.name}"\nseed = 99\nshuffles = 3\n'
        + "".join("\n[[groups]]\nruns = [" + ", ".join(f'"{p.name}"' for p in g) + "]\n" for g in (runs[:3], runs[3:]))
    )
    outputs = []
    for fmt in ("text", "text", "tsv", "tsv"):
        assert main(["experiment", "--format", fmt, str(cfg)]) == 0
        outputs.append(capsys.readouterr().out.encode())
    assert outputs[0] == outputs[1] and outputs[2] == outputs[3]
    assert outputs[0]


@pytest.mark.criterion("CombMNZ scale invariance: scores x7+3 on one system leave the fused order unchanged")
def test_combmnz_scale_invariance(corpus):
    runs = list(corpus.runs)
    target = runs[2]
    moved = SystemRun(
        target.system_tag,
        {
            q: ResultList.from_ranking(q, rl.doc_ids, [7 * s + 3 for s in rl.scores])
            for q, rl in target.lists.items()
        },
    )
    for q in corpus.query_ids:
        before = combmnz([r.lists[q] for r in runs])
        after = combmnz([r.lists[q] for r in runs[:2] + [moved] + runs[3:]])
        assert before.doc_ids == after.doc_ids
