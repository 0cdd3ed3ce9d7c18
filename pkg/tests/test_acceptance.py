"""End-to-end acceptance checks.

Each test guards one externally stated requirement and prints a single
ACCEPTANCE pass/fail line (collected again in the terminal summary).
"""

import itertools
import math
import time

import numpy as np
import pytest

from icn_sentinel.classifiers import (LabeledSet, knn_predict, knn_train,
                                      predict_label, svm_predict, svm_train,
                                      train_classifier)
from icn_sentinel.core import (ANOMALOUS, DataRow, NORMAL, SensitivityDegree,
                               derive_seed)
from icn_sentinel.featsel import GaConfig, genetic_select, greedy_select
from icn_sentinel.harness import (MatrixConfig, label_ground_truth, metrics,
                                  run_matrix)
from icn_sentinel.iac import min_max_curves, mann_whitney_u
from icn_sentinel.core import EventTrace
from icn_sentinel.profiler import (ThresholdProfile, compute_threshold,
                                   count_compromised, invert_threshold)
from icn_sentinel.profiler import ParameterSpec
from icn_sentinel.synth import (default_config, gen_campaign, gen_normal,
                                group_profile, inject_attacks)

PUBLISHED_LIMITS = {"FGF": 500.0, "MSV": 45.0, "GBV": 5.0, "EGT": 560.0,
                    "Power": 1120.0}
PUBLISHED_THRESHOLDS = {"FGF": 445.0, "MSV": 18.75, "GBV": 2.50,
                        "EGT": 532.0, "Power": 1032.0}
REFERENCE_TRACE = "BBEBCABEABDBBBEBCBAABBBEB"


@pytest.fixture(scope="module")
def campaign():
    return gen_campaign(default_config(seed=0))


@pytest.fixture(scope="module")
def report(campaign):
    return run_matrix(campaign, MatrixConfig(seed=0))


def published_profile():
    params = {}
    for name, psi in PUBLISHED_LIMITS.items():
        mu = invert_threshold(psi, PUBLISHED_THRESHOLDS[name])
        delta, p_th = compute_threshold(psi, mu)
        params[name] = ParameterSpec(name, psi, mu, delta, p_th)
    return ThresholdProfile(params)


def test_01_threshold_reproduction(criterion):
    with criterion(1, "threshold-reproduction"):
        for name, psi in PUBLISHED_LIMITS.items():
            target = PUBLISHED_THRESHOLDS[name]
            mu = invert_threshold(psi, target)
            _, p_th = compute_threshold(psi, mu)
            assert abs(p_th - target) <= 0.5, (name, p_th, target)


def test_02_sample_row_labeling(criterion):
    with criterion(2, "sample-row-labeling"):
        profile = published_profile()
        features = tuple(PUBLISHED_LIMITS)

        def row(fgf, msv, gbv, egt, power):
            values = dict(zip(features, (fgf, msv, gbv, egt, power)))
            return DataRow(0, "MD", values, None)

        samples = [row(484, 12.636, 1.365, 470, 884),
                   row(474, 10.998, 1.425, 547, 1078),
                   row(447, 23.51, 4.56, 557, 1103)]
        counts = [count_compromised(r, profile, features) for r in samples]
        assert counts == [1, 3, 5]

        def labels(r):
            return {s: label_ground_truth(r, profile, features,
                                          SensitivityDegree(s))
                    for s in (20, 60, 100)}

        assert labels(samples[0]) == {20: NORMAL, 60: NORMAL, 100: ANOMALOUS}
        assert labels(samples[1]) == {20: NORMAL, 60: ANOMALOUS,
                                      100: ANOMALOUS}
        assert labels(samples[2]) == {20: ANOMALOUS, 60: ANOMALOUS,
                                      100: ANOMALOUS}


def test_03_ideal_case_reproduction(criterion, report):
    with criterion(3, "ideal-case-reproduction"):
        cells = report.rows(dataset="reduced", s_pct=20)
        assert len(cells) == 12  # 3 classifiers x 4 groups
        for cell in cells:
            assert cell.adr == 100.0, cell
            assert cell.fpr == 0.0, cell
            assert cell.sa == 100.0, cell


def test_04_sensitivity_trend(criterion, report):
    with criterion(4, "sensitivity-trend"):
        averages = {(a["classifier"], a["dataset"], a["s_pct"]): a["sa"]
                    for a in report.averages()}
        for clf in ("svm", "knn", "c45"):
            for dataset in ("full", "reduced"):
                sa_100 = averages[(clf, dataset, 100)]
                sa_60 = averages[(clf, dataset, 60)]
                sa_20 = averages[(clf, dataset, 20)]
                assert sa_20 >= sa_60 - 1e-9, (clf, dataset)
                assert sa_60 >= sa_100 - 1e-9, (clf, dataset)
        for cell in report.results:
            if cell.dataset != "full":
                continue
            twin = report.rows(classifier=cell.classifier, dataset="reduced",
                               s_pct=cell.s_pct, group=cell.group)[0]
            assert twin.sa >= cell.sa - 1e-9, cell


def test_05_metric_identity(criterion, report):
    with criterion(5, "metric-identity"):
        for r in report.results:
            p = r.tp + r.fn
            n = r.fp + r.tn
            derived = (r.adr * p + (100.0 - r.fpr) * n) / (p + n)
            assert abs(derived - r.sa) <= 0.1, r
        adr, fpr, sa = metrics(tp=25, fp=32, tn=103, fn=20)
        assert (round(adr, 1), round(fpr, 1), round(sa, 1)) == \
            (55.6, 23.7, 71.1)


def naive_curves(symbols, event, w_delta):
    n = len(symbols)
    mins, maxs = {}, {}
    for w in range(1, w_delta + 1):
        counts = [symbols[i:i + w].count(event)
                  for i in range(n - w + 1) if symbols[i] == event]
        if counts:
            mins[w] = min(counts)
            maxs[w] = max(counts)
    return mins, maxs


def test_06_curve_oracle_equivalence(criterion):
    with criterion(6, "curve-oracle-equivalence"):
        start = time.perf_counter()
        rng = np.random.default_rng(0)
        for n in range(1, 13):
            for symbols in itertools.product("AB", repeat=n):
                trace = EventTrace(symbols)
                for event in set(symbols):
                    c_min, c_max = min_max_curves(trace, event, 12)
                    want_min, want_max = naive_curves(symbols, event, 12)
                    assert c_min.values == want_min
                    assert c_max.values == want_max
                    # smaller window caps are exact prefixes of the full run
                    w_cap = int(rng.integers(1, 12))
                    t_min, t_max = min_max_curves(trace, event, w_cap)
                    assert t_min.values == {w: v for w, v in c_min.values.items()
                                            if w <= w_cap}
                    assert t_max.values == {w: v for w, v in c_max.values.items()
                                            if w <= w_cap}
        assert time.perf_counter() - start < 10.0


def test_07_reference_trace_curves(criterion):
    with criterion(7, "reference-trace-curves"):
        trace = EventTrace(tuple(REFERENCE_TRACE))
        c_min, c_max = min_max_curves(trace, "B", len(REFERENCE_TRACE))
        assert c_min.values[1] == 1 and c_max.values[1] == 1
        assert c_min.values[2] == 1 and c_max.values[2] == 2
        windows = c_min.windows()
        for prev, cur in zip(windows, windows[1:]):
            assert c_min.values[prev] <= c_min.values[cur]
            assert c_max.values[prev] <= c_max.values[cur]
        occurrences = REFERENCE_TRACE.count("B")
        assert occurrences == 14
        for w in windows:
            assert c_max.values[w] <= min(w, occurrences)


def enumerate_p(a, b):
    pooled = list(a) + list(b)
    n, m = len(a), len(b)

    def twice_u(xs, ys):
        return sum(2 if x > y else (1 if x == y else 0)
                   for x in xs for y in ys)

    dev = abs(twice_u(a, b) - n * m)
    hits = total = 0
    for idx in itertools.combinations(range(n + m), n):
        chosen = set(idx)
        xs = [pooled[i] for i in idx]
        ys = [pooled[i] for i in range(n + m) if i not in chosen]
        total += 1
        if abs(twice_u(xs, ys) - n * m) >= dev:
            hits += 1
    return hits / total


def test_08_mann_whitney_exactness(criterion):
    with criterion(8, "mann-whitney-exactness"):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(1, 7))
            m = int(rng.integers(1, 7))
            a = [int(v) for v in rng.integers(0, 5, size=n)]
            b = [int(v) for v in rng.integers(0, 5, size=m)]
            _, p = mann_whitney_u(a, b)
            assert p == pytest.approx(enumerate_p(a, b), abs=1e-12)


def test_09_classifier_sanity(criterion):
    with criterion(9, "classifier-sanity"):
        rng = np.random.default_rng(3)
        pos = rng.normal((5.0, 5.0), 1.0, size=(20, 2))
        neg = rng.normal((-5.0, -5.0), 1.0, size=(20, 2))
        x = np.vstack([pos, neg])
        y = np.array([NORMAL] * 20 + [ANOMALOUS] * 20)
        blobs = LabeledSet.from_raw(x, y)
        for kind in ("svm", "knn", "c45"):
            model = train_classifier(kind, blobs)
            assert all(predict_label(model, xi) == yi
                       for xi, yi in zip(x, y)), kind

        xor = LabeledSet.from_raw([[0, 0], [1, 1], [0, 1], [1, 0]],
                                  [1, 1, -1, -1])
        svm = svm_train(xor)
        acc = np.mean([svm_predict(svm, xi) == yi
                       for xi, yi in zip(xor.x, xor.y)])
        assert acc <= 0.75

        scale, shift = np.array([40.0, 0.05]), np.array([-3.0, 11.0])
        plain = knn_train(LabeledSet.from_raw(x, y))
        warped = knn_train(LabeledSet.from_raw(x * scale + shift, y))
        for _ in range(50):
            q = rng.normal(0.0, 5.0, size=2)
            assert knn_predict(plain, q) == \
                knn_predict(warped, q * scale + shift)


def test_10_feature_selection_recovery(criterion):
    with criterion(10, "feature-selection-recovery"):
        config = default_config()
        clean, _ = gen_normal(config, "MD", 180)
        profile = group_profile(config, "MD")
        # single-parameter attacks make every signal channel necessary
        mixed, _ = inject_attacks(clean, None, profile, "one", 0.25,
                                  seed=derive_seed(0, "MD", "plant"),
                                  signal=config.signal_names())
        data = LabeledSet.from_raw(mixed.to_matrix(), mixed.labels())
        assert data.n_features == 18
        signal_idx = tuple(range(len(config.signal_names())))

        greedy = greedy_select(data, evaluator="knn")
        assert greedy.indices == signal_idx

        ga, history = genetic_select(data, evaluator="knn",
                                     config=GaConfig(seed=0),
                                     return_history=True)
        assert ga.indices == signal_idx
        assert all(b >= a for a, b in zip(history, history[1:]))


def test_11_end_to_end_runtime(criterion):
    with criterion(11, "end-to-end-runtime"):
        start = time.perf_counter()
        campaign = gen_campaign(default_config(seed=0))
        report = run_matrix(campaign, MatrixConfig(seed=0))
        elapsed = time.perf_counter() - start
        assert len(report.results) == 72
        assert elapsed < 60.0, "matrix took %.1f s" % elapsed
