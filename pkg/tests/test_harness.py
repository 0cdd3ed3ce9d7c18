import numpy as np
import pytest

from icn_sentinel.classifiers import LabeledSet, train_classifier
from icn_sentinel.core import (ANOMALOUS, NORMAL, ConfigError, DataRow,
                               EventTrace, GROUPS, MetricError,
                               SensitivityDegree)
from icn_sentinel.harness import (EvaluationReport, MatrixConfig, dual_detect,
                                  event_chunks, label_ground_truth, metrics,
                                  run_matrix)
from icn_sentinel.iac import train_iac_model
from icn_sentinel.synth import default_config, gen_campaign, group_profile


@pytest.fixture(scope="module")
def campaign():
    return gen_campaign(default_config(seed=0))


@pytest.fixture(scope="module")
def report(campaign):
    return run_matrix(campaign, MatrixConfig(seed=0))


def test_metrics_published_example():
    adr, fpr, sa = metrics(tp=25, fp=32, tn=103, fn=20)
    assert adr == pytest.approx(55.6, abs=0.05)
    assert fpr == pytest.approx(23.7, abs=0.05)
    assert sa == pytest.approx(71.1, abs=0.05)


def test_metrics_perfect_and_all_normal():
    assert metrics(45, 0, 135, 0) == (100.0, 0.0, 100.0)
    adr, fpr, sa = metrics(0, 0, 135, 45)
    assert (adr, fpr, sa) == (0.0, 0.0, 75.0)


def test_metrics_errors():
    with pytest.raises(MetricError):
        metrics(0, 5, 10, 0)  # no anomalous ground truth
    with pytest.raises(MetricError):
        metrics(5, 0, 0, 5)  # no normal ground truth
    with pytest.raises(MetricError):
        metrics(-1, 1, 1, 1)


def crafted_row(profile, signal, n_exceed):
    """Row exceeding the first n_exceed signal thresholds by a margin."""
    values = {}
    for i, name in enumerate(signal):
        spec = profile.spec(name)
        if i < n_exceed:
            values[name] = (spec.p_th + spec.psi) / 2.0
        else:
            values[name] = spec.p_th * 0.5
    return DataRow(6 * 3600, "MD", values, None)


def test_label_ground_truth_by_sensitivity():
    config = default_config(extra_params=0)
    profile = group_profile(config, "MD")
    signal = list(config.signal_names())
    # rows exceeding 0, 1, 3 and 5 of the five signal parameters
    want = {
        0: {20: NORMAL, 60: NORMAL, 100: NORMAL},
        1: {20: NORMAL, 60: NORMAL, 100: ANOMALOUS},
        3: {20: NORMAL, 60: ANOMALOUS, 100: ANOMALOUS},
        5: {20: ANOMALOUS, 60: ANOMALOUS, 100: ANOMALOUS},
    }
    for n_exceed, by_s in want.items():
        row = crafted_row(profile, signal, n_exceed)
        for s_pct, label in by_s.items():
            got = label_ground_truth(row, profile, signal,
                                     SensitivityDegree(s_pct))
            assert got == label, (n_exceed, s_pct)


def test_event_chunks():
    events = EventTrace(tuple("ABCABC"))
    chunks = event_chunks(events, 3)
    assert len(chunks) == 2
    assert chunks[0].events == ("A", "B", "C")
    assert chunks[1].events == ("A", "B", "C")
    with pytest.raises(ConfigError):
        event_chunks(events, 4)
    with pytest.raises(ConfigError):
        event_chunks(events, 0)


def dual_setup():
    config = default_config(extra_params=4, rows_per_group=40)
    profile = group_profile(config, "MD")
    signal = list(config.signal_names())
    schema = config.schema()
    from icn_sentinel.synth import gen_normal, inject_attacks
    from icn_sentinel.core import derive_seed
    train, train_ev = gen_normal(config, "MD", 40)
    mixed, _ = inject_attacks(train, None, profile, "five", 0.25,
                              seed=derive_seed(0, "MD", "mix"), signal=signal)
    sens = SensitivityDegree(100)
    y = np.array([label_ground_truth(r, profile, signal, sens)
                  for r in mixed.rows])
    data = LabeledSet.from_raw(mixed.to_matrix(schema), y)
    model = train_classifier("knn", data, k=1)
    chunks = event_chunks(train_ev, len(schema))
    iac_model = train_iac_model(chunks, w_delta=len(schema))
    return config, profile, schema, mixed, chunks, model, iac_model, sens


def test_dual_detect_branches():
    (config, profile, schema, mixed, chunks, model,
     iac_model, sens) = dual_setup()
    normal_i = next(i for i, r in enumerate(mixed.rows) if r.label == NORMAL)
    attacked_i = next(i for i, r in enumerate(mixed.rows)
                      if r.label == ANOMALOUS)

    clean = dual_detect(mixed.rows[normal_i], chunks[normal_i], profile,
                        iac_model, model, schema, sens)
    assert clean.threshold_pass and clean.iac_pass and clean.normal

    hit = dual_detect(mixed.rows[attacked_i], chunks[attacked_i], profile,
                      iac_model, model, schema, sens)
    assert not hit.threshold_pass
    assert not hit.normal

    # a window missing a feature event trips only the event branch
    gap = chunks[normal_i].slice(1, len(schema))
    verdict = dual_detect(mixed.rows[normal_i], gap, profile, iac_model,
                          model, schema, sens)
    assert verdict.threshold_pass
    assert not verdict.iac_pass
    assert not verdict.normal
    missing = chunks[normal_i].events[0]
    assert verdict.iac_detail.events[missing].anomalous


def test_run_matrix_shape_and_order(report):
    assert len(report.results) == 72
    seen = [(r.classifier, r.dataset, r.s_pct, r.group)
            for r in report.results]
    assert len(set(seen)) == 72
    # canonical nesting: classifier, then dataset, then sensitivity, group
    assert seen[0] == ("svm", "full", 20, "MD")
    assert seen[1][3] != "MD"
    assert seen[-1] == ("c45", "reduced", 100, "ND")


def test_run_matrix_confusion_denominators(report):
    for r in report.results:
        assert r.tp + r.fn == 45
        assert r.fp + r.tn == 135


def test_run_matrix_filters(campaign):
    md = run_matrix(campaign, groups=["MD"])
    assert len(md.results) == 18
    assert all(r.group == "MD" for r in md.results)
    knn = run_matrix(campaign, classifiers=["knn"], datasets=["reduced"],
                     sensitivities=[100])
    assert len(knn.results) == 4
    assert all(r.classifier == "knn" and r.dataset == "reduced"
               and r.s_pct == 100 for r in knn.results)
    with pytest.raises(ConfigError):
        run_matrix(campaign, groups=["XX"])


def test_run_matrix_deterministic(campaign):
    a = run_matrix(campaign, classifiers=["svm"], groups=["MD"])
    b = run_matrix(campaign, classifiers=["svm"], groups=["MD"])
    assert a.results == b.results


def test_report_rows_and_averages(report):
    cells = report.rows(classifier="knn", dataset="reduced", s_pct=100)
    assert len(cells) == 4
    avg = [a for a in report.averages()
           if a["classifier"] == "knn" and a["dataset"] == "reduced"
           and a["s_pct"] == 100]
    assert len(avg) == 1
    assert avg[0]["adr"] == pytest.approx(sum(c.adr for c in cells) / 4)
    assert avg[0]["sa"] == pytest.approx(sum(c.sa for c in cells) / 4)
    assert len(report.averages()) == 18


def test_report_csv_and_tables(tmp_path, report):
    path = tmp_path / "report.csv"
    report.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "classifier,dataset,s_pct,group,tp,fp,tn,fn,adr,fpr,sa"
    assert len(lines) == 73
    first = lines[1].split(",")
    assert first[0] == "svm" and first[3] == "MD"
    assert first[4:8] == [str(report.results[0].tp), str(report.results[0].fp),
                          str(report.results[0].tn), str(report.results[0].fn)]

    text = report.render_tables()
    assert "KNN, sensitivity 100%" in text
    assert "full/MD" in text and "reduced/avg" in text
    assert "ADR" in text and "FPR" in text and "SA" in text
