"""Scenario evaluation: ground-truth labeling, metrics, dual detection and
the full group x dataset x sensitivity x classifier matrix.

A row is ground-truth anomalous at sensitivity S when the number of signal
parameters above threshold reaches the sensitivity's required count (all of
them at 20 %, any three at 60 %, any one at 100 %).  The matrix trains each
classifier per cell on the group's training partition (attacked at the
campaign rate with a campaign-derived seed, then labeled by the same rule)
and reports ADR / FPR / SA against the generator's ground truth, mirroring
the per-group result-table layout with full and reduced feature views.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import (ANOMALOUS, ConfigError, EventTrace, GROUPS,
                   MetricError, NORMAL, SensitivityDegree, derive_seed)
from .classifiers import LabeledSet, predict_label, train_classifier
from .iac import classify_trace
from .profiler import count_compromised
from .synth import Campaign, inject_attacks

DATASET_KINDS = ("full", "reduced")
SENSITIVITIES = (20, 60, 100)
CLASSIFIERS = ("svm", "knn", "c45")


def label_ground_truth(row, profile, features, sensitivity: SensitivityDegree) -> int:
    """-1 when enough of ``features`` sit above threshold, else +1.

    ``features`` should name the signal parameters of the feature view;
    the required count comes from the sensitivity degree over that list.
    """
    features = list(features)
    required = sensitivity.required_count(len(features))
    return ANOMALOUS if count_compromised(row, profile, features) >= required \
        else NORMAL


def metrics(tp, fp, tn, fn):
    """(ADR, FPR, SA) percentages from confusion counts.

    ADR = tp / (tp + fn) * 100, FPR = fp / (fp + tn) * 100,
    SA = (tp + tn) / total * 100.  Raises MetricError on an empty
    denominator.
    """
    for name, v in (("tp", tp), ("fp", fp), ("tn", tn), ("fn", fn)):
        if v < 0:
            raise MetricError("%s must be >= 0, got %r" % (name, v))
    if tp + fn == 0:
        raise MetricError("no anomalous ground truth: ADR undefined")
    if fp + tn == 0:
        raise MetricError("no normal ground truth: FPR undefined")
    total = tp + fp + tn + fn
    adr = 100.0 * tp / (tp + fn)
    fpr = 100.0 * fp / (fp + tn)
    sa = 100.0 * (tp + tn) / total
    return adr, fpr, sa


@dataclass(frozen=True)
class ScenarioResult:
    group: str
    dataset: str
    s_pct: int
    classifier: str
    tp: int
    fp: int
    tn: int
    fn: int
    adr: float
    fpr: float
    sa: float


@dataclass(frozen=True)
class DualVerdict:
    """Combined verdict: normal only when both detection branches pass."""

    threshold_pass: bool
    iac_pass: bool
    normal: bool
    iac_detail: object = None


@dataclass(frozen=True)
class MatrixConfig:
    svm_c: float = 1.0
    svm_epochs: int = 200
    knn_metric: str = "euclidean"
    c45_min_leaf: int = 2
    c45_cf: float = 0.25
    seed: int = 0


def event_chunks(events: EventTrace, symbols_per_row) -> list:
    """Split a flat event trace into per-row chunks of fixed width."""
    if symbols_per_row < 1:
        raise ConfigError("symbols_per_row must be >= 1")
    if len(events) % symbols_per_row:
        raise ConfigError("event trace length %d not divisible by %d"
                          % (len(events), symbols_per_row))
    return [events.slice(i, i + symbols_per_row)
            for i in range(0, len(events), symbols_per_row)]


def dual_detect(row, window: EventTrace, profile, iac_model, model, features,
                sensitivity: SensitivityDegree, alpha=None, sigma_th=None,
                events=None) -> DualVerdict:
    """Joint threshold/event verdict for one row and its event window.

    The threshold branch is the trained classifier's prediction on the
    row's feature vector; the event branch conformance-tests the aligned
    window against the curve model.  The row is normal only when both
    branches pass.
    """
    for name in features:
        profile.spec(name)  # schema consistency with the learned profile
    x = np.array([row.values[name] for name in features], dtype=float)
    threshold_pass = predict_label(model, x) == NORMAL
    detail = classify_trace(window, iac_model, alpha=alpha, sigma_th=sigma_th,
                            sensitivity=sensitivity, events=events)
    iac_pass = not detail.anomalous
    return DualVerdict(threshold_pass, iac_pass,
                       threshold_pass and iac_pass, detail)


def _classifier_hyper(kind, config: MatrixConfig, cell_seed):
    if kind == "svm":
        return {"c_param": config.svm_c, "epochs": config.svm_epochs,
                "seed": cell_seed}
    if kind == "knn":
        return {"k": 1, "metric": config.knn_metric}
    return {"min_leaf": config.c45_min_leaf, "cf": config.c45_cf}


@dataclass(frozen=True)
class EvaluationReport:
    results: tuple
    groups: tuple = GROUPS

    def rows(self, **match) -> list:
        out = []
        for r in self.results:
            if all(getattr(r, k) == v for k, v in match.items()):
                out.append(r)
        return out

    def averages(self) -> list:
        """Mean ADR/FPR/SA across groups per (classifier, dataset, s_pct)."""
        out = []
        for clf in CLASSIFIERS:
            for dataset in DATASET_KINDS:
                for s_pct in SENSITIVITIES:
                    cells = self.rows(classifier=clf, dataset=dataset,
                                      s_pct=s_pct)
                    if not cells:
                        continue
                    out.append({
                        "classifier": clf, "dataset": dataset, "s_pct": s_pct,
                        "adr": sum(c.adr for c in cells) / len(cells),
                        "fpr": sum(c.fpr for c in cells) / len(cells),
                        "sa": sum(c.sa for c in cells) / len(cells),
                    })
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["classifier", "dataset", "s_pct", "group",
                             "tp", "fp", "tn", "fn", "adr", "fpr", "sa"])
            for r in self.results:
                writer.writerow([r.classifier, r.dataset, r.s_pct, r.group,
                                 r.tp, r.fp, r.tn, r.fn,
                                 "%.4f" % r.adr, "%.4f" % r.fpr,
                                 "%.4f" % r.sa])

    def render_tables(self) -> str:
        """Aligned text tables, one per classifier and sensitivity, with
        full and reduced feature views side by side plus group averages."""
        lines = []
        present_groups = [g for g in GROUPS
                          if any(r.group == g for r in self.results)]
        for clf in CLASSIFIERS:
            for s_pct in SENSITIVITIES:
                block = self.rows(classifier=clf, s_pct=s_pct)
                if not block:
                    continue
                lines.append("%s, sensitivity %d%%" % (clf.upper(), s_pct))
                header = ["metric"]
                for dataset in DATASET_KINDS:
                    header += ["%s/%s" % (dataset, g) for g in present_groups]
                    header.append("%s/avg" % dataset)
                widths = [max(10, len(h) + 2) for h in header]
                lines.append("".join(h.ljust(w) for h, w in zip(header, widths)))
                for metric in ("adr", "fpr", "sa"):
                    cells = [metric.upper()]
                    for dataset in DATASET_KINDS:
                        vals = []
                        for g in present_groups:
                            rs = self.rows(classifier=clf, s_pct=s_pct,
                                           dataset=dataset, group=g)
                            vals.append(getattr(rs[0], metric) if rs else None)
                        cells += ["%.1f" % v if v is not None else "-"
                                  for v in vals]
                        shown = [v for v in vals if v is not None]
                        cells.append("%.1f" % (sum(shown) / len(shown))
                                     if shown else "-")
                    lines.append("".join(c.ljust(w)
                                         for c, w in zip(cells, widths)))
                lines.append("")
        return "\n".join(lines)


def run_matrix(campaign: Campaign, config: MatrixConfig = None, groups=None,
               datasets=None, sensitivities=None, classifiers=None) -> EvaluationReport:
    """Evaluate every (classifier, dataset view, sensitivity, group) cell.

    Ground truth on both partitions comes from the generator's own
    profile over the signal parameters, so denominators match the
    injected attack counts exactly.  Filters narrow the matrix; the full
    default grid is 3 * 2 * 3 * 4 = 72 cells in canonical order.
    """
    config = config or MatrixConfig()
    groups = tuple(groups) if groups else GROUPS
    datasets = tuple(datasets) if datasets else DATASET_KINDS
    sensitivities = tuple(sensitivities) if sensitivities else SENSITIVITIES
    classifiers = tuple(classifiers) if classifiers else CLASSIFIERS
    for g in groups:
        if g not in campaign.groups:
            raise ConfigError("campaign has no group %r" % (g,))

    signal = list(campaign.signal)
    results = []
    prepared = {}
    for group in groups:
        data = campaign.groups[group]
        train_mixed, _ = inject_attacks(
            data.train, None, data.profile, campaign.config.attack_pattern,
            campaign.config.attack_rate,
            seed=derive_seed(campaign.config.seed, group, "train-attack"),
            signal=signal, burst_len=campaign.config.burst_len)
        prepared[group] = (data, train_mixed)

    schema = campaign.config.schema()
    feature_views = {"full": list(schema), "reduced": signal}

    for clf in classifiers:
        for dataset in datasets:
            features = feature_views[dataset]
            for s_pct in sensitivities:
                sens = SensitivityDegree(s_pct)
                for group in groups:
                    data, train_mixed = prepared[group]
                    y_train = np.array(
                        [label_ground_truth(r, data.profile, signal, sens)
                         for r in train_mixed.rows])
                    x_train = train_mixed.to_matrix(features)
                    train_set = LabeledSet.from_raw(x_train, y_train)
                    cell_seed = derive_seed(config.seed, group, dataset,
                                            s_pct, clf)
                    model = train_classifier(
                        clf, train_set,
                        **_classifier_hyper(clf, config, cell_seed))

                    x_test = data.test.to_matrix(features)
                    y_true = np.array(
                        [label_ground_truth(r, data.profile, signal, sens)
                         for r in data.test.rows])
                    y_pred = np.array([predict_label(model, x)
                                       for x in x_test])
                    tp = int(((y_pred == ANOMALOUS) & (y_true == ANOMALOUS)).sum())
                    fp = int(((y_pred == ANOMALOUS) & (y_true == NORMAL)).sum())
                    tn = int(((y_pred == NORMAL) & (y_true == NORMAL)).sum())
                    fn = int(((y_pred == NORMAL) & (y_true == ANOMALOUS)).sum())
                    adr, fpr, sa = metrics(tp, fp, tn, fn)
                    results.append(ScenarioResult(group, dataset, s_pct, clf,
                                                  tp, fp, tn, fn, adr, fpr, sa))
    return EvaluationReport(tuple(results), groups=groups)
