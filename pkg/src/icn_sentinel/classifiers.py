"""Supervised detectors behind one train/predict contract.

Three classifiers label standardized feature vectors +1 (normal) or -1
(anomalous): a linear soft-margin SVM fit by deterministic subgradient
descent, a nearest-neighbor memorizer fixed at k=1, and a decision tree
grown on gain ratio whose branches are flattened into ordered, pruned
if-then rules.  Identical data, seed and hyperparameters give bit-identical
models.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from .core import (ConfigError, DegenerateDataError, NORMAL, ANOMALOUS,
                   SchemaError, SentinelError)

CLASSIFIER_KINDS = ("svm", "knn", "c45")


@dataclass(frozen=True)
class Standardization:
    """Per-feature z-scoring; zero-spread features keep scale 1."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x) -> "Standardization":
        x = np.asarray(x, dtype=float)
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        return cls(mean, std)

    @classmethod
    def identity(cls, n_features) -> "Standardization":
        return cls(np.zeros(n_features), np.ones(n_features))

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.mean.shape[0]:
            raise SchemaError("expected %d features, got %d"
                              % (self.mean.shape[0], x.shape[-1]))
        return (x - self.mean) / self.std

    def to_json(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_json(cls, doc):
        return cls(np.asarray(doc["mean"], dtype=float),
                   np.asarray(doc["std"], dtype=float))


@dataclass(frozen=True)
class LabeledSet:
    """Feature matrix with +1/-1 labels and the fitted standardization."""

    x: np.ndarray
    y: np.ndarray
    standardization: Standardization
    xz: np.ndarray  # standardized copy of x

    @classmethod
    def from_raw(cls, x, y) -> "LabeledSet":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        if x.ndim != 2:
            raise SchemaError("feature matrix must be 2-D")
        if x.shape[0] != y.shape[0]:
            raise SchemaError("feature/label length mismatch: %d vs %d"
                              % (x.shape[0], y.shape[0]))
        if x.shape[0] == 0:
            raise DegenerateDataError("empty training set")
        if not np.isfinite(x).all():
            raise SentinelError("non-finite feature values")
        if not np.all(np.isin(y, (NORMAL, ANOMALOUS))):
            raise ConfigError("labels must be +1 or -1")
        std = Standardization.fit(x)
        return cls(x, y, std, std.apply(x))

    def __len__(self):
        return self.x.shape[0]

    @property
    def n_features(self):
        return self.x.shape[1]

    def both_classes(self) -> bool:
        return len(np.unique(self.y)) == 2

    def restrict(self, indices) -> "LabeledSet":
        """New set over a column subset; standardization is refit."""
        idx = list(indices)
        return LabeledSet.from_raw(self.x[:, idx], self.y)


def _require_two_classes(data):
    if not data.both_classes():
        raise DegenerateDataError("training data must contain both classes")


# ---------------------------------------------------------------------------
# linear soft-margin SVM


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray
    bias: float
    c_param: float
    standardization: Standardization


def svm_objective(model_or_w, data, bias=None, c_param=None):
    """Primal objective ||w||^2 / 2 + C * sum hinge on standardized data."""
    if isinstance(model_or_w, SvmModel):
        w, b, c = model_or_w.weights, model_or_w.bias, model_or_w.c_param
    else:
        w, b, c = np.asarray(model_or_w, dtype=float), bias, c_param
    margins = 1.0 - data.y * (data.xz @ w + b)
    return 0.5 * float(w @ w) + c * float(np.clip(margins, 0.0, None).sum())


def svm_train(data: LabeledSet, c_param=1.0, epochs=200, seed=0) -> SvmModel:
    """Deterministic epoch-ordered subgradient descent from w = 0.

    Epoch t sweeps the samples in data order applying per-sample
    subgradient steps at rate 1 / (c_param * t); the rate decays per
    epoch, not per sample, so early epochs move freely and later ones
    settle.  The returned weights are the best iterate by objective over
    all epoch ends, so the final objective never exceeds the initial
    c_param * n.  Training uses no randomness; seed is accepted for
    interface uniformity.
    """
    if c_param <= 0:
        raise ConfigError("c_param must be > 0")
    if epochs < 1:
        raise ConfigError("epochs must be >= 1")
    _require_two_classes(data)

    z = data.xz
    y = data.y.astype(float)
    n = len(y)

    w = np.zeros(z.shape[1])
    b = 0.0
    best_w, best_b = w.copy(), b
    best_obj = svm_objective(w, data, b, c_param)
    for t in range(1, epochs + 1):
        eta = 1.0 / (c_param * t)
        for i in range(n):
            w *= max(1.0 - eta / n, 0.0)
            if y[i] * (z[i] @ w + b) < 1.0:
                w += eta * c_param * y[i] * z[i]
                b += eta * c_param * y[i]
        obj = svm_objective(w, data, b, c_param)
        if obj < best_obj:
            best_obj, best_w, best_b = obj, w.copy(), b
    return SvmModel(best_w, best_b, c_param, data.standardization)


def svm_predict(model: SvmModel, x) -> int:
    z = model.standardization.apply(x)
    return NORMAL if float(model.weights @ z + model.bias) >= 0.0 else ANOMALOUS


# ---------------------------------------------------------------------------
# nearest neighbor (k fixed at 1)


@dataclass(frozen=True)
class KnnModel:
    points: np.ndarray  # standardized stored vectors
    labels: np.ndarray
    k: int
    metric: str
    standardization: Standardization


def knn_train(data: LabeledSet, k=1, metric="euclidean") -> KnnModel:
    if k != 1:
        raise ConfigError("only k=1 is supported, got k=%r" % (k,))
    if metric not in ("euclidean", "manhattan"):
        raise ConfigError("metric must be euclidean or manhattan, got %r"
                          % (metric,))
    _require_two_classes(data)
    return KnnModel(data.xz.copy(), data.y.copy(), k, metric,
                    data.standardization)


def knn_predict(model: KnnModel, x, k=None, metric=None) -> int:
    """Label of the nearest stored vector; distance ties pick the lowest
    stored index."""
    k = model.k if k is None else k
    if k != 1:
        raise ConfigError("only k=1 is supported, got k=%r" % (k,))
    metric = model.metric if metric is None else metric
    z = model.standardization.apply(x)
    diff = model.points - z
    if metric == "euclidean":
        dist = np.sqrt((diff * diff).sum(axis=1))
    elif metric == "manhattan":
        dist = np.abs(diff).sum(axis=1)
    else:
        raise ConfigError("metric must be euclidean or manhattan, got %r"
                          % (metric,))
    return int(model.labels[int(np.argmin(dist))])


# ---------------------------------------------------------------------------
# C4.5-style tree with rule extraction


@dataclass(frozen=True)
class Rule:
    """Conjunctive conditions (feature index, '<=' or '>', threshold) and a
    class; ``error`` is the rule's training error rate after pruning."""

    conditions: tuple
    klass: int
    error: float = 0.0

    def matches(self, z) -> bool:
        for feat, op, thr in self.conditions:
            v = z[feat]
            if op == "<=":
                if not v <= thr:
                    return False
            else:
                if not v > thr:
                    return False
        return True


@dataclass(frozen=True)
class C45Model:
    rules: tuple
    default_class: int
    standardization: Standardization


def _entropy(counts):
    total = counts.sum()
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


def _class_counts(y):
    return np.array([(y == NORMAL).sum(), (y == ANOMALOUS).sum()], dtype=float)


def _majority(y):
    pos = int((y == NORMAL).sum())
    neg = int((y == ANOMALOUS).sum())
    return NORMAL if pos >= neg else ANOMALOUS


def _best_split(x, y, min_leaf):
    """Highest-gain-ratio binary split on a midpoint threshold.

    Candidate cuts sit between adjacent distinct values whose blocks are
    not both pure of the same class; ties prefer the lowest feature index,
    then the lowest threshold.  Returns (feature, threshold) or None when
    no cut has positive gain and min_leaf-sized children.
    """
    n, d = x.shape
    base = _entropy(_class_counts(y))
    best = None
    for j in range(d):
        order = np.argsort(x[:, j], kind="stable")
        xs = x[order, j]
        ys = y[order]
        cum_pos = np.concatenate(([0], np.cumsum(ys == NORMAL)))
        values, starts = np.unique(xs, return_index=True)
        if len(values) < 2:
            continue
        bounds = np.append(starts, n)
        for k in range(len(values) - 1):
            left_n = int(bounds[k + 1])
            right_n = n - left_n
            if left_n < min_leaf or right_n < min_leaf:
                continue
            # skip cuts between two blocks pure of the same class
            bpos_a = cum_pos[bounds[k + 1]] - cum_pos[bounds[k]]
            blen_a = bounds[k + 1] - bounds[k]
            bpos_b = cum_pos[bounds[k + 2]] - cum_pos[bounds[k + 1]]
            blen_b = bounds[k + 2] - bounds[k + 1]
            if ((bpos_a == blen_a and bpos_b == blen_b)
                    or (bpos_a == 0 and bpos_b == 0)):
                continue
            lp = float(cum_pos[left_n])
            left_counts = np.array([lp, left_n - lp])
            total_pos = float(cum_pos[n])
            right_counts = np.array([total_pos - lp, right_n - (total_pos - lp)])
            gain = base - (left_n / n) * _entropy(left_counts) \
                        - (right_n / n) * _entropy(right_counts)
            if gain <= 1e-12:
                continue
            pl, pr = left_n / n, right_n / n
            split_info = -(pl * math.log2(pl) + pr * math.log2(pr))
            ratio = gain / split_info
            thr = (values[k] + values[k + 1]) / 2.0
            key = (-ratio, j, thr)
            if best is None or key < best[0]:
                best = (key, j, thr)
    if best is None:
        return None
    return best[1], best[2]


@dataclass
class _Node:
    feature: int = None
    threshold: float = None
    left: "_Node" = None
    right: "_Node" = None
    klass: int = None

    def is_leaf(self):
        return self.feature is None


def _grow(x, y, min_leaf):
    if len(np.unique(y)) == 1:
        return _Node(klass=int(y[0]))
    split = _best_split(x, y, min_leaf)
    if split is None:
        return _Node(klass=_majority(y))
    j, thr = split
    mask = x[:, j] <= thr
    node = _Node(feature=j, threshold=float(thr))
    node.left = _grow(x[mask], y[mask], min_leaf)
    node.right = _grow(x[~mask], y[~mask], min_leaf)
    return node


def _paths(node, prefix=()):
    if node.is_leaf():
        yield Rule(tuple(prefix), node.klass)
        return
    yield from _paths(node.left, prefix + ((node.feature, "<=", node.threshold),))
    yield from _paths(node.right, prefix + ((node.feature, ">", node.threshold),))


def binom_upper(errors, n, cf):
    """Upper confidence bound of a binomial error rate at confidence cf.

    The pessimistic estimate behind rule pruning: the largest error
    probability under which observing <= errors mistakes in n cases still
    has probability cf.
    """
    if n <= 0:
        return 1.0
    if errors >= n:
        return 1.0
    return float(beta_dist.ppf(1.0 - cf, errors + 1, n - errors))


def _coverage(conditions, xz):
    mask = np.ones(len(xz), dtype=bool)
    for feat, op, thr in conditions:
        col = xz[:, feat]
        mask &= (col <= thr) if op == "<=" else (col > thr)
    return mask


def _pessimistic(conditions, klass, xz, y, cf):
    mask = _coverage(conditions, xz)
    n = int(mask.sum())
    errors = int((y[mask] != klass).sum())
    return binom_upper(errors, n, cf)


def _simplify(rule, xz, y, cf):
    """Greedily drop the condition whose removal most lowers the
    pessimistic error; a tie (no worse) still drops, preferring shorter
    rules."""
    conds = list(rule.conditions)
    current = _pessimistic(conds, rule.klass, xz, y, cf)
    while conds:
        candidates = []
        for i in range(len(conds)):
            rest = conds[:i] + conds[i + 1:]
            candidates.append((_pessimistic(rest, rule.klass, xz, y, cf), i))
        cand, i = min(candidates, key=lambda ci: (ci[0], ci[1]))
        if cand <= current:
            del conds[i]
            current = cand
        else:
            break
    return Rule(tuple(conds), rule.klass), current


def c45_train(data: LabeledSet, min_leaf=2, cf=0.25) -> C45Model:
    """Grow a gain-ratio tree, flatten it to rules, prune and order them.

    Each root-to-leaf path becomes a rule; conditions are dropped while
    the pessimistic (binomial upper bound) error does not rise; duplicate
    and condition-free rules are removed; survivors sort by ascending
    training error.  The default class is the majority among training
    cases no rule covers (overall majority when everything is covered).
    """
    if min_leaf < 1:
        raise ConfigError("min_leaf must be >= 1")
    if not 0 < cf < 1:
        raise ConfigError("cf must be in (0, 1)")
    _require_two_classes(data)

    xz, y = data.xz, data.y
    tree = _grow(xz, y, min_leaf)

    rules, seen = [], set()
    for raw in _paths(tree):
        simplified, _ = _simplify(raw, xz, y, cf)
        if not simplified.conditions:
            continue
        key = (simplified.conditions, simplified.klass)
        if key in seen:
            continue
        seen.add(key)
        mask = _coverage(simplified.conditions, xz)
        n = int(mask.sum())
        err = float((y[mask] != simplified.klass).sum() / n) if n else 1.0
        rules.append(Rule(simplified.conditions, simplified.klass, err))

    rules.sort(key=lambda r: r.error)
    covered = np.zeros(len(y), dtype=bool)
    for rule in rules:
        covered |= _coverage(rule.conditions, xz)
    uncovered = y[~covered]
    default = _majority(uncovered) if uncovered.size else _majority(y)
    return C45Model(tuple(rules), default, data.standardization)


def c45_predict(model: C45Model, x) -> int:
    """Class of the first matching rule, or the default class."""
    z = model.standardization.apply(x)
    for rule in model.rules:
        if rule.matches(z):
            return rule.klass
    return model.default_class


# ---------------------------------------------------------------------------
# dispatch and model files


def train_classifier(kind, data, **hyper):
    if kind == "svm":
        return svm_train(data, **hyper)
    if kind == "knn":
        return knn_train(data, **hyper)
    if kind == "c45":
        return c45_train(data, **hyper)
    raise ConfigError("unknown classifier kind %r" % (kind,))


def predict_label(model, x) -> int:
    if isinstance(model, SvmModel):
        return svm_predict(model, x)
    if isinstance(model, KnnModel):
        return knn_predict(model, x)
    if isinstance(model, C45Model):
        return c45_predict(model, x)
    raise ConfigError("unknown model type %r" % type(model).__name__)


def model_kind(model) -> str:
    return {SvmModel: "svm", KnnModel: "knn", C45Model: "c45"}[type(model)]


def model_to_json(model) -> dict:
    if isinstance(model, SvmModel):
        return {"kind": "svm", "weights": model.weights.tolist(),
                "bias": model.bias, "c_param": model.c_param,
                "standardization": model.standardization.to_json()}
    if isinstance(model, KnnModel):
        return {"kind": "knn", "points": model.points.tolist(),
                "labels": model.labels.tolist(), "k": model.k,
                "metric": model.metric,
                "standardization": model.standardization.to_json()}
    if isinstance(model, C45Model):
        return {"kind": "c45",
                "rules": [{"conditions": [[f, op, thr] for f, op, thr in r.conditions],
                           "class": r.klass, "error": r.error}
                          for r in model.rules],
                "default_class": model.default_class,
                "standardization": model.standardization.to_json()}
    raise ConfigError("unknown model type %r" % type(model).__name__)


def model_from_json(doc):
    kind = doc.get("kind")
    std = Standardization.from_json(doc["standardization"])
    if kind == "svm":
        return SvmModel(np.asarray(doc["weights"], dtype=float),
                        float(doc["bias"]), float(doc["c_param"]), std)
    if kind == "knn":
        return KnnModel(np.asarray(doc["points"], dtype=float),
                        np.asarray(doc["labels"], dtype=int),
                        int(doc["k"]), doc["metric"], std)
    if kind == "c45":
        rules = tuple(Rule(tuple((int(f), op, float(thr))
                                 for f, op, thr in r["conditions"]),
                           int(r["class"]), float(r["error"]))
                      for r in doc["rules"])
        return C45Model(rules, int(doc["default_class"]), std)
    raise ConfigError("unknown model kind %r" % (kind,))


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_json(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        return model_from_json(json.load(fh))
