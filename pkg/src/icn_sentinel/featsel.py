"""Wrapper feature selection over the package's own classifiers.

Subsets are scored by stratified 5-fold cross-validated accuracy of a
chosen classifier kind; a greedy forward search and a genetic search are
provided.  Both are deterministic for a fixed dataset and seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, DegenerateDataError, InsufficientDataError
from .classifiers import LabeledSet, predict_label, train_classifier

PARSIMONY_PENALTY = 0.002

# fast hyperparameters for the inner CV loop
_EVAL_HYPER = {
    "svm": {"c_param": 1.0, "epochs": 60, "seed": 0},
    "knn": {"k": 1, "metric": "euclidean"},
    "c45": {"min_leaf": 2, "cf": 0.25},
}


@dataclass(frozen=True)
class FeatureSubset:
    """Selected column indices (ascending) and their CV accuracy."""

    indices: tuple
    score: float


@dataclass(frozen=True)
class GaConfig:
    population: int = 30
    generations: int = 40
    crossover_rate: float = 0.9
    mutation_rate: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ConfigError("population must be >= 2")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigError("%s must be in [0, 1], got %r" % (name, v))


def stratified_folds(y, folds=5, seed=0):
    """Per-class round-robin fold assignment; deterministic under seed."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=int)
    for klass in np.unique(y):
        idx = np.flatnonzero(y == klass)
        idx = idx[rng.permutation(len(idx))]
        for pos, i in enumerate(idx):
            assignment[i] = pos % folds
    return assignment


def cross_val_accuracy(data: LabeledSet, indices, evaluator="knn", folds=5,
                       seed=0) -> float:
    """Pooled accuracy of the evaluator over stratified CV folds.

    Standardization is refit on each training fold; folds whose training
    side lost a class are impossible by the round-robin construction for
    classes with >= 2 members.
    """
    indices = sorted(indices)
    if not indices:
        raise ConfigError("cannot evaluate an empty feature subset")
    if evaluator not in _EVAL_HYPER:
        raise ConfigError("unknown evaluator %r" % (evaluator,))
    x = data.x[:, indices]
    y = data.y
    counts = np.unique(y, return_counts=True)[1]
    if counts.min() < 2:
        raise DegenerateDataError(
            "cross-validation needs >= 2 members per class")
    assignment = stratified_folds(y, folds=folds, seed=seed)
    correct = 0
    for fold in range(folds):
        mask = assignment == fold
        if not mask.any():
            continue
        train = LabeledSet.from_raw(x[~mask], y[~mask])
        model = train_classifier(evaluator, train, **_EVAL_HYPER[evaluator])
        for xi, yi in zip(x[mask], y[mask]):
            if predict_label(model, xi) == yi:
                correct += 1
    return correct / len(y)


def greedy_select(data: LabeledSet, evaluator="knn", max_features=None,
                  folds=5, seed=0) -> FeatureSubset:
    """Forward selection: repeatedly add the feature that raises CV
    accuracy the most (lowest index on ties); stop when nothing improves
    or max_features is reached."""
    if not data.both_classes():
        raise DegenerateDataError("selection needs both classes")
    n = data.n_features
    if max_features is None:
        max_features = n
    if max_features < 1:
        raise ConfigError("max_features must be >= 1")

    chosen = []
    best_score = -1.0
    while len(chosen) < min(max_features, n):
        best_step = None
        for j in range(n):
            if j in chosen:
                continue
            score = cross_val_accuracy(data, chosen + [j], evaluator,
                                       folds=folds, seed=seed)
            if best_step is None or score > best_step[0] + 1e-12:
                best_step = (score, j)
        if best_step is None or best_step[0] <= best_score + 1e-12:
            break
        best_score = best_step[0]
        chosen.append(best_step[1])
    if not chosen:
        raise InsufficientDataError("no feature improved on the empty subset")
    return FeatureSubset(tuple(sorted(chosen)), best_score)


def _mask_key(mask):
    return np.packbits(mask).tobytes()


def genetic_select(data: LabeledSet, evaluator="knn", config=None,
                   initial_masks=None, folds=5, return_history=False):
    """Genetic search over feature bitmasks.

    Fitness is CV accuracy minus 0.002 per selected feature; selection is
    tournament of three, recombination uniform crossover, then per-bit
    mutation.  The best individual ever seen is preserved and returned.
    With return_history the per-generation best-ever fitness list (a
    non-decreasing sequence) comes back as a second value.
    """
    if not data.both_classes():
        raise DegenerateDataError("selection needs both classes")
    config = config or GaConfig()
    n = data.n_features
    rng = np.random.default_rng(config.seed)

    cache = {}

    def fitness(mask):
        key = _mask_key(mask)
        if key not in cache:
            indices = np.flatnonzero(mask)
            acc = cross_val_accuracy(data, indices.tolist(), evaluator,
                                     folds=folds, seed=config.seed)
            cache[key] = (acc - PARSIMONY_PENALTY * len(indices), acc)
        return cache[key]

    def random_mask():
        while True:
            mask = rng.random(n) < 0.5
            if mask.any():
                return mask

    population = []
    if initial_masks is not None:
        for m in initial_masks:
            mask = np.asarray(m, dtype=bool)
            if mask.shape != (n,) or not mask.any():
                raise ConfigError("initial masks must be non-empty length-%d"
                                  % n)
            population.append(mask.copy())
    while len(population) < config.population:
        population.append(random_mask())
    population = population[:config.population]

    def tournament(scores):
        picks = rng.integers(0, len(population), size=3)
        best = min(picks, key=lambda i: (-scores[i], i))
        return population[best]

    best_mask = None
    best_fit = -np.inf
    history = []
    for _ in range(config.generations):
        scores = [fitness(m)[0] for m in population]
        top = int(np.argmax(scores))
        if scores[top] > best_fit:
            best_fit = scores[top]
            best_mask = population[top].copy()
        history.append(best_fit)

        nxt = [best_mask.copy()]  # elitism
        while len(nxt) < config.population:
            pa = tournament(scores)
            pb = tournament(scores)
            if rng.random() < config.crossover_rate:
                coin = rng.random(n) < 0.5
                child = np.where(coin, pa, pb)
            else:
                child = pa.copy()
            flip = rng.random(n) < config.mutation_rate
            child = child ^ flip
            if not child.any():
                child[rng.integers(0, n)] = True
            nxt.append(child)
        population = nxt

    # final population still counts toward best-ever
    scores = [fitness(m)[0] for m in population]
    top = int(np.argmax(scores))
    if scores[top] > best_fit:
        best_fit = scores[top]
        best_mask = population[top].copy()

    accuracy = fitness(best_mask)[1]
    subset = FeatureSubset(tuple(np.flatnonzero(best_mask).tolist()), accuracy)
    if return_history:
        return subset, history
    return subset
