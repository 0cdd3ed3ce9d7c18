"""Inter-arrival curves over event traces and their conformance testing.

For an event type e and window size w, every full window of w consecutive
events starting at an occurrence of e yields a count of e inside it.  The
minimum and maximum of those counts over the trace, as functions of w, are
the lower and upper inter-arrival curves.  A model aggregates per-trace
curves from normal operation into mean curves with Student-t confidence
bands; a test trace conforms when a Mann-Whitney U test cannot tell its
curve from the model mean, or when it can but the relative band exceedance
stays below a tunable deviation threshold sigma_th.
"""

from __future__ import annotations

import bisect
import json
import math
from collections import Counter
from dataclasses import dataclass
from itertools import groupby

import numpy as np
from scipy.stats import t as student_t

from .core import (ConfigError, EventNotFoundError, EventTrace,
                   InsufficientDataError, SensitivityDegree, SentinelError)

DEFAULT_W_DELTA = 25
DEFAULT_CONFIDENCE = 0.95
DEFAULT_ALPHA = 0.05
DEFAULT_SIGMA_TH = 0.05

# Largest |a|*|b| for which the exact permutation p-value is computed.
EXACT_LIMIT = 400


@dataclass(frozen=True)
class IacCurve:
    """One inter-arrival curve: window size -> event count."""

    event: str
    kind: str  # "min" or "max"
    values: dict

    def windows(self) -> tuple:
        return tuple(sorted(self.values))


def min_max_curves(trace: EventTrace, event, w_delta):
    """Lower and upper inter-arrival curves of ``event`` up to width w_delta.

    Windows always start at an occurrence of the event and only full
    windows count, so widths with no full window are absent from the
    result.  Raises EventNotFoundError when the event never occurs.
    """
    if w_delta < 1:
        raise ConfigError("w_delta must be >= 1, got %r" % (w_delta,))
    symbols = trace.events
    n = len(symbols)
    positions = [i for i, s in enumerate(symbols) if s == event]
    if not positions:
        raise EventNotFoundError("event %r does not occur in the trace" % (event,))

    # prefix[i] = occurrences of event in symbols[:i]
    prefix = [0] * (n + 1)
    for i, s in enumerate(symbols):
        prefix[i + 1] = prefix[i] + (1 if s == event else 0)

    mins, maxs = {}, {}
    for w in range(1, w_delta + 1):
        counts = [prefix[i + w] - prefix[i] for i in positions if i + w <= n]
        if not counts:
            continue
        mins[w] = min(counts)
        maxs[w] = max(counts)
    return (IacCurve(event, "min", mins), IacCurve(event, "max", maxs))


def _select_from_counts(counts: Counter, significance_pct) -> set:
    if not 0 < significance_pct <= 100:
        raise ConfigError("significance_pct must be in (0, 100], got %r"
                          % (significance_pct,))
    total = sum(counts.values())
    if total == 0:
        raise InsufficientDataError("no events to select from")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    selected, cum = set(), 0
    need = significance_pct / 100.0 * total
    for symbol, count in ranked:
        selected.add(symbol)
        cum += count
        if cum >= need - 1e-9:
            break
    return selected


def select_feature_events(traces, significance_pct) -> set:
    """Smallest most-frequent event set covering ``significance_pct`` of
    all occurrences; frequency-descending with lexicographic tie-break."""
    counts = Counter()
    for trace in traces:
        counts.update(trace.events)
    return _select_from_counts(counts, significance_pct)


def aggregate(curve_pairs, confidence=DEFAULT_CONFIDENCE) -> dict:
    """Six-curve aggregation over per-trace (min, max) curve pairs.

    Returns {w: (min_mean, min_lo, min_hi, max_mean, max_lo, max_hi)} over
    the window sizes present in every pair; the lo/hi bounds are two-sided
    Student-t confidence limits of the mean at ``confidence``.  Needs at
    least two pairs.
    """
    if not 0 < confidence < 1:
        raise ConfigError("confidence must be in (0, 1), got %r" % (confidence,))
    pairs = list(curve_pairs)
    if len(pairs) < 2:
        raise InsufficientDataError(
            "aggregation needs >= 2 traces, got %d" % len(pairs))
    events = {cmin.event for cmin, _ in pairs} | {cmax.event for _, cmax in pairs}
    if len(events) != 1:
        raise SentinelError("cannot aggregate curves of different events: %s"
                            % sorted(events))

    shared = None
    for cmin, cmax in pairs:
        windows = set(cmin.values) & set(cmax.values)
        shared = windows if shared is None else shared & windows
    n = len(pairs)
    quantile = float(student_t.ppf(0.5 + confidence / 2.0, n - 1))

    bands = {}
    for w in sorted(shared):
        entry = []
        for pick in (0, 1):  # 0 -> min curves, 1 -> max curves
            sample = np.array([pair[pick].values[w] for pair in pairs], dtype=float)
            mean = float(sample.mean())
            half = quantile * float(sample.std(ddof=1)) / math.sqrt(n)
            entry += [mean, mean - half, mean + half]
        bands[w] = tuple(entry)
    return bands


def _twice_u(a, b):
    """2 * U_a with midrank tie handling, as an exact integer."""
    b_sorted = sorted(b)
    tu = 0
    for x in a:
        lo = bisect.bisect_left(b_sorted, x)
        hi = bisect.bisect_right(b_sorted, x)
        tu += 2 * lo + (hi - lo)
    return tu


def _exact_p(a, b, tu_obs):
    """Two-sided permutation p-value of the U statistic, ties included.

    Dynamic program over tied value groups: choosing c of a group's g
    pooled copies for sample a contributes 2*c*(earlier b count) + c*(g-c)
    to 2U.  Counts are exact integers, so the returned probability is the
    exact rational share of label assignments at least as extreme as the
    observation (the 2U distribution is symmetric about n*m).
    """
    n, m = len(a), len(b)
    pooled = sorted(list(a) + list(b))
    states = {(0, 0): 1}
    seen = 0
    for _, grp in groupby(pooled):
        g = len(list(grp))
        nxt = {}
        for (used, tu), ways in states.items():
            b_before = seen - used
            top = min(g, n - used)
            for c in range(top + 1):
                key = (used + c, tu + 2 * c * b_before + c * (g - c))
                nxt[key] = nxt.get(key, 0) + ways * math.comb(g, c)
        states = nxt
        seen += g
    center = n * m
    dev = abs(tu_obs - center)
    qualifying = sum(w for (used, tu), w in states.items()
                     if used == n and abs(tu - center) >= dev)
    total = math.comb(n + m, n)
    return qualifying / total


def _asymptotic_p(a, b, u_a):
    """Normal approximation with tie-corrected variance and continuity
    correction."""
    n, m = len(a), len(b)
    big_n = n + m
    counts = Counter(list(a) + list(b))
    tie_term = sum(t ** 3 - t for t in counts.values())
    var = n * m / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1.0)))
    if var <= 0:
        return 1.0
    d = u_a - n * m / 2.0
    if d > 0:
        d -= 0.5
    elif d < 0:
        d += 0.5
    z = d / math.sqrt(var)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return min(1.0, max(p, 0.0))


def mann_whitney_u(a, b):
    """Two-sided Mann-Whitney U test; returns (U of sample a, p-value).

    Exact permutation p when |a|*|b| <= 400, tie-corrected normal
    approximation otherwise.  Identical samples give p = 1.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    if not a or not b:
        raise InsufficientDataError("both samples must be non-empty")
    tu = _twice_u(a, b)
    u_a = tu / 2.0
    if len(a) * len(b) <= EXACT_LIMIT:
        p = _exact_p(a, b, tu)
    else:
        p = _asymptotic_p(a, b, u_a)
    return u_a, p


@dataclass(frozen=True)
class EventVerdict:
    """Conformance outcome of one tested event."""

    event: str
    passed_min: bool
    passed_max: bool
    p_min: float
    p_max: float
    deviation_min: float
    deviation_max: float
    anomalous: bool


@dataclass(frozen=True)
class TraceVerdict:
    """Overall conformance verdict with per-event detail."""

    events: dict
    required: int
    anomalous: bool


@dataclass(frozen=True)
class IacModel:
    """Aggregated normal-behavior curves plus the test configuration."""

    curves: dict  # event -> {w: (min_mean, min_lo, min_hi, max_mean, max_lo, max_hi)}
    w_delta: int = DEFAULT_W_DELTA
    confidence: float = DEFAULT_CONFIDENCE
    alpha: float = DEFAULT_ALPHA
    sigma_th: float = DEFAULT_SIGMA_TH
    feature_events: tuple = ()
    frequencies: dict = None

    def events_for_significance(self, significance_pct) -> set:
        """Most-frequent training events covering significance_pct of
        occurrences (same rule as select_feature_events)."""
        if not self.frequencies:
            return set(self.feature_events)
        return _select_from_counts(Counter(self.frequencies), significance_pct)

    def to_json(self) -> dict:
        events = {e: {str(w): list(band) for w, band in bands.items()}
                  for e, bands in self.curves.items()}
        return {
            "events": events,
            "feature_events": sorted(self.feature_events),
            "frequencies": dict(self.frequencies or {}),
            "w_delta": self.w_delta,
            "confidence": self.confidence,
            "alpha": self.alpha,
            "sigma_th": self.sigma_th,
        }

    @classmethod
    def from_json(cls, doc) -> "IacModel":
        curves = {e: {int(w): tuple(band) for w, band in bands.items()}
                  for e, bands in doc["events"].items()}
        return cls(curves,
                   w_delta=int(doc["w_delta"]),
                   confidence=float(doc["confidence"]),
                   alpha=float(doc["alpha"]),
                   sigma_th=float(doc["sigma_th"]),
                   feature_events=tuple(doc["feature_events"]),
                   frequencies={k: int(v) for k, v in doc.get("frequencies", {}).items()})

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "IacModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def train_iac_model(traces, w_delta=DEFAULT_W_DELTA, confidence=DEFAULT_CONFIDENCE,
                    significance_pct=100.0, alpha=DEFAULT_ALPHA,
                    sigma_th=DEFAULT_SIGMA_TH) -> IacModel:
    """Aggregate per-trace curves from >= 2 normal traces into a model.

    Curves are kept for the feature events selected at significance_pct;
    an event present in fewer than two traces gets an empty band map and
    will fail closed at classification time.
    """
    traces = list(traces)
    if len(traces) < 2:
        raise InsufficientDataError(
            "model training needs >= 2 traces, got %d" % len(traces))
    counts = Counter()
    for trace in traces:
        counts.update(trace.events)
    feature_events = _select_from_counts(counts, significance_pct)

    curves = {}
    for event in sorted(feature_events):
        pairs = [min_max_curves(trace, event, w_delta)
                 for trace in traces if event in trace.alphabet()]
        curves[event] = aggregate(pairs, confidence) if len(pairs) >= 2 else {}
    return IacModel(curves, w_delta=w_delta, confidence=confidence,
                    alpha=alpha, sigma_th=sigma_th,
                    feature_events=tuple(sorted(feature_events)),
                    frequencies=dict(counts))


def _band_deviation(values, bands, pick):
    """Mean relative exceedance of the test curve outside its band.

    pick 0 compares against the min-curve band, pick 1 against max.
    """
    total = 0.0
    windows = sorted(values)
    for w in windows:
        mean, lo, hi = bands[w][3 * pick:3 * pick + 3]
        x = values[w]
        outside = max(0.0, lo - x, x - hi)
        total += outside / max(mean, 1.0)
    return total / len(windows)


def classify_trace(test: EventTrace, model: IacModel, alpha=None, sigma_th=None,
                   sensitivity=None, events=None) -> TraceVerdict:
    """Conformance-test a trace against a model.

    Per tested event the test curve values are compared with the model
    mean curve values over shared window sizes by a Mann-Whitney U test,
    independently for the min and max curves; a curve fails when
    p < alpha, and a failed curve only counts as anomalous when its band
    deviation reaches sigma_th.  Events unknown to the model, or absent
    from the test trace, fail closed as anomalous (this dominates even an
    infinite sigma_th).  The trace is anomalous when at least
    sensitivity.required_count(len(tested)) events are.
    """
    alpha = model.alpha if alpha is None else alpha
    sigma_th = model.sigma_th if sigma_th is None else sigma_th
    sensitivity = sensitivity or SensitivityDegree(100)
    tested = sorted(events) if events is not None else sorted(model.feature_events)
    if not tested:
        raise ConfigError("no events to test")

    alphabet = test.alphabet()
    verdicts = {}
    for event in tested:
        bands = model.curves.get(event)
        if not bands or event not in alphabet:
            verdicts[event] = EventVerdict(event, False, False, 0.0, 0.0,
                                           math.inf, math.inf, True)
            continue
        c_min, c_max = min_max_curves(test, event, model.w_delta)
        shared = sorted(set(c_min.values) & set(bands))
        if not shared:
            verdicts[event] = EventVerdict(event, False, False, 0.0, 0.0,
                                           math.inf, math.inf, True)
            continue

        test_min = {w: float(c_min.values[w]) for w in shared}
        test_max = {w: float(c_max.values[w]) for w in shared}
        _, p_min = mann_whitney_u([test_min[w] for w in shared],
                                  [bands[w][0] for w in shared])
        _, p_max = mann_whitney_u([test_max[w] for w in shared],
                                  [bands[w][3] for w in shared])
        dev_min = _band_deviation(test_min, bands, 0)
        dev_max = _band_deviation(test_max, bands, 1)
        passed_min, passed_max = p_min >= alpha, p_max >= alpha
        anomalous = ((not passed_min and dev_min >= sigma_th)
                     or (not passed_max and dev_max >= sigma_th))
        verdicts[event] = EventVerdict(event, passed_min, passed_max,
                                       p_min, p_max, dev_min, dev_max,
                                       anomalous)

    required = sensitivity.required_count(len(tested))
    flagged = sum(1 for v in verdicts.values() if v.anomalous)
    return TraceVerdict(verdicts, required, flagged >= required)
