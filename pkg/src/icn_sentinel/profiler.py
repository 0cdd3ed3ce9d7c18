"""Normal-behavior threshold profiles.

A profile stores, per parameter, the upper physical limit psi, a trimmed
baseline mu learned from normal operation, the relative tolerance
delta = |psi - mu| / psi and the alarm threshold P_th = mu * delta + mu.
Readings strictly above P_th count as compromised.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import (ConfigError, InsufficientDataError, ParameterSpec,
                   SchemaError)

DEFAULT_TRIM_FRACTION = 0.1
DEFAULT_WINDOW_LEN = 1440


def trim_mean(values, trim_fraction):
    """Mean after dropping floor(trim_fraction * n) values from each end.

    Trimming is by sorted order, so up to that many corrupted extremes per
    side cannot move the baseline.
    """
    if not 0 <= trim_fraction < 0.5:
        raise ConfigError("trim_fraction must be in [0, 0.5), got %r"
                          % (trim_fraction,))
    data = np.sort(np.asarray(values, dtype=float))
    n = data.size
    if n == 0:
        raise InsufficientDataError("trim_mean of an empty sequence")
    k = int(math.floor(trim_fraction * n))
    if n - 2 * k < 1:
        raise InsufficientDataError(
            "trimming %d from each end of %d values leaves nothing" % (k, n))
    return float(data[k:n - k].mean())


def compute_threshold(psi, mu):
    """Tolerance and alarm threshold for one parameter.

    delta = |psi - mu| / psi, P_th = mu * delta + mu.  For mu in [0, psi]
    this equals mu * (2 - mu/psi): anchored at 0 for mu = 0, at psi for
    mu = psi, and strictly increasing in between.
    """
    if not psi > 0:
        raise ConfigError("psi must be > 0, got %r" % (psi,))
    if mu < 0:
        raise ConfigError("mu must be >= 0, got %r" % (mu,))
    delta = abs(psi - mu) / psi
    p_th = mu * delta + mu
    return delta, p_th


def invert_threshold(psi, p_th):
    """Baseline mu whose threshold equals p_th (smaller quadratic root).

    Solves mu * (2 - mu/psi) = p_th for mu in [0, psi].
    """
    if not psi > 0:
        raise ConfigError("psi must be > 0, got %r" % (psi,))
    if not 0 <= p_th <= psi:
        raise ConfigError("p_th must lie in [0, psi], got %r" % (p_th,))
    return psi * (1.0 - math.sqrt(1.0 - p_th / psi))


@dataclass(frozen=True)
class ThresholdProfile:
    """Per-parameter alarm geometry plus the settings that produced it."""

    parameters: dict
    trim_fraction: float = DEFAULT_TRIM_FRACTION
    window_len: int = DEFAULT_WINDOW_LEN

    def spec(self, name) -> ParameterSpec:
        try:
            return self.parameters[name]
        except KeyError:
            raise SchemaError("profile has no parameter %r" % (name,))

    def threshold(self, name) -> float:
        return self.spec(name).p_th

    def names(self) -> tuple:
        return tuple(self.parameters)

    def to_json(self) -> dict:
        doc = {name: {"psi": s.psi, "mu": s.mu, "delta": s.delta, "p_th": s.p_th}
               for name, s in self.parameters.items()}
        doc["_settings"] = {"trim_fraction": self.trim_fraction,
                           "window_len": self.window_len}
        return doc

    @classmethod
    def from_json(cls, doc) -> "ThresholdProfile":
        settings = doc.get("_settings", {})
        params = {}
        for name, body in doc.items():
            if name == "_settings":
                continue
            params[name] = ParameterSpec(name, body["psi"], body["mu"],
                                         body["delta"], body["p_th"])
        return cls(params,
                   trim_fraction=settings.get("trim_fraction", DEFAULT_TRIM_FRACTION),
                   window_len=settings.get("window_len", DEFAULT_WINDOW_LEN))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ThresholdProfile":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def build_profile(train, limits, trim_fraction=DEFAULT_TRIM_FRACTION,
                  window_len=DEFAULT_WINDOW_LEN) -> ThresholdProfile:
    """Learn a profile from normal-operation rows.

    mu per parameter is the trimmed mean over the most recent
    ``window_len`` rows (the whole trace when shorter); ``limits`` maps
    every schema parameter to its physical limit psi.
    """
    if len(train) == 0:
        raise InsufficientDataError("cannot profile an empty trace")
    if window_len < 1:
        raise ConfigError("window_len must be >= 1, got %r" % (window_len,))
    missing = [n for n in train.schema if n not in limits]
    if missing:
        raise SchemaError("no limit (psi) for parameters %s" % missing)

    recent = train.rows[-window_len:]
    params = {}
    for name in train.schema:
        column = [row.values[name] for row in recent]
        mu = trim_mean(column, trim_fraction)
        delta, p_th = compute_threshold(limits[name], mu)
        params[name] = ParameterSpec(name, float(limits[name]), mu, delta, p_th)
    return ThresholdProfile(params, trim_fraction=trim_fraction,
                            window_len=window_len)


def count_compromised(row, profile: ThresholdProfile, features) -> int:
    """Number of ``features`` whose reading strictly exceeds its threshold."""
    count = 0
    for name in features:
        spec = profile.spec(name)
        if name not in row.values:
            raise SchemaError("row has no parameter %r" % (name,))
        if row.values[name] > spec.p_th:
            count += 1
    return count
