"""Synthetic plant-telemetry generator with attack injection.

Produces per-group data traces whose normal readings stay inside each
parameter's alarm threshold and paired event traces that emit one symbol
per parameter reading on a fixed periodic schedule.  Attacks overwrite a
chosen pattern of signal parameters with values above threshold and plant
a repetition burst of the matching symbols inside the row's event chunk.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .core import (ANOMALOUS, ConfigError, DataRow, DataTrace, EventTrace,
                   GROUP_HOURS, GROUPS, NORMAL, derive_seed, parse_data_trace,
                   parse_event_trace, write_data_trace, write_event_trace)
from .profiler import ParameterSpec, ThresholdProfile, compute_threshold

ATTACK_PATTERNS = ("one", "three", "five", "mixed")
_PATTERN_COUNTS = {"one": 1, "three": 3, "five": 5}

DEFAULT_POWER_OFFSETS = {"MD": 1.00, "AD": 1.06, "ED": 1.12, "ND": 0.94}

# Signal parameters calibrated so the thresholds land on round alarm values:
# fuel gas flow, main steam valve, gas booster valve, exhaust gas temperature
# and generated power.
SIGNAL_DEFAULTS = (
    ("FGF", 500.0, 334.17),
    ("MSV", 45.0, 10.63),
    ("GBV", 5.0, 1.4645),
    ("EGT", 560.0, 434.8),
    ("Power", 1120.0, 806.06),
)

# Filler instrumentation channels; informative of nothing, present to make
# the full feature view noisy.  (name, psi); baseline mu is 0.6 * psi.
FILLER_POOL = (
    ("AFR", 60.0), ("BPT", 640.0), ("CDP", 32.0), ("CIT", 55.0),
    ("GEN", 60.0), ("HPT", 920.0), ("IGV", 88.0), ("LOP", 9.0),
    ("LOT", 140.0), ("LPT", 610.0), ("NGS", 108.0), ("OPR", 16.0),
    ("WFT", 85.0),
)


@dataclass(frozen=True)
class ParamModel:
    """Generator shape of one parameter: limit, target baseline, noise."""

    psi: float
    mu: float
    rel_std: float = 0.05

    def __post_init__(self):
        if not self.psi > 0:
            raise ConfigError("psi must be > 0")
        if not 0 < self.mu < self.psi:
            raise ConfigError("target mu must satisfy 0 < mu < psi")
        if self.rel_std < 0:
            raise ConfigError("rel_std must be >= 0")


@dataclass(frozen=True)
class GeneratorConfig:
    signal: dict = None
    extra_params: int = 13
    rows_per_group: int = 180
    attack_rate: float = 0.25
    attack_pattern: str = "five"
    power_offsets: dict = None
    seed: int = 0
    cadence_s: int = 60
    burst_len: int = 2

    def __post_init__(self):
        if self.signal is None:
            object.__setattr__(self, "signal",
                               {n: ParamModel(psi, mu)
                                for n, psi, mu in SIGNAL_DEFAULTS})
        if self.power_offsets is None:
            object.__setattr__(self, "power_offsets",
                               dict(DEFAULT_POWER_OFFSETS))
        if not self.signal:
            raise ConfigError("at least one signal parameter required")
        if self.extra_params < 0:
            raise ConfigError("extra_params must be >= 0")
        if self.rows_per_group < 1:
            raise ConfigError("rows_per_group must be >= 1")
        if not 0 <= self.attack_rate <= 1:
            raise ConfigError("attack_rate must be in [0, 1]")
        if self.attack_pattern not in ATTACK_PATTERNS:
            raise ConfigError("attack_pattern must be one of %s"
                              % (ATTACK_PATTERNS,))
        if set(self.power_offsets) != set(GROUPS):
            raise ConfigError("power_offsets must cover exactly %s" % (GROUPS,))
        if any(v <= 0 for v in self.power_offsets.values()):
            raise ConfigError("power offsets must be positive")
        if self.cadence_s < 1:
            raise ConfigError("cadence_s must be >= 1")
        if self.burst_len < 1:
            raise ConfigError("burst_len must be >= 1")
        # every group-effective baseline must stay strictly inside (0, psi)
        for group in GROUPS:
            for name, pm in self.parameters().items():
                mu = self.effective_mu(name, group)
                if not 0 < mu < pm.psi:
                    raise ConfigError(
                        "effective mu %g for %r in group %s outside (0, psi)"
                        % (mu, name, group))

    def fillers(self) -> dict:
        out = {}
        for i in range(self.extra_params):
            if i < len(FILLER_POOL):
                name, psi = FILLER_POOL[i]
            else:
                name, psi = "X%02d" % (i + 1), 100.0
            out[name] = ParamModel(psi, 0.6 * psi)
        return out

    def parameters(self) -> dict:
        """All parameters in schema order: signal first, then fillers."""
        out = dict(self.signal)
        for name, pm in self.fillers().items():
            if name in out:
                raise ConfigError("filler name %r collides with signal" % name)
            out[name] = pm
        return out

    def schema(self) -> tuple:
        return tuple(self.parameters())

    def signal_names(self) -> tuple:
        return tuple(self.signal)

    def effective_mu(self, name, group) -> float:
        """Group demand scaling applies to the Power channel only."""
        pm = self.parameters()[name]
        if name == "Power":
            return pm.mu * self.power_offsets[group]
        return pm.mu

    def to_json(self) -> dict:
        # the signal order defines the schema, so it rides in a list that
        # key-sorting serializers cannot reorder
        return {
            "signal": [[n, {"psi": p.psi, "mu": p.mu, "rel_std": p.rel_std}]
                       for n, p in self.signal.items()],
            "extra_params": self.extra_params,
            "rows_per_group": self.rows_per_group,
            "attack_rate": self.attack_rate,
            "attack_pattern": self.attack_pattern,
            "power_offsets": dict(self.power_offsets),
            "seed": self.seed,
            "cadence_s": self.cadence_s,
            "burst_len": self.burst_len,
        }

    @classmethod
    def from_json(cls, doc) -> "GeneratorConfig":
        signal = None
        if "signal" in doc:
            raw = doc["signal"]
            pairs = raw.items() if isinstance(raw, dict) else raw
            signal = {n: ParamModel(b["psi"], b["mu"],
                                    b.get("rel_std", 0.05))
                      for n, b in pairs}
        kwargs = {k: doc[k] for k in
                  ("extra_params", "rows_per_group", "attack_rate",
                   "attack_pattern", "power_offsets", "seed", "cadence_s",
                   "burst_len") if k in doc}
        return cls(signal=signal, **kwargs)


def default_config(seed=0, **overrides) -> GeneratorConfig:
    return replace(GeneratorConfig(seed=seed), **overrides)


def config_hash(config: GeneratorConfig) -> str:
    text = json.dumps(config.to_json(), sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def group_profile(config: GeneratorConfig, group) -> ThresholdProfile:
    """The generator's own alarm geometry for one group (ground truth)."""
    if group not in GROUPS:
        raise ConfigError("unknown group %r" % (group,))
    params = {}
    for name, pm in config.parameters().items():
        mu = config.effective_mu(name, group)
        delta, p_th = compute_threshold(pm.psi, mu)
        params[name] = ParameterSpec(name, pm.psi, mu, delta, p_th)
    return ThresholdProfile(params)


def _truncated_normal(rng, mean, sd, upper, n):
    """Normal draws rejection-truncated to (0, upper]."""
    if not 0 < mean <= upper:
        raise ConfigError("mean %g outside the acceptance band (0, %g]"
                          % (mean, upper))
    x = rng.normal(mean, sd, n)
    for _ in range(200):
        bad = (x <= 0) | (x > upper)
        if not bad.any():
            return x
        x[bad] = rng.normal(mean, sd, int(bad.sum()))
    raise ConfigError("rejection sampling keeps missing (0, %g]" % upper)


def gen_normal(config: GeneratorConfig, group, n, seed=None, start_row=0):
    """``n`` rows of normal operation for one group plus the paired events.

    Readings are normal draws around the group-effective baseline,
    rejection-truncated to (0, P_th], so no normal row ever counts as
    compromised against the generator profile.  Timestamps advance one
    cadence step per row inside the group's 6 h interval, rolling to the
    next day when the interval fills.  Labels are +1.
    """
    if group not in GROUPS:
        raise ConfigError("unknown group %r" % (group,))
    if n < 0:
        raise ConfigError("row count must be >= 0")
    if seed is None:
        seed = derive_seed(config.seed, group, "normal")
    rng = np.random.default_rng(seed)
    profile = group_profile(config, group)
    schema = config.schema()

    columns = {}
    for name, pm in config.parameters().items():
        mu = config.effective_mu(name, group)
        sd = pm.rel_std * mu
        columns[name] = _truncated_normal(rng, mu, sd, profile.threshold(name), n)

    per_interval = max(1, (6 * 3600) // config.cadence_s)
    start_hour = GROUP_HOURS[group]
    rows = []
    for i in range(n):
        abs_row = start_row + i
        day, slot = divmod(abs_row, per_interval)
        ts = day * 86400 + start_hour * 3600 + slot * config.cadence_s
        values = {name: float(columns[name][i]) for name in schema}
        rows.append(DataRow(ts, group, values, NORMAL))
    events = EventTrace([name for _ in range(n) for name in schema])
    return DataTrace(schema, rows), events


def inject_attacks(trace: DataTrace, events, profile: ThresholdProfile,
                   pattern, rate, seed, signal=None, burst_len=2):
    """Overwrite round(rate * n) uniformly chosen rows with attack values.

    Each attacked row gets its pattern's parameters drawn uniformly from
    (P_th, psi] and the label -1; other rows keep +1.  When ``events`` is
    given, every attacked parameter's symbol is additionally written over
    ``burst_len`` filler-symbol slots of the row's fixed-length event
    chunk, so chunk alignment survives.  Returns (trace, events).
    """
    if pattern not in ATTACK_PATTERNS:
        raise ConfigError("attack pattern must be one of %s" % (ATTACK_PATTERNS,))
    if not 0 <= rate <= 1:
        raise ConfigError("rate must be in [0, 1]")
    for i, row in enumerate(trace.rows):
        if row.label == ANOMALOUS:
            raise ConfigError("row %d is already anomalous" % i)
    if signal is None:
        signal = [n for n in trace.schema if n in profile.parameters]
    signal = [n for n in trace.schema if n in set(signal)]  # schema order
    signal_set = set(signal)
    if not signal:
        raise ConfigError("no attackable parameters")

    schema = trace.schema
    n = len(trace)
    n_attack = int(round(rate * n))
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(n, size=n_attack, replace=False).tolist()) \
        if n_attack else []

    symbols = None
    if events is not None:
        if len(events) != n * len(schema):
            raise ConfigError(
                "event trace length %d does not pair with %d rows of %d "
                "parameters" % (len(events), n, len(schema)))
        symbols = list(events.events)

    rows = list(trace.rows)
    for i in range(n):
        if rows[i].label is None:
            rows[i] = DataRow(rows[i].timestamp, rows[i].group,
                              rows[i].values, NORMAL)
    for i in chosen:
        eff = pattern
        if eff == "mixed":
            eff = str(rng.choice(("one", "three", "five")))
        count = _PATTERN_COUNTS[eff]
        if count > len(signal):
            raise ConfigError("pattern %r needs %d signal parameters, have %d"
                              % (eff, count, len(signal)))
        picked = rng.choice(len(signal), size=count, replace=False)
        attacked = [signal[j] for j in sorted(picked.tolist())]

        values = dict(rows[i].values)
        for name in attacked:
            spec = profile.spec(name)
            values[name] = spec.p_th + (1.0 - rng.random()) * (spec.psi - spec.p_th)
        rows[i] = DataRow(rows[i].timestamp, rows[i].group, values, ANOMALOUS)

        if symbols is not None:
            base = i * len(schema)
            free = [base + j for j, name in enumerate(schema)
                    if name not in signal_set]
            pos = 0
            for name in attacked:
                for _ in range(burst_len):
                    if pos >= len(free):
                        break
                    symbols[free[pos]] = name
                    pos += 1

    out_events = EventTrace(symbols) if symbols is not None else None
    return DataTrace(schema, rows), out_events


@dataclass(frozen=True)
class GroupData:
    train: DataTrace
    test: DataTrace
    train_events: EventTrace
    test_events: EventTrace
    profile: ThresholdProfile  # generator ground truth for the group


@dataclass(frozen=True)
class Campaign:
    config: GeneratorConfig
    groups: dict
    signal: tuple


def gen_campaign(config: GeneratorConfig = None) -> Campaign:
    """Four-group campaign: attack-free train partitions (25 % of each
    group's data) and test partitions with attacks injected at the
    configured rate.  Fully deterministic under config.seed."""
    config = config or GeneratorConfig()
    signal = config.signal_names()
    groups = {}
    for group in GROUPS:
        profile = group_profile(config, group)
        n_test = config.rows_per_group
        n_train = int(round(n_test / 3.0))  # train is 25 % of train+test
        train, train_ev = gen_normal(config, group, n_train,
                                     seed=derive_seed(config.seed, group, "train"))
        test, test_ev = gen_normal(config, group, n_test,
                                   seed=derive_seed(config.seed, group, "test"),
                                   start_row=n_train)
        test, test_ev = inject_attacks(
            test, test_ev, profile, config.attack_pattern, config.attack_rate,
            seed=derive_seed(config.seed, group, "attack"),
            signal=signal, burst_len=config.burst_len)
        groups[group] = GroupData(train, test, train_ev, test_ev, profile)
    return Campaign(config, groups, signal)


def save_campaign(campaign: Campaign, outdir):
    """Write one CSV + events file pair per group partition and a manifest
    recording the seed and config hash.  Output is byte-deterministic."""
    os.makedirs(outdir, exist_ok=True)
    files = {}
    for group, data in campaign.groups.items():
        entries = {}
        for part, trace, events in (("train", data.train, data.train_events),
                                    ("test", data.test, data.test_events)):
            csv_name = "%s_%s.csv" % (group, part)
            ev_name = "%s_%s.events" % (group, part)
            write_data_trace(os.path.join(outdir, csv_name), trace)
            write_event_trace(os.path.join(outdir, ev_name), events)
            entries[part] = {"data": csv_name, "events": ev_name}
        files[group] = entries
    manifest = {
        "seed": campaign.config.seed,
        "config_hash": config_hash(campaign.config),
        "config": campaign.config.to_json(),
        "schema": list(campaign.config.schema()),
        "signal": list(campaign.signal),
        "files": files,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_campaign(directory) -> Campaign:
    path = os.path.join(directory, "manifest.json")
    with open(path) as fh:
        manifest = json.load(fh)
    config = GeneratorConfig.from_json(manifest["config"])
    schema = config.schema()
    groups = {}
    for group, entries in manifest["files"].items():
        profile = group_profile(config, group)
        train = parse_data_trace(os.path.join(directory, entries["train"]["data"]), schema)
        test = parse_data_trace(os.path.join(directory, entries["test"]["data"]), schema)
        train_ev = parse_event_trace(os.path.join(directory, entries["train"]["events"]))
        test_ev = parse_event_trace(os.path.join(directory, entries["test"]["events"]))
        groups[group] = GroupData(train, test, train_ev, test_ev, profile)
    return Campaign(config, groups, tuple(manifest["signal"]))
