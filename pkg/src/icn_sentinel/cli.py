"""Command line front end.

Subcommands: gen (synthesize a campaign), train (profile + curve model +
classifier from labeled data), detect (dual detection over a trace),
select (wrapper feature selection), evaluate (full scenario matrix with
acceptance thresholds).

Exit codes: 0 success, 1 acceptance thresholds unmet, 2 usage error,
3 data or model error.  The ICN_SENTINEL_SEED environment variable seeds
any command that was not given --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .core import (NORMAL, ConfigError, DataTrace, SensitivityDegree,
                   SentinelError, infer_schema, parse_data_trace,
                   parse_event_trace)
from .classifiers import LabeledSet, load_model, save_model, train_classifier
from .featsel import GaConfig, genetic_select, greedy_select
from .harness import (MatrixConfig, dual_detect, event_chunks, run_matrix)
from .iac import IacModel, train_iac_model
from .profiler import ThresholdProfile, build_profile
from .synth import (GeneratorConfig, config_hash, default_config,
                    gen_campaign, load_campaign, save_campaign)

DEFAULT_ACCEPTANCE = [
    {"dataset": "reduced", "s_pct": 20,
     "min_adr": 100.0, "max_fpr": 0.0, "min_sa": 100.0},
]


def _resolve_seed(args_seed, fallback=0):
    if args_seed is not None:
        return int(args_seed)
    env = os.environ.get("ICN_SENTINEL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("ICN_SENTINEL_SEED must be an integer, got %r"
                              % env)
    return fallback


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def cmd_gen(args):
    if args.config:
        config = GeneratorConfig.from_json(_load_json(args.config))
    else:
        config = default_config()
    seed = _resolve_seed(args.seed, fallback=config.seed)
    config = replace(config, seed=seed)
    campaign = gen_campaign(config)
    save_campaign(campaign, args.out)
    total = sum(len(g.test) + len(g.train) for g in campaign.groups.values())
    print("campaign written to %s (%d groups, %d rows, seed %d)"
          % (args.out, len(campaign.groups), total, seed))
    return 0


def _limits_from_config(args, schema):
    if args.config:
        config = GeneratorConfig.from_json(_load_json(args.config))
    else:
        config = default_config()
    known = {name: pm.psi for name, pm in config.parameters().items()}
    missing = [n for n in schema if n not in known]
    if missing:
        raise ConfigError("no psi limit configured for %s" % missing)
    return {n: known[n] for n in schema}


def cmd_train(args):
    seed = _resolve_seed(args.seed)
    schema = infer_schema(args.data)
    trace = parse_data_trace(args.data, schema)
    if not trace.is_labeled():
        raise ConfigError("training data must be labeled")
    events = parse_event_trace(args.events)
    chunks = event_chunks(events, len(schema))
    if len(chunks) != len(trace):
        raise ConfigError("event trace does not pair with the data rows")

    normal_rows = [i for i, r in enumerate(trace.rows) if r.label == NORMAL]
    if not normal_rows:
        raise ConfigError("no normal rows to profile")
    normal_trace = DataTrace(trace.schema, [trace.rows[i] for i in normal_rows])
    limits = _limits_from_config(args, schema)
    profile = build_profile(normal_trace, limits)
    iac_model = train_iac_model([chunks[i] for i in normal_rows],
                                w_delta=args.w_delta, alpha=args.alpha,
                                sigma_th=args.sigma_th)
    data = LabeledSet.from_raw(trace.to_matrix(), trace.labels())
    hyper = {"svm": {"c_param": 1.0, "epochs": 200, "seed": seed},
             "knn": {"k": args.k}, "c45": {}}[args.algo]
    model = train_classifier(args.algo, data, **hyper)

    os.makedirs(args.out, exist_ok=True)
    profile.save(os.path.join(args.out, "profile.json"))
    iac_model.save(os.path.join(args.out, "iac_model.json"))
    save_model(model, os.path.join(args.out, "model_%s.json" % args.algo))
    if args.config:
        limits_hash = config_hash(GeneratorConfig.from_json(_load_json(args.config)))
    else:
        limits_hash = config_hash(default_config())
    meta = {"schema": list(schema), "features": list(schema),
            "algo": args.algo, "seed": seed, "config_hash": limits_hash}
    with open(os.path.join(args.out, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print("models written to %s (profile, curves, %s)" % (args.out, args.algo))
    return 0


def cmd_detect(args):
    meta = _load_json(os.path.join(args.models, "meta.json"))
    schema = tuple(meta["schema"])
    features = tuple(meta["features"])
    algo = args.algo or meta["algo"]
    profile = ThresholdProfile.load(os.path.join(args.models, "profile.json"))
    iac_model = IacModel.load(os.path.join(args.models, "iac_model.json"))
    model = load_model(os.path.join(args.models, "model_%s.json" % algo))

    trace = parse_data_trace(args.data, schema)
    chunks = event_chunks(parse_event_trace(args.events), len(schema))
    if len(chunks) != len(trace):
        raise ConfigError("event trace does not pair with the data rows")
    sens = SensitivityDegree(args.sensitivity)

    lines = [("row", "ts", "group", "threshold_pass", "iac_pass", "verdict")]
    anomalous = 0
    for i, row in enumerate(trace.rows):
        verdict = dual_detect(row, chunks[i], profile, iac_model, model,
                              features, sens, alpha=args.alpha,
                              sigma_th=args.sigma_th)
        if not verdict.normal:
            anomalous += 1
        lines.append((str(i), str(row.timestamp), row.group,
                      str(verdict.threshold_pass), str(verdict.iac_pass),
                      "normal" if verdict.normal else "anomalous"))
    text = "\n".join(",".join(line) for line in lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print("%d of %d rows anomalous (sensitivity %d%%)"
          % (anomalous, len(trace), args.sensitivity))
    return 0


def cmd_select(args):
    seed = _resolve_seed(args.seed)
    schema = infer_schema(args.data)
    trace = parse_data_trace(args.data, schema)
    data = LabeledSet.from_raw(trace.to_matrix(), trace.labels())
    if args.method == "greedy":
        subset = greedy_select(data, evaluator=args.algo,
                               max_features=args.max_features, seed=seed)
    else:
        subset = genetic_select(data, evaluator=args.algo,
                                config=GaConfig(seed=seed))
    doc = {"features": [schema[i] for i in subset.indices],
           "score": subset.score}
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _check_acceptance(report, rules):
    failures = []
    for rule in rules:
        match = {}
        for key in ("dataset", "s_pct", "classifier", "group"):
            if key in rule:
                match[key] = rule[key]
        rows = report.rows(**match)
        for r in rows:
            if "min_adr" in rule and r.adr < rule["min_adr"] - 1e-9:
                failures.append("%s/%s/S%d/%s: ADR %.2f < %.2f"
                                % (r.classifier, r.dataset, r.s_pct, r.group,
                                   r.adr, rule["min_adr"]))
            if "max_fpr" in rule and r.fpr > rule["max_fpr"] + 1e-9:
                failures.append("%s/%s/S%d/%s: FPR %.2f > %.2f"
                                % (r.classifier, r.dataset, r.s_pct, r.group,
                                   r.fpr, rule["max_fpr"]))
            if "min_sa" in rule and r.sa < rule["min_sa"] - 1e-9:
                failures.append("%s/%s/S%d/%s: SA %.2f < %.2f"
                                % (r.classifier, r.dataset, r.s_pct, r.group,
                                   r.sa, rule["min_sa"]))
    return failures


def cmd_evaluate(args):
    seed = _resolve_seed(args.seed)
    campaign = load_campaign(args.campaign)
    groups = args.groups.split(",") if args.groups else None
    datasets = [args.dataset] if args.dataset else None
    sensitivities = [args.sensitivity] if args.sensitivity else None
    classifiers = [args.algo] if args.algo else None
    report = run_matrix(campaign, MatrixConfig(seed=seed), groups=groups,
                        datasets=datasets, sensitivities=sensitivities,
                        classifiers=classifiers)
    tables = report.render_tables()
    sys.stdout.write(tables)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        report.to_csv(os.path.join(args.out, "report.csv"))
        with open(os.path.join(args.out, "report.txt"), "w") as fh:
            fh.write(tables)
        run = {"seed": seed, "config_hash": config_hash(campaign.config)}
        with open(os.path.join(args.out, "run.json"), "w") as fh:
            json.dump(run, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print("report written to %s" % args.out)

    rules = DEFAULT_ACCEPTANCE
    if args.config:
        doc = _load_json(args.config)
        rules = doc.get("acceptance", rules)
    failures = _check_acceptance(report, rules)
    if failures:
        for line in failures:
            print("acceptance failure: %s" % line, file=sys.stderr)
        return 1
    print("acceptance thresholds met (%d cells)" % len(report.results))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="icn-sentinel",
        description="Threshold and inter-arrival-curve anomaly detection "
                    "over plant telemetry")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="synthesize a detection campaign")
    p.add_argument("--config", help="generator config JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="fit profile, curve model and classifier")
    p.add_argument("--data", required=True, help="labeled training CSV")
    p.add_argument("--events", required=True, help="paired event trace")
    p.add_argument("--algo", choices=("svm", "knn", "c45"), default="svm")
    p.add_argument("--k", type=int, default=1, help="neighbor count (knn)")
    p.add_argument("--config", help="generator config JSON (psi limits)")
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--sigma-th", type=float, default=0.05)
    p.add_argument("--w-delta", type=int, default=25)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="dual detection over a trace")
    p.add_argument("--data", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--models", required=True, help="directory from train")
    p.add_argument("--algo", choices=("svm", "knn", "c45"), default=None)
    p.add_argument("--sensitivity", type=int, choices=(20, 60, 100),
                   default=100)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--sigma-th", type=float, default=None)
    p.add_argument("--out", default=None, help="verdict CSV path")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("select", help="wrapper feature selection")
    p.add_argument("--data", required=True, help="labeled CSV")
    p.add_argument("--method", choices=("greedy", "genetic"), default="greedy")
    p.add_argument("--algo", choices=("svm", "knn", "c45"), default="knn",
                   help="evaluator classifier")
    p.add_argument("--max-features", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="JSON output path")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="scenario matrix over a campaign")
    p.add_argument("--campaign", required=True, help="directory from gen")
    p.add_argument("--out", default=None, help="report output directory")
    p.add_argument("--groups", default=None, help="comma list, e.g. MD,AD")
    p.add_argument("--dataset", choices=("full", "reduced"), default=None)
    p.add_argument("--sensitivity", type=int, choices=(20, 60, 100),
                   default=None)
    p.add_argument("--algo", choices=("svm", "knn", "c45"), default=None)
    p.add_argument("--config", help="JSON with acceptance thresholds")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SentinelError, OSError, json.JSONDecodeError, KeyError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
