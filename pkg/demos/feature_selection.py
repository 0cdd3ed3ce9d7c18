#!/usr/bin/env python3
# Wrapper feature selection on a dataset where each attack perturbs a
# single randomly chosen signal parameter: every one of the 5 signal
# features is needed, none of the 13 filler features helps.

import numpy as np

from icn_sentinel import (GaConfig, LabeledSet, default_config, derive_seed,
                          genetic_select, greedy_select)
from icn_sentinel.synth import gen_normal, group_profile, inject_attacks

config = default_config()
profile = group_profile(config, "MD")
clean, events = gen_normal(config, "MD", 180)
planted, _ = inject_attacks(clean, events, profile, "one", 0.25,
                            seed=derive_seed(config.seed, "MD", "plant"),
                            signal=list(config.signal_names()),
                            burst_len=config.burst_len)

schema = list(planted.schema)
y = np.array(planted.labels())
data = LabeledSet.from_raw(planted.to_matrix(), y)
print("dataset: %d rows, %d features, %d attacked"
      % (len(y), len(schema), int((y == -1).sum())))

subset = greedy_select(data, evaluator="knn", seed=0)
print("\ngreedy forward selection:")
print("  features:", [schema[i] for i in subset.indices])
print("  cv accuracy: %.4f" % subset.score)

ga, history = genetic_select(data, evaluator="knn", config=GaConfig(seed=0),
                             return_history=True)
print("\ngenetic search (population 30, 40 generations):")
print("  features:", [schema[i] for i in ga.indices])
print("  cv accuracy: %.4f" % ga.score)
print("  best fitness by generation (every 5th):")
print("  " + "  ".join("%.4f" % v for v in history[::5]))

# dropping any selected feature loses the attacks hidden in it
from icn_sentinel import cross_val_accuracy
full = cross_val_accuracy(data, subset.indices, evaluator="knn")
for drop in subset.indices:
    rest = tuple(i for i in subset.indices if i != drop)
    acc = cross_val_accuracy(data, rest, evaluator="knn")
    print("without %-6s accuracy %.4f (full subset %.4f)"
          % (schema[drop], acc, full))
