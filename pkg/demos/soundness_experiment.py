"""Cheating provers against the verifier, with empirical acceptance rates
next to the proven per-round bounds.  Use more trials for tighter rates.
"""

from certilin.experiment import STRATEGIES, format_table, soundness_experiment

rows = []
for name in ("nonsingular-singular", "rank-upper-low", "charpoly-wrong-g", "frobenius-tamper"):
    print(STRATEGIES[name].description)
    rows.extend(soundness_experiment(name, (1, 2, 3), trials=500, seed=1))
print(format_table(rows))
