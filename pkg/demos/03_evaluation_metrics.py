"""Evaluation protocol: single / multi / overall settings, per-label
accuracy, chance-corrected agreement, and Bradley-Terry win rates.

Run: python3 demos/03_evaluation_metrics.py
"""

import math

import numpy as np

from critpick.core import ConditionKind
from critpick.evaluation import evaluate
from critpick.metrics import (
    ConfusionMatrix3,
    TiePolicy,
    bt_fit_two,
    bt_win_rate,
    cohens_kappa,
)
from critpick.scorers import LinearScorer, OracleScorer
from critpick.synthetic import random_benchmark

bench = random_benchmark(120, seed=11)

# The gold-label oracle is the calibration ceiling: accuracy 1.0 and
# kappa 1.0 under every setting (tie band must be positive to emit ties).
print("oracle scorer:")
oracle = OracleScorer(bench)
for setting in ConditionKind:
    run = evaluate(bench, oracle, setting, tie_band=0.5)
    report = run.report
    print(f"  {setting.value:8s} n={report.n_instances:5d} "
          f"avg={report.avg_accuracy:.3f} kappa={report.kappa:.3f}")

# An untrained random linear judge sits near chance; kappa near zero.
rng = np.random.default_rng(0)
d_img = len(bench[0].image_a.features)
random_judge = LinearScorer(
    weights=tuple(rng.normal(size=2 * d_img + 8)), bias=0.0, text_dim=8
)
print("\nrandom linear judge:")
for setting in ConditionKind:
    report = evaluate(bench, random_judge, setting, tie_band=0.3).report
    print(f"  {setting.value:8s} n={report.n_instances:5d} "
          f"avg={report.avg_accuracy:.3f} kappa={report.kappa:+.3f}")

# Kappa on a hand-built confusion matrix: 60% observed agreement over
# uniform marginals gives (0.6 - 1/3) / (1 - 1/3) = 0.4 exactly.
cm = ConfusionMatrix3(np.array([[30, 10, 10], [10, 30, 10], [10, 10, 30]]))
print("\nworked kappa example:", cohens_kappa(cm))

# Bradley-Terry processing of human preference counts.
print("\nBradley-Terry:")
print("  win rate at score gap ln 3:", bt_win_rate(math.log(3), 0.0))
gap, rate = bt_fit_two(wins_ours=75, wins_base=25, ties=10, tie_policy=TiePolicy.HALF)
print(f"  75W/25L/10T (ties as half wins): gap={gap:.4f} win_rate={rate:.4f}")
