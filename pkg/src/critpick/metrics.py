"""Evaluation metrics: per-label accuracy, Cohen's kappa, Bradley-Terry
win rates, and ranking-to-pairwise expansion for the human study.

Kappa is computed on the 3x3 confusion matrix of gold vs predicted labels:

    kappa = (P_o - P_e) / (1 - P_e)

with P_o the observed agreement (diagonal over total) and
P_e = sum_i R_i * C_i / N^2 the chance agreement from the marginals. Counts
are integers, so both quantities are evaluated in exact rational arithmetic
and converted to float once at the end.

The two-player Bradley-Terry model gives P(ours beats base) =
exp(s_ours) / (exp(s_ours) + exp(s_base)), a logistic in the score gap.
For a (wins, losses, ties) record the maximum-likelihood gap is
log(w_eff / l_eff); shutouts are clamped to +/- log(n_eff + 1) with a
warning rather than diverging.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from critpick.core import ConditionKind, PreferenceLabel
from critpick.scorers import sigmoid

LABEL_ORDER = (PreferenceLabel.A_WINS, PreferenceLabel.B_WINS, PreferenceLabel.TIE)
_LABEL_INDEX = {label: i for i, label in enumerate(LABEL_ORDER)}

STUDY_CANDIDATES = 4


class KappaUndefined(ValueError):
    """Chance agreement is 1; kappa has no value."""


@dataclass
class ConfusionMatrix3:
    """3x3 integer grid; rows are gold labels, columns predictions.

    Label order is (A wins, B wins, tie) on both axes. Accumulation is
    commutative, so shards evaluated in parallel merge by addition.
    """

    counts: np.ndarray = field(
        default_factory=lambda: np.zeros((3, 3), dtype=np.int64)
    )

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (3, 3):
            raise ValueError("confusion matrix must be 3x3")
        if (self.counts < 0).any():
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add(self, gold: PreferenceLabel, pred: PreferenceLabel, weight: int = 1) -> None:
        self.counts[_LABEL_INDEX[gold], _LABEL_INDEX[pred]] += weight

    def merge(self, other: "ConfusionMatrix3") -> "ConfusionMatrix3":
        return ConfusionMatrix3(self.counts + other.counts)


def accumulate(
    gold: PreferenceLabel, pred: PreferenceLabel, cm: ConfusionMatrix3
) -> ConfusionMatrix3:
    """Record one judgment; mutates and returns `cm` for chaining."""
    cm.add(gold, pred)
    return cm


def per_label_accuracy(
    cm: ConfusionMatrix3,
) -> tuple[dict[PreferenceLabel, float], float]:
    """Per-gold-label accuracy plus the instance-weighted average.

    Labels with no gold instances are omitted from the map. The average is
    total diagonal over total count (instance-weighted), matching how a
    single overall accuracy is usually reported; the macro mean of the
    per-label values is available via `macro_accuracy`.
    """
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    accuracies: dict[PreferenceLabel, float] = {}
    for label in LABEL_ORDER:
        i = _LABEL_INDEX[label]
        row = int(cm.counts[i].sum())
        if row > 0:
            accuracies[label] = int(cm.counts[i, i]) / row
    avg = int(np.trace(cm.counts)) / cm.total
    return accuracies, avg


def macro_accuracy(cm: ConfusionMatrix3) -> float:
    """Unweighted mean of the per-label accuracies over nonempty rows."""
    accuracies, _ = per_label_accuracy(cm)
    return sum(accuracies.values()) / len(accuracies)


def cohens_kappa(cm: ConfusionMatrix3) -> float:
    """Chance-corrected agreement; exact rationals internally."""
    n = cm.total
    if n == 0:
        raise ValueError("kappa needs a nonempty confusion matrix")
    counts = cm.counts
    p_o = Fraction(int(np.trace(counts)), n)
    p_e = sum(
        Fraction(int(counts[i].sum()) * int(counts[:, i].sum()), n * n)
        for i in range(3)
    )
    if p_e == 1:
        raise KappaUndefined(
            "marginals are concentrated on one label with perfect agreement"
        )
    return float((p_o - p_e) / (1 - p_e))


@dataclass(frozen=True)
class EvalReport:
    """Accuracy and agreement for one evaluation setting.

    Accuracies and kappa are None when the setting produced no scoreable
    instances (or kappa alone when chance agreement is degenerate).
    """

    setting: ConditionKind
    n_instances: int
    per_label_accuracy: dict[PreferenceLabel, float]
    avg_accuracy: float | None
    macro_avg_accuracy: float | None
    kappa: float | None
    n_errors: int = 0

    def to_dict(self) -> dict:
        return {
            "setting": self.setting.value,
            "n_instances": self.n_instances,
            "per_label_accuracy": {
                label.value: acc for label, acc in self.per_label_accuracy.items()
            },
            "avg_accuracy": self.avg_accuracy,
            "macro_avg_accuracy": self.macro_avg_accuracy,
            "kappa": self.kappa,
            "n_errors": self.n_errors,
        }


def report_from_confusion(
    cm: ConfusionMatrix3, setting: ConditionKind, n_errors: int = 0
) -> EvalReport:
    if cm.total == 0:
        return EvalReport(
            setting=setting,
            n_instances=0,
            per_label_accuracy={},
            avg_accuracy=None,
            macro_avg_accuracy=None,
            kappa=None,
            n_errors=n_errors,
        )
    accuracies, avg = per_label_accuracy(cm)
    try:
        kappa = cohens_kappa(cm)
    except KappaUndefined:
        kappa = None
    return EvalReport(
        setting=setting,
        n_instances=cm.total,
        per_label_accuracy=accuracies,
        avg_accuracy=avg,
        macro_avg_accuracy=sum(accuracies.values()) / len(accuracies),
        kappa=kappa,
        n_errors=n_errors,
    )


def bt_win_rate(s_ours: float, s_base: float) -> float:
    """P(ours preferred) under Bradley-Terry scores; overflow-safe.

    Evaluated as the sigmoid of the score gap, with the losing side
    computed as the exact complement so that
    ``bt_win_rate(s, b) + bt_win_rate(b, s) == 1`` holds exactly.
    """
    if not (math.isfinite(s_ours) and math.isfinite(s_base)):
        raise ValueError("scores must be finite")
    gap = s_ours - s_base
    favored = sigmoid(abs(gap))  # in [0.5, 1], so 1 - favored is exact
    return favored if gap >= 0 else 1.0 - favored


class TiePolicy(enum.Enum):
    HALF = "half"  # a tie is half a win for each side
    DROP = "drop"


def bt_fit_two(
    wins_ours: int, wins_base: int, ties: int, tie_policy: TiePolicy = TiePolicy.HALF
) -> tuple[float, float]:
    """Two-player Bradley-Terry fit: (score gap, win rate).

    Closed-form MLE: gap = log(w_eff / l_eff), win rate =
    w_eff / (w_eff + l_eff). A shutout (either side at zero) is clamped to
    a gap of +/- log(n_eff + 1) and the corresponding logistic win rate,
    with a warning; small human studies produce shutouts routinely and an
    infinite gap would be useless downstream.
    """
    if min(wins_ours, wins_base, ties) < 0:
        raise ValueError("counts must be nonnegative")
    if tie_policy is TiePolicy.HALF:
        w_eff = wins_ours + 0.5 * ties
        l_eff = wins_base + 0.5 * ties
    else:
        w_eff = float(wins_ours)
        l_eff = float(wins_base)
    n_eff = w_eff + l_eff
    if n_eff == 0:
        raise ValueError("no effective comparisons after applying the tie policy")
    if w_eff == 0 or l_eff == 0:
        gap = math.copysign(math.log(n_eff + 1), w_eff - l_eff)
        warnings.warn(
            f"degenerate Bradley-Terry record ({wins_ours}W/{wins_base}L/{ties}T): "
            f"score gap clamped to {gap:.4f}",
            stacklevel=2,
        )
        return gap, sigmoid(gap)
    return math.log(w_eff / l_eff), w_eff / n_eff


@dataclass(frozen=True)
class PairwiseOutcomes:
    """Expansion of one ranking into all unordered pair outcomes."""

    decisive: tuple[tuple[str, str], ...]  # (winner, loser)
    ties: tuple[tuple[str, str], ...]

    def __len__(self) -> int:
        return len(self.decisive) + len(self.ties)


def rankings_to_pairwise(
    ranking: dict[str, int],
    duplicate_groups: tuple[tuple[str, ...], ...] | list = (),
) -> PairwiseOutcomes:
    """Expand a 4-way ranking (ties allowed) into pairwise outcomes.

    `ranking` maps each of exactly four candidates to a rank in 1..4, lower
    is better. Candidates within a `duplicate_groups` entry showed the same
    underlying image and must carry equal ranks. Emits all C(4,2) = 6
    unordered pair outcomes: lower rank wins, equal ranks tie.
    """
    if len(ranking) != STUDY_CANDIDATES:
        raise ValueError(
            f"a study ranking covers exactly {STUDY_CANDIDATES} candidates, "
            f"got {len(ranking)}"
        )
    for candidate, rank in ranking.items():
        if not isinstance(rank, int) or isinstance(rank, bool):
            raise ValueError(f"rank for {candidate!r} must be an integer")
        if not 1 <= rank <= STUDY_CANDIDATES:
            raise ValueError(
                f"rank for {candidate!r} must be in 1..{STUDY_CANDIDATES}, got {rank}"
            )
    for group in duplicate_groups:
        members = [c for c in group if c in ranking]
        ranks = {ranking[c] for c in members}
        if len(ranks) > 1:
            raise ValueError(
                f"candidates {sorted(members)} show the same image and must "
                f"receive exactly the same rank, got {sorted(ranks)}"
            )

    decisive: list[tuple[str, str]] = []
    ties: list[tuple[str, str]] = []
    ordered = sorted(ranking)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            if ranking[a] < ranking[b]:
                decisive.append((a, b))
            elif ranking[a] > ranking[b]:
                decisive.append((b, a))
            else:
                ties.append((a, b))
    return PairwiseOutcomes(decisive=tuple(decisive), ties=tuple(ties))
