"""Preference losses and a deterministic trainer for the linear judge.

Both objectives are logistic losses over a three-valued target
y in {0, 0.5, 1} (B wins, tie, A wins). With margin m (the per-image score
difference for the pointwise objective, the direct comparison score for the
pairwise one):

    L(m, y) = -y * log(sigmoid(m + eps)) - (1 - y) * log(1 - sigmoid(m) + eps)

The stability term eps sits inside the sigmoid argument in the first term
and outside in the second; this asymmetric placement is implemented
literally. A symmetric variant that instead clamps sigmoid(m) to
[eps, 1 - eps] is available behind `LossConfig.clamp_probabilities`; at
eps = 1e-8 the two differ by less than 1e-7 in loss.

Training is plain SGD with a fixed learning rate, either per-example or
full-batch per epoch, fully deterministic under a fixed seed.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from critpick.core import PreferenceLabel, label_to_target
from critpick.scorers import (
    LinearScorer,
    ScoreRequest,
    assemble_features,
    sigmoid,
    single_image_features,
)
from critpick.seeding import substream


class Objective(enum.Enum):
    POINTWISE = "pointwise"
    PAIRWISE = "pairwise"


@dataclass(frozen=True)
class LossConfig:
    objective: Objective = Objective.PAIRWISE
    epsilon: float = 1e-8
    learning_rate: float = 0.05
    epochs: int = 1
    seed: int = 0
    shuffle: bool = True
    full_batch: bool = False
    clamp_probabilities: bool = False

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"training loss became non-finite at epoch {epoch}")


def _check_margin(margin: float) -> None:
    if not math.isfinite(margin):
        raise ValueError(f"score must be finite, got {margin!r}")


def _check_target(target: float) -> None:
    if target not in (0.0, 0.5, 1.0):
        raise ValueError(f"target must be one of 0, 0.5, 1, got {target!r}")


def _neg_log(x: float) -> float:
    """-log(x) extended with -log(0) = inf (saturated sigmoid underflow)."""
    return math.inf if x <= 0.0 else -math.log(x)


def preference_loss(
    margin: float, target: float, epsilon: float = 1e-8, clamp: bool = False
) -> float:
    """Shared logistic loss over a margin; see the module docstring.

    Terms with a zero coefficient are skipped (the 0 * log(0) convention),
    so a fully saturated correct prediction costs ~0 instead of tripping a
    domain error; a saturated *wrong* prediction yields an infinite loss,
    which the trainer reports as divergence. Note the literal formula can
    dip about epsilon below zero deep in the saturated-correct regime,
    where log(1 - sigmoid(m) + epsilon) turns positive.
    """
    _check_margin(margin)
    _check_target(target)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    p = sigmoid(margin)
    if clamp:
        p = min(max(p, epsilon), 1.0 - epsilon)
        first = target * _neg_log(p) if target > 0 else 0.0
        second = (1.0 - target) * _neg_log(1.0 - p) if target < 1 else 0.0
        return first + second
    first = target * _neg_log(sigmoid(margin + epsilon)) if target > 0 else 0.0
    second = (1.0 - target) * _neg_log(1.0 - p + epsilon) if target < 1 else 0.0
    return first + second


def pointwise_loss(delta_r: float, target: float, epsilon: float = 1e-8) -> float:
    """Loss on the per-image score difference r_a - r_b."""
    return preference_loss(delta_r, target, epsilon)


def pairwise_loss(s: float, target: float, epsilon: float = 1e-8) -> float:
    """Loss on the direct comparison score s."""
    return preference_loss(s, target, epsilon)


def loss_gradient(
    margin: float,
    target: float,
    epsilon: float = 1e-8,
    objective: Objective = Objective.PAIRWISE,
    clamp: bool = False,
) -> float:
    """Exact derivative dL/dm of `preference_loss` at the given margin.

    The objective only selects which margin the caller feeds in; the
    analytic form is shared.
    """
    del objective
    _check_margin(margin)
    _check_target(target)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    p = sigmoid(margin)
    if clamp:
        pc = min(max(p, epsilon), 1.0 - epsilon)
        interior = epsilon < p < 1.0 - epsilon
        if not interior:
            return 0.0
        return -target * (1.0 - pc) + (1.0 - target) * pc
    # d/dm of -y*log(sigmoid(m + eps)): -y * (1 - sigmoid(m + eps))
    # d/dm of -(1-y)*log(1 - sigmoid(m) + eps): (1-y) * p*(1-p) / (1 - p + eps)
    return -target * (1.0 - sigmoid(margin + epsilon)) + (1.0 - target) * p * (
        1.0 - p
    ) / (1.0 - p + epsilon)


@dataclass(frozen=True)
class TrainingResult:
    scorer: LinearScorer
    epoch_losses: tuple[float, ...]


def _margin_features(
    req: ScoreRequest, scorer: LinearScorer, objective: Objective
) -> np.ndarray:
    """Feature vector phi with margin = w . phi (+ bias for pairwise).

    For the pointwise pathway the bias and text block cancel in
    r_a - r_b, leaving only the image-difference block.
    """
    if objective is Objective.PAIRWISE:
        return assemble_features(req, scorer.text_dim)
    phi_a = single_image_features(req.image_a, req.prompt, req.condition, scorer.text_dim)
    phi_b = single_image_features(req.image_b, req.prompt, req.condition, scorer.text_dim)
    return phi_a - phi_b


def _margin_of(features: np.ndarray, scorer: LinearScorer, objective: Objective) -> float:
    m = float(scorer.weight_vector() @ features)
    if objective is Objective.PAIRWISE:
        m += scorer.bias
    return m


def dataset_loss(
    dataset: Sequence[tuple[ScoreRequest, PreferenceLabel]],
    scorer: LinearScorer,
    cfg: LossConfig,
) -> float:
    """Mean loss over a dataset under the configured objective."""
    total = 0.0
    for req, label in dataset:
        phi = _margin_features(req, scorer, cfg.objective)
        total += preference_loss(
            _margin_of(phi, scorer, cfg.objective),
            label_to_target(label),
            cfg.epsilon,
            clamp=cfg.clamp_probabilities,
        )
    return total / len(dataset)


def train_linear_scorer(
    dataset: Sequence[tuple[ScoreRequest, PreferenceLabel]],
    cfg: LossConfig,
    init: LinearScorer,
) -> TrainingResult:
    """Fit the linear judge by gradient descent.

    Per-example SGD by default (visit order reshuffled each epoch when
    `cfg.shuffle`, from a seeded substream); `cfg.full_batch` switches to
    one averaged update per epoch. Records the mean dataset loss after each
    epoch. Raises `TrainingDiverged` naming the epoch if the loss leaves
    the finite range.
    """
    if not dataset:
        raise ValueError("training dataset must be non-empty")

    features = [
        _margin_features(req, init, cfg.objective) for req, _ in dataset
    ]
    targets = [label_to_target(label) for _, label in dataset]
    for phi in features:
        if phi.shape[0] != len(init.weights):
            raise ValueError(
                f"feature length {phi.shape[0]} does not match scorer "
                f"weight length {len(init.weights)}"
            )

    w = init.weight_vector().copy()
    bias = init.bias
    uses_bias = cfg.objective is Objective.PAIRWISE
    rng = substream(cfg.seed, "train/shuffle")
    n = len(dataset)
    epoch_losses: list[float] = []

    def current() -> LinearScorer:
        return LinearScorer(
            weights=tuple(w.tolist()), bias=bias, text_dim=init.text_dim, seed=cfg.seed
        )

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        if cfg.full_batch:
            grad_w = np.zeros_like(w)
            grad_b = 0.0
            for i in order:
                m = float(w @ features[i]) + (bias if uses_bias else 0.0)
                g = loss_gradient(
                    m, targets[i], cfg.epsilon, cfg.objective, clamp=cfg.clamp_probabilities
                )
                grad_w += g * features[i]
                grad_b += g
            w -= cfg.learning_rate * grad_w / n
            if uses_bias:
                bias -= cfg.learning_rate * grad_b / n
        else:
            for i in order:
                m = float(w @ features[i]) + (bias if uses_bias else 0.0)
                g = loss_gradient(
                    m, targets[i], cfg.epsilon, cfg.objective, clamp=cfg.clamp_probabilities
                )
                w -= cfg.learning_rate * g * features[i]
                if uses_bias:
                    bias -= cfg.learning_rate * g

        if not (np.all(np.isfinite(w)) and math.isfinite(bias)):
            raise TrainingDiverged(epoch)
        epoch_loss = dataset_loss(dataset, current(), cfg)
        if not math.isfinite(epoch_loss):
            raise TrainingDiverged(epoch)
        epoch_losses.append(epoch_loss)

    return TrainingResult(scorer=current(), epoch_losses=tuple(epoch_losses))


def save_scorer(
    scorer: LinearScorer,
    target: str | Path | IO[str],
    objective: Objective = Objective.PAIRWISE,
) -> None:
    """Serialize a trained judge as JSON with round-trip float precision."""
    doc = {
        "d_img": scorer.d_img,
        "text_dim": scorer.text_dim,
        "bias": scorer.bias,
        "weights": list(scorer.weights),
        "seed": scorer.seed,
        "objective": objective.value,
    }
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as handle:
            json.dump(doc, handle)
            handle.write("\n")
    else:
        json.dump(doc, target)
        target.write("\n")


def load_scorer(source: str | Path | IO[str]) -> tuple[LinearScorer, Objective]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    else:
        doc = json.load(source)
    scorer = LinearScorer(
        weights=tuple(doc["weights"]),
        bias=float(doc["bias"]),
        text_dim=int(doc["text_dim"]),
        seed=int(doc.get("seed", 0)),
    )
    if scorer.d_img != int(doc["d_img"]):
        raise ValueError(
            f"stored d_img {doc['d_img']} does not match weight length "
            f"{len(scorer.weights)} and text_dim {scorer.text_dim}"
        )
    return scorer, Objective(doc.get("objective", "pairwise"))
