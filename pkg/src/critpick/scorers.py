"""Pluggable judges for criterion-conditioned image-pair comparison.

A scorer receives a `ScoreRequest` (prompt, image pair, judging condition,
comparison instruction) and returns either one direct comparison score or
two per-image scores. `to_prediction` turns either kind into a three-way
preference label.

The feature map feeding `LinearScorer` has three blocks:

* antisymmetric: ``image_a.features - image_b.features`` (directional
  preference; negates when the pair is swapped),
* symmetric: ``image_a.features + image_b.features`` (pair-level context;
  unchanged by a swap),
* text: a deterministic hashed bag-of-words embedding of the prompt text
  joined with the condition's criterion texts.

The text embedding uses 64-bit FNV-1a (offset basis
``0xcbf29ce484222325``, prime ``0x100000001b3``): a token lands in bucket
``h mod dim`` with sign taken from the hash's most significant bit, and the
accumulated vector is L2-normalized. No learned components, so embeddings
are bit-stable across runs and platforms.
"""

from __future__ import annotations

import enum
import math
import re
import threading
from dataclasses import dataclass

import numpy as np

from critpick.core import Condition, ImageRef, PreferenceLabel, Prompt, Sample
from critpick.seeding import fnv1a64

#: Instruction template mirroring the structured comparison prompt used for
#: judge models; `{condition}` receives the criterion text(s) or "overall".
STRUCTURED_INSTRUCTION = (
    "Compare image A and image B under the specified criterion: {condition}. "
    "Answer A if image A is better, B if image B is better."
)

#: Legacy conditioning for judges that only accept a text prompt: the
#: criteria ride along appended to the prompt itself.
LEGACY_TEMPLATE = "Prompt: {prompt}. Critical Considerations: {condition}."

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class ScoreRequest:
    prompt: Prompt
    image_a: ImageRef
    image_b: ImageRef
    condition: Condition
    instruction: str = STRUCTURED_INSTRUCTION

    def condition_text(self) -> str:
        return self.condition.text()

    def swapped(self) -> "ScoreRequest":
        """The same comparison with the images exchanged."""
        return ScoreRequest(
            prompt=self.prompt,
            image_a=self.image_b,
            image_b=self.image_a,
            condition=self.condition,
            instruction=self.instruction,
        )


class OutputKind(enum.Enum):
    POINTWISE = "pointwise"
    PAIRWISE = "pairwise"


@dataclass(frozen=True)
class ScorerOutput:
    """Either two per-image scores or one direct comparison score."""

    kind: OutputKind
    r_a: float | None = None
    r_b: float | None = None
    s: float | None = None

    def __post_init__(self) -> None:
        if self.kind is OutputKind.POINTWISE:
            if self.r_a is None or self.r_b is None or self.s is not None:
                raise ValueError("pointwise output needs r_a and r_b only")
            values = (self.r_a, self.r_b)
        else:
            if self.s is None or self.r_a is not None or self.r_b is not None:
                raise ValueError("pairwise output needs s only")
            values = (self.s,)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("scores must be finite")

    @staticmethod
    def pointwise(r_a: float, r_b: float) -> "ScorerOutput":
        return ScorerOutput(OutputKind.POINTWISE, r_a=float(r_a), r_b=float(r_b))

    @staticmethod
    def pairwise(s: float) -> "ScorerOutput":
        return ScorerOutput(OutputKind.PAIRWISE, s=float(s))

    def margin(self) -> float:
        """Signed evidence for A over B: r_a - r_b, or s directly."""
        if self.kind is OutputKind.POINTWISE:
            return self.r_a - self.r_b
        return self.s


class ScorerError(RuntimeError):
    """A scorer failed on one request; callers degrade per-instance."""


def hash_embed(text: str, dim: int) -> np.ndarray:
    """Deterministic signed bag-of-words embedding of `text` into `dim` buckets.

    Lowercases, splits on non-alphanumeric runs, adds +/-1 per token
    occurrence into FNV-1a-chosen buckets, then L2-normalizes (zero vector
    stays zero).
    """
    if dim <= 0:
        raise ValueError(f"embedding dim must be positive, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    for token in _TOKEN_SPLIT.split(text.lower()):
        if not token:
            continue
        h = fnv1a64(token)
        sign = -1.0 if (h >> 63) & 1 else 1.0
        vec[h % dim] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def assemble_features(req: ScoreRequest, text_dim: int) -> np.ndarray:
    """Feature vector for a pair comparison: [a - b, a + b, text]."""
    a = np.asarray(req.image_a.features, dtype=np.float64)
    b = np.asarray(req.image_b.features, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(
            f"image feature lengths differ: {a.shape[0]} vs {b.shape[0]}"
        )
    text_block = (
        hash_embed(req.prompt.text + " | " + req.condition_text(), text_dim)
        if text_dim > 0
        else np.zeros(0)
    )
    return np.concatenate([a - b, a + b, text_block])


def single_image_features(
    image: ImageRef, prompt: Prompt, condition: Condition, text_dim: int
) -> np.ndarray:
    """Per-image assembly for the pointwise pathway.

    The antisymmetric block carries the image's own features, the symmetric
    block is zeroed, and the text block matches the pair assembly; the score
    difference r_a - r_b then depends only on the image difference.
    """
    feats = np.asarray(image.features, dtype=np.float64)
    text_block = (
        hash_embed(prompt.text + " | " + condition.text(), text_dim)
        if text_dim > 0
        else np.zeros(0)
    )
    return np.concatenate([feats, np.zeros_like(feats), text_block])


@dataclass(frozen=True)
class LinearScorer:
    """Linear judging head over the assembled feature map.

    Weight length must be ``2 * d_img + text_dim``. Deterministic: equal
    requests give bit-identical scores.
    """

    weights: tuple[float, ...]
    bias: float
    text_dim: int
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.text_dim < 0:
            raise ValueError("text_dim must be >= 0")
        if len(self.weights) <= self.text_dim or (len(self.weights) - self.text_dim) % 2:
            raise ValueError(
                "weight length must be 2 * d_img + text_dim for some d_img > 0"
            )
        if not all(math.isfinite(w) for w in self.weights):
            raise ValueError("weights must be finite")
        if not math.isfinite(self.bias):
            raise ValueError("bias must be finite")

    @property
    def d_img(self) -> int:
        return (len(self.weights) - self.text_dim) // 2

    @staticmethod
    def zeros(d_img: int, text_dim: int, seed: int = 0) -> "LinearScorer":
        return LinearScorer(
            weights=(0.0,) * (2 * d_img + text_dim), bias=0.0, text_dim=text_dim, seed=seed
        )

    def weight_vector(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    def raw_score(self, features: np.ndarray) -> float:
        if features.shape[0] != len(self.weights):
            raise ValueError(
                f"feature length {features.shape[0]} does not match "
                f"weight length {len(self.weights)}"
            )
        return float(self.weight_vector() @ features + self.bias)

    def score(self, req: ScoreRequest) -> ScorerOutput:
        """Direct pairwise comparison score s; sigma(s) is P(A preferred)."""
        return ScorerOutput.pairwise(self.raw_score(assemble_features(req, self.text_dim)))

    def score_pointwise(self, req: ScoreRequest) -> ScorerOutput:
        """Two per-image scores via the single-image pathway."""
        r_a = self.raw_score(
            single_image_features(req.image_a, req.prompt, req.condition, self.text_dim)
        )
        r_b = self.raw_score(
            single_image_features(req.image_b, req.prompt, req.condition, self.text_dim)
        )
        return ScorerOutput.pointwise(r_a, r_b)


def score_pairwise(scorer: LinearScorer, req: ScoreRequest) -> ScorerOutput:
    return scorer.score(req)


def sigmoid(x: float) -> float:
    """Overflow-safe logistic function."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def preference_probability(out: ScorerOutput) -> float:
    """P(A preferred over B) implied by a scorer output."""
    return sigmoid(out.margin())


class OracleScorer:
    """Ground-truth judge backed by a labeled corpus; used for calibration.

    Emits s = +1 / -1 / 0 for A-wins / B-wins / tie gold labels. Requests
    must reference a known sample (matched by prompt id + unordered image
    pair); swapped pairs get the sign-flipped score.
    """

    def __init__(self, samples: list[Sample] | tuple[Sample, ...] | dict[str, Sample]):
        if isinstance(samples, dict):
            samples = list(samples.values())
        self._by_pair: dict[tuple[str, frozenset[str]], Sample] = {}
        for sample in samples:
            key = (sample.prompt.id, frozenset({sample.image_a.id, sample.image_b.id}))
            self._by_pair[key] = sample

    def _lookup(self, req: ScoreRequest) -> tuple[Sample, bool]:
        key = (req.prompt.id, frozenset({req.image_a.id, req.image_b.id}))
        sample = self._by_pair.get(key)
        if sample is None:
            raise ScorerError(
                f"no gold labels for prompt {req.prompt.id!r} and pair "
                f"({req.image_a.id}, {req.image_b.id})"
            )
        swapped = req.image_a.id != sample.image_a.id
        return sample, swapped

    def score(self, req: ScoreRequest) -> ScorerOutput:
        sample, swapped = self._lookup(req)
        try:
            label = sample.label_for(req.condition)
        except KeyError as exc:
            raise ScorerError(str(exc)) from exc
        if label is None:
            raise ScorerError(
                f"sample {sample.id}: condition references unlabeled criteria"
            )
        if swapped:
            label = label.swapped()
        return ScorerOutput.pairwise(oracle_margin(label))


def oracle_margin(label: PreferenceLabel) -> float:
    return {
        PreferenceLabel.A_WINS: 1.0,
        PreferenceLabel.B_WINS: -1.0,
        PreferenceLabel.TIE: 0.0,
    }[label]


def oracle_score(sample: Sample, condition: Condition) -> ScorerOutput:
    """Gold-label score for one sample under a condition."""
    label = sample.label_for(condition)
    if label is None:
        raise ValueError(f"sample {sample.id}: condition references unlabeled criteria")
    return ScorerOutput.pairwise(oracle_margin(label))


def to_prediction(out: ScorerOutput, tie_band: float = 0.0) -> PreferenceLabel:
    """Three-way label from a scorer output.

    A wins if the margin exceeds `tie_band`, B wins below `-tie_band`,
    otherwise tie. The default band of 0 is a strict argmax that calls
    exactly equal scores a tie; benchmarks with tie gold labels need a
    positive band to ever predict them.
    """
    if tie_band < 0:
        raise ValueError("tie_band must be >= 0")
    margin = out.margin()
    if margin > tie_band:
        return PreferenceLabel.A_WINS
    if margin < -tie_band:
        return PreferenceLabel.B_WINS
    return PreferenceLabel.TIE


class MemoScorer:
    """Optional per-run memo around any scorer, keyed by request content.

    Thread-safe; never evicts (per-run lifetime is the contract).
    """

    def __init__(self, inner):
        self._inner = inner
        self._cache: dict[tuple, ScorerOutput] = {}
        self._lock = threading.Lock()

    @staticmethod
    def _key(req: ScoreRequest) -> tuple:
        return (
            req.prompt.id,
            req.prompt.text,
            req.image_a.id,
            req.image_a.features,
            req.image_b.id,
            req.image_b.features,
            req.condition.kind.value,
            req.condition.criterion_ids(),
            req.condition_text(),
            req.instruction,
        )

    def score(self, req: ScoreRequest) -> ScorerOutput:
        key = self._key(req)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = self._inner.score(req)
        with self._lock:
            self._cache[key] = out
        return out
