"""Benchmark curation: reversal detection, multi-criteria instances,
stratified selection, and corpus statistics.

A benchmark subset balances four dimensions: difficulty coverage (histogram
matching a target mix), criterion-dependent preference reversals, ambiguous
cases (agreement barely above the retention threshold), and annotation
reliability (every retained label strictly above the threshold). Selection
is greedy stratified sampling with seeded shuffling: reproducible under a
fixed seed, with ties broken by sample id order.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from critpick.core import (
    Condition,
    Difficulty,
    EvalInstance,
    PreferenceLabel,
    Sample,
)
from critpick.seeding import substream

#: Width of the agreement band just above the retention threshold that
#: classifies a sample as an ambiguous (close) case.
AMBIGUOUS_BAND = 0.1

#: Tolerance on achieved difficulty / reversal / ambiguous shares.
SHARE_TOLERANCE = 0.05

_DIFFICULTY_ORDER = (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD)


class CurationError(RuntimeError):
    """The candidate pool cannot satisfy a hard selection constraint."""

    def __init__(self, constraint: str, message: str):
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}")


@dataclass(frozen=True)
class CurationConfig:
    target_pairs: int
    difficulty_mix: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    reversal_share: float = 0.354
    ambiguous_share: float = 0.047
    retention_threshold: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.target_pairs <= 0:
            raise ValueError("target_pairs must be positive")
        if any(m < 0 for m in self.difficulty_mix):
            raise ValueError("difficulty mix entries must be nonnegative")
        if abs(sum(self.difficulty_mix) - 1.0) > 1e-9:
            raise ValueError("difficulty mix must sum to 1")
        for name in ("reversal_share", "ambiguous_share"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 0 < self.retention_threshold < 1:
            raise ValueError("retention_threshold must be in (0, 1)")


@dataclass(frozen=True)
class PoolEntry:
    """A retained sample plus its per-label winning-vote fractions.

    `agreement` maps a label context ("overall" or a criterion id) to the
    fraction of annotators behind the retained label.
    """

    sample: Sample
    agreement: Mapping[str, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "agreement", dict(self.agreement))
        for context, fraction in self.agreement.items():
            if not 0 <= fraction <= 1:
                raise ValueError(f"agreement for {context!r} must be in [0, 1]")

    def min_agreement(self) -> float:
        if not self.agreement:
            raise ValueError(f"sample {self.sample.id} carries no agreement metadata")
        return min(self.agreement.values())


@dataclass(frozen=True)
class CorpusStats:
    avg_prompt_length: float
    difficulty_ratio: tuple[float, float, float]
    topic_count: int
    source_model_count: int
    avg_criteria_per_sample: float
    max_criteria: int
    multi_criterion_share: float
    reversal_share: float
    theme_count: int

    def to_dict(self) -> dict:
        return {
            "avg_prompt_length": self.avg_prompt_length,
            "difficulty_ratio": list(self.difficulty_ratio),
            "topic_count": self.topic_count,
            "source_model_count": self.source_model_count,
            "avg_criteria_per_sample": self.avg_criteria_per_sample,
            "max_criteria": self.max_criteria,
            "multi_criterion_share": self.multi_criterion_share,
            "reversal_share": self.reversal_share,
            "theme_count": self.theme_count,
        }


def detect_reversal(sample: Sample) -> bool:
    """True iff some criterion prefers A while another prefers B."""
    labels = set(sample.criterion_labels.values())
    return PreferenceLabel.A_WINS in labels and PreferenceLabel.B_WINS in labels


def is_ambiguous(entry: PoolEntry, threshold: float) -> bool:
    """Close case: weakest agreement within (threshold, threshold + band]."""
    lowest = entry.min_agreement()
    return threshold < lowest <= threshold + AMBIGUOUS_BAND


def multi_gold(labels: Sequence[PreferenceLabel]) -> PreferenceLabel:
    """Combined gold over several criterion labels.

    Majority vote between decisive labels; equal A and B counts give a tie,
    as does TIE being the strict modal label.
    """
    if not labels:
        raise ValueError("multi_gold needs at least one label")
    counts = Counter(labels)
    a = counts[PreferenceLabel.A_WINS]
    b = counts[PreferenceLabel.B_WINS]
    t = counts[PreferenceLabel.TIE]
    if t > a and t > b:
        return PreferenceLabel.TIE
    if a == b:
        return PreferenceLabel.TIE
    return PreferenceLabel.A_WINS if a > b else PreferenceLabel.B_WINS


def derive_multi_instances(
    sample: Sample, max_subset: int = 5, seed: int = 0
) -> list[EvalInstance]:
    """Multi-criteria judgments from one sample's labeled criteria.

    Enumerates every criterion subset of size 2..min(max_subset, M) in
    canonical order, assigns each the `multi_gold` of its labels, and
    shuffles the result with a per-sample substream so downstream sampling
    is unbiased yet reproducible.
    """
    if max_subset < 2:
        raise ValueError("max_subset must be >= 2")
    labeled = [c for c in sample.criteria if c.id in sample.criterion_labels]
    if len(labeled) < 2:
        return []
    instances = []
    for size in range(2, min(max_subset, len(labeled)) + 1):
        for subset in itertools.combinations(labeled, size):
            gold = multi_gold([sample.criterion_labels[c.id] for c in subset])
            instances.append(
                EvalInstance(
                    sample_id=sample.id,
                    condition=Condition.multi(subset),
                    gold=gold,
                )
            )
    rng = substream(seed, f"multi/{sample.id}")
    order = rng.permutation(len(instances))
    return [instances[i] for i in order]


def _apportion(total: int, shares: Sequence[float]) -> list[int]:
    """Integer quotas summing to `total`, by largest remainder."""
    raw = [total * s for s in shares]
    quotas = [int(x) for x in raw]
    remainders = sorted(
        range(len(shares)), key=lambda i: (raw[i] - quotas[i], -i), reverse=True
    )
    for i in range(total - sum(quotas)):
        quotas[remainders[i % len(shares)]] += 1
    return quotas


def curate(pool: Sequence[PoolEntry], cfg: CurationConfig) -> list[Sample]:
    """Select a benchmark subset honoring the configured targets.

    Raises `CurationError` naming the first constraint the pool cannot
    satisfy. Deterministic: candidates are ordered by sample id before
    seeded shuffling, so equal (pool, cfg) inputs give equal selections.
    """
    eligible = [
        e for e in pool if e.min_agreement() > cfg.retention_threshold
    ]
    if len(eligible) < cfg.target_pairs:
        raise CurationError(
            "target_pairs",
            f"only {len(eligible)} samples exceed the retention threshold "
            f"{cfg.retention_threshold}; {cfg.target_pairs} requested",
        )

    by_difficulty: dict[Difficulty, list[PoolEntry]] = {d: [] for d in _DIFFICULTY_ORDER}
    for entry in sorted(eligible, key=lambda e: e.sample.id):
        by_difficulty[entry.sample.difficulty].append(entry)
    for difficulty in _DIFFICULTY_ORDER:
        rng = substream(cfg.seed, f"curate/{difficulty.value}")
        entries = by_difficulty[difficulty]
        order = rng.permutation(len(entries))
        by_difficulty[difficulty] = [entries[i] for i in order]

    quotas = dict(zip(_DIFFICULTY_ORDER, _apportion(cfg.target_pairs, cfg.difficulty_mix)))
    # Redistribute quota a difficulty cannot supply before checking tolerances.
    shortfall = 0
    for difficulty in _DIFFICULTY_ORDER:
        available = len(by_difficulty[difficulty])
        if available < quotas[difficulty]:
            shortfall += quotas[difficulty] - available
            quotas[difficulty] = available
    if shortfall:
        for difficulty in _DIFFICULTY_ORDER:
            spare = len(by_difficulty[difficulty]) - quotas[difficulty]
            take = min(spare, shortfall)
            quotas[difficulty] += take
            shortfall -= take
            if shortfall == 0:
                break

    reversal_target = round(cfg.target_pairs * cfg.reversal_share)
    ambiguous_target = round(cfg.target_pairs * cfg.ambiguous_share)

    selected: list[PoolEntry] = []
    chosen_ids: set[str] = set()

    def take(entry: PoolEntry) -> None:
        selected.append(entry)
        chosen_ids.add(entry.sample.id)

    def pass_over(predicate, deficit_of) -> None:
        for difficulty in _DIFFICULTY_ORDER:
            for entry in by_difficulty[difficulty]:
                if deficit_of() <= 0:
                    return
                if entry.sample.id in chosen_ids or quotas[difficulty] <= 0:
                    continue
                if predicate(entry):
                    quotas[difficulty] -= 1
                    take(entry)

    def reversal_count() -> int:
        return sum(detect_reversal(e.sample) for e in selected)

    def ambiguous_count() -> int:
        return sum(is_ambiguous(e, cfg.retention_threshold) for e in selected)

    pass_over(
        lambda e: detect_reversal(e.sample),
        lambda: reversal_target - reversal_count(),
    )
    pass_over(
        lambda e: is_ambiguous(e, cfg.retention_threshold),
        lambda: ambiguous_target - ambiguous_count(),
    )
    # Fill remaining quota, preferring plain samples to avoid overshooting
    # the reversal / ambiguous targets.
    for flagged_ok in (False, True):
        for difficulty in _DIFFICULTY_ORDER:
            for entry in by_difficulty[difficulty]:
                if quotas[difficulty] <= 0:
                    break
                if entry.sample.id in chosen_ids:
                    continue
                flagged = detect_reversal(entry.sample) or is_ambiguous(
                    entry, cfg.retention_threshold
                )
                if flagged and not flagged_ok:
                    continue
                quotas[difficulty] -= 1
                take(entry)

    n = len(selected)
    achieved_mix = [
        sum(e.sample.difficulty is d for e in selected) / n for d in _DIFFICULTY_ORDER
    ]
    for share, target, d in zip(achieved_mix, cfg.difficulty_mix, _DIFFICULTY_ORDER):
        if abs(share - target) > SHARE_TOLERANCE + 1e-12:
            raise CurationError(
                "difficulty_mix",
                f"achievable {d.value} share {share:.3f} deviates from "
                f"target {target:.3f} by more than {SHARE_TOLERANCE}",
            )
    for name, achieved, target in (
        ("reversal_share", reversal_count() / n, cfg.reversal_share),
        ("ambiguous_share", ambiguous_count() / n, cfg.ambiguous_share),
    ):
        if abs(achieved - target) > SHARE_TOLERANCE + 1e-12:
            raise CurationError(
                name,
                f"achievable share {achieved:.3f} deviates from target "
                f"{target:.3f} by more than {SHARE_TOLERANCE}",
            )

    selected.sort(key=lambda e: e.sample.id)
    return [e.sample for e in selected]


def corpus_stats(samples: Sequence[Sample]) -> CorpusStats:
    """Descriptive statistics over a dataset or benchmark."""
    if not samples:
        raise ValueError("corpus_stats needs at least one sample")
    n = len(samples)
    counts = Counter(s.difficulty for s in samples)
    criteria_counts = [len(s.criteria) for s in samples]
    themes = {c.theme for s in samples for c in s.criteria if c.theme is not None}
    return CorpusStats(
        avg_prompt_length=sum(len(s.prompt.text.split()) for s in samples) / n,
        difficulty_ratio=tuple(counts[d] / n for d in _DIFFICULTY_ORDER),
        topic_count=len({s.prompt.topic for s in samples if s.prompt.topic}),
        source_model_count=len(
            {s.image_a.source_model for s in samples}
            | {s.image_b.source_model for s in samples}
        ),
        avg_criteria_per_sample=sum(criteria_counts) / n,
        max_criteria=max(criteria_counts),
        multi_criterion_share=sum(c >= 2 for c in criteria_counts) / n,
        reversal_share=sum(detect_reversal(s) for s in samples) / n,
        theme_count=len(themes),
    )
