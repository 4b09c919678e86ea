"""Core domain types shared by every other module.

A dataset record is a quadruple: a prompt, a pair of generated images, an
ordered set of fine-grained comparison criteria, and three-way preference
labels (per criterion plus one overall). Everything here is an immutable
value object; construction validates all invariants, so downstream code can
trust any instance it receives.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

PROMPT_COMPONENTS = frozenset(
    {
        "core_subjects",
        "visual_appearance",
        "scene_environment",
        "motion_spatial",
        "artistic_format",
        "rendering_specs",
    }
)

CRITERION_THEMES = frozenset(
    {
        "semantic_alignment",
        "attribute_fidelity",
        "composition_spatial",
        "lighting_color",
        "structure_anatomy",
        "style_aesthetics",
    }
)

MAX_CRITERIA_PER_SAMPLE = 5

OVERALL_CRITERION_ID = "overall"


class PreferenceLabel(enum.Enum):
    """Three-way outcome of one pairwise comparison."""

    A_WINS = "A"
    B_WINS = "B"
    TIE = "T"

    def swapped(self) -> "PreferenceLabel":
        """The same outcome with the two images exchanged."""
        if self is PreferenceLabel.A_WINS:
            return PreferenceLabel.B_WINS
        if self is PreferenceLabel.B_WINS:
            return PreferenceLabel.A_WINS
        return PreferenceLabel.TIE


class Difficulty(enum.Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


class ConditionKind(enum.Enum):
    """Which labels a comparison is judged against."""

    SINGLE = "single"
    MULTI = "multi"
    OVERALL = "overall"


def difficulty_of(component_count: int) -> Difficulty:
    """Difficulty implied by how many prompt components a prompt combines.

    1-2 components -> EASY, 3-4 -> MEDIUM, 5-6 -> HARD.
    """
    if not isinstance(component_count, int) or isinstance(component_count, bool):
        raise ValueError(f"component count must be an integer, got {component_count!r}")
    if not 1 <= component_count <= 6:
        raise ValueError(f"component count must be in [1, 6], got {component_count}")
    if component_count <= 2:
        return Difficulty.EASY
    if component_count <= 4:
        return Difficulty.MEDIUM
    return Difficulty.HARD


def label_to_target(label: PreferenceLabel) -> float:
    """Regression target for a preference label: A=1, B=0, tie=0.5."""
    return {
        PreferenceLabel.A_WINS: 1.0,
        PreferenceLabel.B_WINS: 0.0,
        PreferenceLabel.TIE: 0.5,
    }[label]


@dataclass(frozen=True)
class Prompt:
    id: str
    text: str
    components: frozenset[str]
    topic: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("prompt id must be non-empty")
        if not self.text:
            raise ValueError("prompt text must be non-empty")
        object.__setattr__(self, "components", frozenset(self.components))
        if not 1 <= len(self.components) <= 6:
            raise ValueError("prompt must use between 1 and 6 components")
        unknown = self.components - PROMPT_COMPONENTS
        if unknown:
            raise ValueError(f"unknown prompt components: {sorted(unknown)}")

    @property
    def difficulty(self) -> Difficulty:
        return difficulty_of(len(self.components))


@dataclass(frozen=True)
class ImageRef:
    """Reference to one generated image.

    Pixel content is out of scope; `features` is a fixed-length numeric
    vector standing in for it, and `uri` is an opaque pointer for remote
    judges. Feature length must be one corpus-wide constant.
    """

    id: str
    source_model: str
    features: tuple[float, ...]
    uri: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("image id must be non-empty")
        object.__setattr__(self, "features", tuple(float(x) for x in self.features))
        if len(self.features) == 0:
            raise ValueError("image features must be non-empty")
        if not all(math.isfinite(x) for x in self.features):
            raise ValueError(f"image {self.id} has non-finite feature entries")


@dataclass(frozen=True)
class Criterion:
    id: str
    text: str
    theme: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("criterion id must be non-empty")
        if not self.text:
            raise ValueError("criterion text must be non-empty")
        if self.theme is not None and self.theme not in CRITERION_THEMES:
            raise ValueError(f"unknown criterion theme: {self.theme!r}")

    @property
    def is_overall(self) -> bool:
        return self.id == OVERALL_CRITERION_ID


#: Reserved sentinel for whole-image comparison.
OVERALL = Criterion(id=OVERALL_CRITERION_ID, text="overall preference")


@dataclass(frozen=True)
class Condition:
    """Judging condition: one criterion, several criteria, or overall.

    Carries resolved `Criterion` objects (not bare ids) so that scorer
    dispatch never needs another lookup.
    """

    kind: ConditionKind
    criteria: tuple[Criterion, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "criteria", tuple(self.criteria))
        if self.kind is ConditionKind.SINGLE and len(self.criteria) != 1:
            raise ValueError("SINGLE condition takes exactly one criterion")
        if self.kind is ConditionKind.MULTI:
            ids = [c.id for c in self.criteria]
            if len(ids) < 2:
                raise ValueError("MULTI condition takes at least two criteria")
            if len(set(ids)) != len(ids):
                raise ValueError("MULTI condition criteria must be distinct")
        if self.kind is ConditionKind.OVERALL and self.criteria:
            raise ValueError("OVERALL condition carries no criteria")

    @staticmethod
    def single(criterion: Criterion) -> "Condition":
        return Condition(ConditionKind.SINGLE, (criterion,))

    @staticmethod
    def multi(criteria: tuple[Criterion, ...] | list[Criterion]) -> "Condition":
        return Condition(ConditionKind.MULTI, tuple(criteria))

    @staticmethod
    def overall() -> "Condition":
        return Condition(ConditionKind.OVERALL)

    def criterion_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.criteria)

    def text(self) -> str:
        """Human-readable condition text used for scorer conditioning."""
        if self.kind is ConditionKind.OVERALL:
            return OVERALL.text
        return "; ".join(c.text for c in self.criteria)


@dataclass(frozen=True)
class Sample:
    """One dataset record: prompt, image pair, criteria, and labels."""

    id: str
    prompt: Prompt
    image_a: ImageRef
    image_b: ImageRef
    criteria: tuple[Criterion, ...]
    criterion_labels: dict[str, PreferenceLabel]
    overall_label: PreferenceLabel

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("sample id must be non-empty")
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "criterion_labels", dict(self.criterion_labels))
        if not 1 <= len(self.criteria) <= MAX_CRITERIA_PER_SAMPLE:
            raise ValueError(
                f"sample {self.id}: criteria count must be 1..{MAX_CRITERIA_PER_SAMPLE}"
            )
        ids = [c.id for c in self.criteria]
        if len(set(ids)) != len(ids):
            raise ValueError(f"sample {self.id}: duplicate criterion ids")
        if OVERALL_CRITERION_ID in ids:
            raise ValueError(
                f"sample {self.id}: criterion id {OVERALL_CRITERION_ID!r} is reserved"
            )
        if self.image_a.id == self.image_b.id:
            raise ValueError(f"sample {self.id}: image_a and image_b must differ")
        if len(self.image_a.features) != len(self.image_b.features):
            raise ValueError(f"sample {self.id}: image feature lengths differ")
        stray = set(self.criterion_labels) - set(ids)
        if stray:
            raise ValueError(
                f"sample {self.id}: labels for unknown criteria {sorted(stray)}"
            )

    @property
    def difficulty(self) -> Difficulty:
        """Derived from the prompt's component count; never stored independently."""
        return self.prompt.difficulty

    def criterion_by_id(self, criterion_id: str) -> Criterion:
        for c in self.criteria:
            if c.id == criterion_id:
                return c
        raise KeyError(f"sample {self.id} has no criterion {criterion_id!r}")

    def label_for(self, condition: Condition) -> PreferenceLabel | None:
        """Gold label under `condition`, or None for an unlabeled criterion.

        MULTI conditions are resolved by the majority rule owned by the
        curation module; import is deferred to avoid a cycle.
        """
        from critpick import curation

        if condition.kind is ConditionKind.OVERALL:
            return self.overall_label
        labels = []
        for c in condition.criteria:
            self.criterion_by_id(c.id)  # raises KeyError if absent
            got = self.criterion_labels.get(c.id)
            if got is None:
                return None
            labels.append(got)
        if condition.kind is ConditionKind.SINGLE:
            return labels[0]
        return curation.multi_gold(labels)


@dataclass(frozen=True)
class EvalInstance:
    """One benchmark judgment: a sample, a condition, and the gold answer."""

    sample_id: str
    condition: Condition
    gold: PreferenceLabel

    def __post_init__(self) -> None:
        if not self.sample_id:
            raise ValueError("instance sample_id must be non-empty")


def instance_for(sample: Sample, condition: Condition) -> EvalInstance:
    """Build an EvalInstance, checking the condition against the sample."""
    gold = sample.label_for(condition)
    if gold is None:
        missing = [
            c.id for c in condition.criteria if c.id not in sample.criterion_labels
        ]
        raise ValueError(f"sample {sample.id}: criteria {missing} are unlabeled")
    return EvalInstance(sample_id=sample.id, condition=condition, gold=gold)
