"""Benchmark evaluation: instance derivation and scorer runs.

A labeled sample expands into judgment instances under three settings:
one per labeled criterion (single), seeded subsets of criteria with
majority gold (multi), and one overall judgment. A run scores every
instance, converts outputs to three-way predictions, and reduces them
into a confusion matrix per setting. Scorer failures are recorded
per-instance and never abort a run.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

from critpick.core import Condition, ConditionKind, EvalInstance, Sample
from critpick.curation import derive_multi_instances
from critpick.metrics import ConfusionMatrix3, EvalReport, report_from_confusion
from critpick.scorers import ScoreRequest, ScorerError, ScorerOutput, to_prediction


class Scorer(Protocol):
    def score(self, req: ScoreRequest) -> ScorerOutput: ...


def derive_instances(
    samples: Sequence[Sample],
    setting: ConditionKind,
    max_subset: int = 5,
    seed: int = 0,
) -> list[EvalInstance]:
    """All judgment instances of one setting over a benchmark."""
    instances: list[EvalInstance] = []
    for sample in samples:
        if setting is ConditionKind.OVERALL:
            instances.append(
                EvalInstance(
                    sample_id=sample.id,
                    condition=Condition.overall(),
                    gold=sample.overall_label,
                )
            )
        elif setting is ConditionKind.SINGLE:
            for criterion in sample.criteria:
                label = sample.criterion_labels.get(criterion.id)
                if label is None:
                    continue
                instances.append(
                    EvalInstance(
                        sample_id=sample.id,
                        condition=Condition.single(criterion),
                        gold=label,
                    )
                )
        else:
            instances.extend(derive_multi_instances(sample, max_subset, seed))
    return instances


def build_request(sample: Sample, condition: Condition) -> ScoreRequest:
    return ScoreRequest(
        prompt=sample.prompt,
        image_a=sample.image_a,
        image_b=sample.image_b,
        condition=condition,
    )


@dataclass(frozen=True)
class InstanceError:
    sample_id: str
    condition: Condition
    message: str


@dataclass(frozen=True)
class EvaluationRun:
    report: EvalReport
    errors: tuple[InstanceError, ...]


def evaluate_instances(
    samples: Sequence[Sample],
    instances: Sequence[EvalInstance],
    scorer: Scorer,
    setting: ConditionKind,
    tie_band: float = 0.0,
    jobs: int = 1,
) -> EvaluationRun:
    """Score every instance and reduce into one report.

    With `jobs > 1` instances are scored concurrently; the confusion matrix
    is accumulated in instance order, so results are independent of `jobs`.
    """
    by_id = {s.id: s for s in samples}

    def judge(instance: EvalInstance):
        sample = by_id.get(instance.sample_id)
        if sample is None:
            return InstanceError(
                instance.sample_id, instance.condition, "unknown sample id"
            )
        try:
            out = scorer.score(build_request(sample, instance.condition))
            return to_prediction(out, tie_band)
        except ScorerError as exc:
            return InstanceError(instance.sample_id, instance.condition, str(exc))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(judge, instances))
    else:
        outcomes = [judge(instance) for instance in instances]

    cm = ConfusionMatrix3()
    errors: list[InstanceError] = []
    for instance, outcome in zip(instances, outcomes):
        if isinstance(outcome, InstanceError):
            errors.append(outcome)
        else:
            cm.add(instance.gold, outcome)
    return EvaluationRun(
        report=report_from_confusion(cm, setting, n_errors=len(errors)),
        errors=tuple(errors),
    )


def evaluate(
    samples: Sequence[Sample],
    scorer: Scorer,
    setting: ConditionKind,
    tie_band: float = 0.0,
    max_subset: int = 5,
    seed: int = 0,
    jobs: int = 1,
) -> EvaluationRun:
    instances = derive_instances(samples, setting, max_subset=max_subset, seed=seed)
    return evaluate_instances(samples, instances, scorer, setting, tie_band, jobs)
