"""Annotation aggregation: criteria consensus and agreement-based retention.

Criteria formulation is an event-sourced state machine. The first annotator
proposes exactly five criteria; later annotators may add, delete, or modify
entries, or approve the current draft. Three consecutive approvals by three
distinct annotators finalize the draft; any edit resets the approval run.
Finalized tasks are frozen.

Label retention keeps a voted preference only when its modal label wins
strictly more than a threshold fraction of the votes (0.7 for dataset
construction, 0.8 for benchmark curation). A tie between modal labels is
disagreement and retains nothing; an agreed tie is retained only when TIE
itself is the winning label.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, replace
from typing import IO, Iterable, Iterator

from critpick.core import Criterion, PreferenceLabel

APPROVALS_TO_FINALIZE = 3
PROPOSAL_SIZE = 5
MAX_DRAFT_CRITERIA = 5
DATASET_RETENTION_THRESHOLD = 0.7
BENCHMARK_RETENTION_THRESHOLD = 0.8


class ProtocolError(RuntimeError):
    """An event violates the consensus protocol."""


class EventAction(enum.Enum):
    PROPOSE = "propose"
    ADD = "add"
    DELETE = "delete"
    MODIFY = "modify"
    APPROVE = "approve"


_EDIT_ACTIONS = {EventAction.PROPOSE, EventAction.ADD, EventAction.DELETE, EventAction.MODIFY}


@dataclass(frozen=True)
class ConsensusEvent:
    annotator_id: str
    action: EventAction
    criteria: tuple[Criterion, ...] = ()
    criterion_id: str | None = None

    def __post_init__(self) -> None:
        if not self.annotator_id:
            raise ValueError("annotator_id must be non-empty")
        object.__setattr__(self, "criteria", tuple(self.criteria))
        if self.action is EventAction.PROPOSE and len(self.criteria) != PROPOSAL_SIZE:
            raise ProtocolError(
                f"a proposal must contain exactly {PROPOSAL_SIZE} criteria, "
                f"got {len(self.criteria)}"
            )
        if self.action in (EventAction.ADD, EventAction.MODIFY) and len(self.criteria) != 1:
            raise ValueError(f"{self.action.value} carries exactly one criterion")
        if self.action is EventAction.DELETE and not self.criterion_id:
            raise ValueError("delete carries the criterion id to remove")


class TaskState(enum.Enum):
    FORMULATING = "formulating"
    FINALIZED = "finalized"


@dataclass(frozen=True)
class ConsensusTask:
    """Immutable snapshot of one criteria-formulation task."""

    task_id: str
    criteria_draft: tuple[Criterion, ...] = ()
    history: tuple[ConsensusEvent, ...] = ()
    consecutive_approvals: int = 0
    approval_run: tuple[str, ...] = ()
    state: TaskState = TaskState.FORMULATING

    @property
    def finalized(self) -> bool:
        return self.state is TaskState.FINALIZED

    def last_editor(self) -> str | None:
        """Annotator who authored the most recent draft edit."""
        for event in reversed(self.history):
            if event.action in _EDIT_ACTIONS:
                return event.annotator_id
        return None


def apply_event(task: ConsensusTask, event: ConsensusEvent) -> ConsensusTask:
    """Pure transition; replaying a history reproduces the state exactly."""
    if task.finalized:
        raise ProtocolError(f"task {task.task_id} is finalized; no further events")

    if event.action is EventAction.PROPOSE:
        if task.history:
            raise ProtocolError("a proposal must be the first event of a task")
        return replace(
            task,
            criteria_draft=event.criteria,
            history=task.history + (event,),
        )

    if not task.history:
        raise ProtocolError("the first event of a task must be a proposal")

    if event.action is EventAction.APPROVE:
        if event.annotator_id == task.last_editor():
            raise ProtocolError(
                f"annotator {event.annotator_id} authored the latest edit "
                "and cannot approve it"
            )
        if event.annotator_id in task.approval_run:
            raise ProtocolError(
                f"annotator {event.annotator_id} already approved this draft"
            )
        run = task.approval_run + (event.annotator_id,)
        return replace(
            task,
            history=task.history + (event,),
            consecutive_approvals=len(run),
            approval_run=run,
            state=TaskState.FINALIZED
            if len(run) >= APPROVALS_TO_FINALIZE
            else TaskState.FORMULATING,
        )

    draft = list(task.criteria_draft)
    if event.action is EventAction.ADD:
        new = event.criteria[0]
        if any(c.id == new.id for c in draft):
            raise ProtocolError(f"criterion {new.id!r} already in the draft")
        if len(draft) >= MAX_DRAFT_CRITERIA:
            raise ProtocolError(f"draft is capped at {MAX_DRAFT_CRITERIA} criteria")
        draft.append(new)
    elif event.action is EventAction.DELETE:
        idx = _index_of(draft, event.criterion_id)
        if len(draft) == 1:
            raise ProtocolError("cannot delete the last remaining criterion")
        del draft[idx]
    elif event.action is EventAction.MODIFY:
        new = event.criteria[0]
        draft[_index_of(draft, new.id)] = new

    return replace(
        task,
        criteria_draft=tuple(draft),
        history=task.history + (event,),
        consecutive_approvals=0,
        approval_run=(),
    )


def _index_of(draft: list[Criterion], criterion_id: str | None) -> int:
    for i, c in enumerate(draft):
        if c.id == criterion_id:
            return i
    raise ProtocolError(f"criterion {criterion_id!r} is not in the draft")


def replay(task_id: str, events: Iterable[ConsensusEvent]) -> ConsensusTask:
    """Fold a full event history into the resulting task state."""
    task = ConsensusTask(task_id=task_id)
    for event in events:
        task = apply_event(task, event)
    return task


@dataclass(frozen=True)
class VoteSet:
    """Votes by distinct annotators on one (sample, condition) context."""

    votes: tuple[tuple[str, PreferenceLabel], ...]
    context: tuple[str, str] = ("", "")

    def __post_init__(self) -> None:
        object.__setattr__(self, "votes", tuple(self.votes))
        ids = [annotator for annotator, _ in self.votes]
        if len(set(ids)) != len(ids):
            raise ValueError("annotator ids must be distinct within a vote set")


def retain_label(votes: VoteSet, threshold: float) -> PreferenceLabel | None:
    """Modal label if it strictly beats `threshold`, else None."""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    if not votes.votes:
        raise ValueError("cannot retain a label from an empty vote set")
    counts = Counter(label for _, label in votes.votes)
    top = counts.most_common()
    if len(top) > 1 and top[0][1] == top[1][1]:
        return None  # modal tie: no agreement
    label, count = top[0]
    if count / len(votes.votes) > threshold:
        return label
    return None


def winning_fraction(votes: VoteSet) -> float:
    """Fraction of votes on the modal label (modal ties included)."""
    if not votes.votes:
        raise ValueError("empty vote set")
    counts = Counter(label for _, label in votes.votes)
    return max(counts.values()) / len(votes.votes)


# Event-log wire format: one JSON object per line with keys
# {"task_id", "seq", "annotator_id", "action", "payload", "ts"};
# seq strictly increasing per task.


def event_to_record(
    task_id: str, seq: int, event: ConsensusEvent, ts: float = 0.0
) -> dict:
    payload: dict = {}
    if event.criteria:
        payload["criteria"] = [
            {"id": c.id, "text": c.text, "theme": c.theme} for c in event.criteria
        ]
    if event.criterion_id is not None:
        payload["criterion_id"] = event.criterion_id
    return {
        "task_id": task_id,
        "seq": seq,
        "annotator_id": event.annotator_id,
        "action": event.action.value,
        "payload": payload,
        "ts": ts,
    }


def event_from_record(record: dict) -> tuple[str, int, ConsensusEvent]:
    payload = record.get("payload") or {}
    criteria = tuple(
        Criterion(id=c["id"], text=c["text"], theme=c.get("theme"))
        for c in payload.get("criteria", [])
    )
    event = ConsensusEvent(
        annotator_id=record["annotator_id"],
        action=EventAction(record["action"]),
        criteria=criteria,
        criterion_id=payload.get("criterion_id"),
    )
    return record["task_id"], int(record["seq"]), event


def write_event_log(
    target: IO[str], records: Iterable[dict]
) -> None:
    for record in records:
        target.write(json.dumps(record, sort_keys=True) + "\n")


def read_event_log(source: IO[str]) -> Iterator[tuple[str, int, ConsensusEvent]]:
    """Parse an event log, enforcing strictly increasing seq per task."""
    last_seq: dict[str, int] = {}
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        task_id, seq, event = event_from_record(record)
        if task_id in last_seq and seq <= last_seq[task_id]:
            raise ProtocolError(
                f"line {lineno}: seq {seq} not increasing for task {task_id!r}"
            )
        last_seq[task_id] = seq
        yield task_id, seq, event


def assemble_dataset(
    events: Iterable[dict], threshold: float
) -> tuple[list, dict[str, dict[str, float]]]:
    """Fold a combined event log into a retained dataset.

    Beyond the five formulation actions, the log may carry ``create``
    events (payload ``{"sample": stub}``) registering the prompt and image
    pair of a task, and ``vote`` events (payload ``{"criterion_labels":
    {...}, "overall_label": ...}``) recording one annotator's judgment
    under the finalized criteria. Returns the retained samples plus each
    sample's winning-vote fractions keyed by context ("overall" or a
    criterion id).
    """
    from critpick.core import ImageRef, Prompt, Sample

    last_seq: dict[str, int] = {}
    stubs: dict[str, dict] = {}
    tasks: dict[str, ConsensusTask] = {}
    ballots: dict[str, dict[str, list[tuple[str, PreferenceLabel]]]] = {}
    order: list[str] = []

    for record in events:
        task_id = record["task_id"]
        seq = int(record["seq"])
        if task_id in last_seq and seq <= last_seq[task_id]:
            raise ProtocolError(f"seq {seq} not increasing for task {task_id!r}")
        last_seq[task_id] = seq
        action = record["action"]
        payload = record.get("payload") or {}
        if task_id not in stubs and action != "create":
            raise ProtocolError(
                f"task {task_id!r}: first event must be 'create', got {action!r}"
            )
        if action == "create":
            if task_id in stubs:
                raise ProtocolError(f"task {task_id!r} created twice")
            stubs[task_id] = payload["sample"]
            tasks[task_id] = ConsensusTask(task_id=task_id)
            order.append(task_id)
        elif action == "vote":
            annotator = record["annotator_id"]
            if not tasks[task_id].finalized:
                raise ProtocolError(
                    f"task {task_id!r}: votes before criteria are finalized"
                )
            votes = ballots.setdefault(task_id, {})
            for cid, value in payload.get("criterion_labels", {}).items():
                votes.setdefault(cid, []).append((annotator, PreferenceLabel(value)))
            votes.setdefault("overall", []).append(
                (annotator, PreferenceLabel(payload["overall_label"]))
            )
        else:
            _, _, event = event_from_record(record)
            tasks[task_id] = apply_event(tasks[task_id], event)

    samples = []
    agreement: dict[str, dict[str, float]] = {}
    for task_id in order:
        task = tasks[task_id]
        votes = ballots.get(task_id)
        if not task.finalized or not votes:
            continue
        retained: dict[str, PreferenceLabel] = {}
        fractions: dict[str, float] = {}
        for context, context_votes in votes.items():
            vote_set = VoteSet(votes=tuple(context_votes), context=(task_id, context))
            label = retain_label(vote_set, threshold)
            if label is not None:
                retained[context] = label
                fractions[context] = winning_fraction(vote_set)
        if "overall" not in retained:
            continue
        stub = stubs[task_id]
        draft_ids = {c.id for c in task.criteria_draft}
        sample = Sample(
            id=stub["id"],
            prompt=Prompt(
                id=stub["prompt"]["id"],
                text=stub["prompt"]["text"],
                components=frozenset(stub["prompt"]["components"]),
                topic=stub["prompt"].get("topic", ""),
            ),
            image_a=ImageRef(
                id=stub["image_a"]["id"],
                source_model=stub["image_a"].get("source_model", ""),
                features=tuple(stub["image_a"]["features"]),
                uri=stub["image_a"].get("uri"),
            ),
            image_b=ImageRef(
                id=stub["image_b"]["id"],
                source_model=stub["image_b"].get("source_model", ""),
                features=tuple(stub["image_b"]["features"]),
                uri=stub["image_b"].get("uri"),
            ),
            criteria=task.criteria_draft,
            criterion_labels={
                cid: label
                for cid, label in retained.items()
                if cid != "overall" and cid in draft_ids
            },
            overall_label=retained["overall"],
        )
        samples.append(sample)
        agreement[sample.id] = fractions
    return samples, agreement
