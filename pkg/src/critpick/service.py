"""Annotation service: task queue, event-sourced persistence, wire API.

Three task kinds flow through one queue: criteria formulation (the
consensus state machine), pairwise judgment (per-criterion labels plus an
overall label, several annotators per task), and study ranking (blind
4-way rankings with ties). State is a pure fold over an append-only JSONL
event log next to a task seed file, so a restarted service replays to the
exact same state and `export` is a deterministic function of the log.

Study candidates are displayed only as blind slots A/B/C/D; the
slot-to-selector mapping is a seeded permutation per prompt, shared by
the prompt's three settings, and stays server-side until export.

Layout under the data directory::

    <data_dir>/<run_id>/tasks.jsonl    one seed object per task
    <data_dir>/<run_id>/events.jsonl   lease and submit events, append-only
    <data_dir>/<run_id>/export/        canonical output files
"""

from __future__ import annotations

import enum
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from fastapi import FastAPI, HTTPException, Query

from critpick import aggregation
from critpick.aggregation import (
    ConsensusEvent,
    ConsensusTask,
    EventAction,
    ProtocolError,
    VoteSet,
    retain_label,
    winning_fraction,
)
from critpick.core import Criterion, ImageRef, PreferenceLabel, Prompt, Sample
from critpick.metrics import TiePolicy, bt_fit_two, rankings_to_pairwise
from critpick.records import sample_to_dict
from critpick.seeding import fnv1a64, substream

DEFAULT_LEASE_MINUTES = 30.0
STUDY_SLOTS = ("A", "B", "C", "D")
STUDY_SETTINGS = ("overall", "single", "multi")


class TaskKind(enum.Enum):
    CRITERIA_FORMULATION = "criteria_formulation"
    PAIRWISE_JUDGMENT = "pairwise_judgment"
    STUDY_RANKING = "study_ranking"


class TaskStatus(enum.Enum):
    OPEN = "open"
    IN_PROGRESS = "in_progress"
    DONE = "done"


class SchemaViolation(ValueError):
    """A submission body fails validation; `path` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ConflictError(RuntimeError):
    """Submission conflicts with task state (stale lease, duplicate, frozen)."""


@dataclass
class TaskQueueEntry:
    run_id: str
    task_id: str
    kind: TaskKind
    payload: dict
    votes_needed: int = 1
    status: TaskStatus = TaskStatus.OPEN
    assigned_to: str | None = None
    lease_expires: float = 0.0
    submitters: list[str] = field(default_factory=list)
    consensus: ConsensusTask | None = None

    def lease_live(self, now: float) -> bool:
        return self.status is TaskStatus.IN_PROGRESS and now < self.lease_expires


def _canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def idempotency_key(task_id: str, annotator_id: str, body: dict) -> str:
    return format(fnv1a64(task_id + "\x1f" + annotator_id + "\x1f" + _canonical_json(body)), "016x")


def blind_slot_assignment(run_seed: int, prompt_id: str, selectors: Sequence[str]) -> dict[str, str]:
    """Seeded slot->selector mapping, identical for a prompt's settings."""
    if len(selectors) != len(STUDY_SLOTS):
        raise ValueError(f"study needs exactly {len(STUDY_SLOTS)} selectors")
    rng = substream(run_seed, f"service/blind/{prompt_id}")
    order = rng.permutation(len(selectors))
    return {STUDY_SLOTS[i]: selectors[int(order[i])] for i in range(len(selectors))}


class ServiceStore:
    """Event-sourced state over one data directory; single logical writer."""

    def __init__(
        self,
        data_dir: str | Path,
        lease_minutes: float = DEFAULT_LEASE_MINUTES,
        retention_threshold: float = aggregation.DATASET_RETENTION_THRESHOLD,
        clock: Callable[[], float] = time.time,
    ):
        self.data_dir = Path(data_dir)
        self.lease_seconds = lease_minutes * 60.0
        self.retention_threshold = retention_threshold
        self.clock = clock
        self._lock = threading.RLock()
        self.tasks: dict[str, TaskQueueEntry] = {}
        self._task_order: list[str] = []
        self._seen_keys: set[str] = set()
        self._submissions: list[dict] = []
        self._runs: set[str] = set()
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._load()

    # -- persistence ------------------------------------------------------

    def _run_dir(self, run_id: str) -> Path:
        return self.data_dir / run_id

    def _load(self) -> None:
        for run_dir in sorted(self.data_dir.iterdir() if self.data_dir.exists() else []):
            if not run_dir.is_dir():
                continue
            tasks_file = run_dir / "tasks.jsonl"
            if not tasks_file.exists():
                continue
            run_id = run_dir.name
            self._runs.add(run_id)
            with open(tasks_file, encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if line:
                        self._register_task(run_id, json.loads(line))
            events_file = run_dir / "events.jsonl"
            if events_file.exists():
                with open(events_file, encoding="utf-8") as handle:
                    for line in handle:
                        line = line.strip()
                        if line:
                            self._fold_event(json.loads(line))

    def _append_event(self, run_id: str, event: dict) -> None:
        path = self._run_dir(run_id) / "events.jsonl"
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(_canonical_json(event) + "\n")

    # -- run / task administration ----------------------------------------

    def create_run(self, run_id: str) -> None:
        with self._lock:
            if run_id in self._runs:
                raise ValueError(f"run {run_id!r} already exists")
            (self._run_dir(run_id)).mkdir(parents=True, exist_ok=True)
            (self._run_dir(run_id) / "tasks.jsonl").touch()
            self._runs.add(run_id)

    def add_task(
        self,
        run_id: str,
        task_id: str,
        kind: TaskKind,
        payload: dict,
        votes_needed: int = 1,
    ) -> None:
        with self._lock:
            if run_id not in self._runs:
                raise KeyError(f"unknown run {run_id!r}")
            if task_id in self.tasks:
                raise ValueError(f"task {task_id!r} already exists")
            seed = {
                "task_id": task_id,
                "kind": kind.value,
                "payload": payload,
                "votes_needed": votes_needed,
            }
            with open(self._run_dir(run_id) / "tasks.jsonl", "a", encoding="utf-8") as handle:
                handle.write(_canonical_json(seed) + "\n")
            self._register_task(run_id, seed)

    def _register_task(self, run_id: str, seed: dict) -> None:
        kind = TaskKind(seed["kind"])
        entry = TaskQueueEntry(
            run_id=run_id,
            task_id=seed["task_id"],
            kind=kind,
            payload=seed["payload"],
            votes_needed=int(seed.get("votes_needed", 1)),
        )
        if kind is TaskKind.CRITERIA_FORMULATION:
            entry.consensus = ConsensusTask(task_id=entry.task_id)
        self.tasks[entry.task_id] = entry
        self._task_order.append(entry.task_id)
        self._runs.add(run_id)

    # -- queue ------------------------------------------------------------

    def next_task(self, annotator_id: str, kind: TaskKind | None = None) -> TaskQueueEntry | None:
        """Lease the first available task this annotator may work on.

        An annotator re-requesting while holding a live lease gets their
        own in-progress task back with the lease renewed, so a page reload
        resumes rather than stalls until expiry.
        """
        if not annotator_id:
            raise ValueError("annotator_id must be non-empty")
        with self._lock:
            now = self.clock()
            for task_id in self._task_order:
                entry = self.tasks[task_id]
                if kind is not None and entry.kind is not kind:
                    continue
                if entry.status is TaskStatus.DONE:
                    continue
                if entry.lease_live(now) and entry.assigned_to != annotator_id:
                    continue
                if entry.kind is TaskKind.CRITERIA_FORMULATION:
                    if entry.consensus is not None and entry.consensus.last_editor() == annotator_id:
                        continue
                elif annotator_id in entry.submitters:
                    continue
                self._fold_lease(entry, annotator_id, now)
                self._append_event(
                    entry.run_id,
                    {
                        "type": "lease",
                        "task_id": entry.task_id,
                        "annotator_id": annotator_id,
                        "ts": now,
                    },
                )
                return entry
            return None

    def _fold_lease(self, entry: TaskQueueEntry, annotator_id: str, ts: float) -> None:
        entry.status = TaskStatus.IN_PROGRESS
        entry.assigned_to = annotator_id
        entry.lease_expires = ts + self.lease_seconds

    # -- submission --------------------------------------------------------

    def submit(self, annotator_id: str, task_id: str, body: dict) -> dict:
        """Validate and record one submission; returns an acknowledgment."""
        with self._lock:
            entry = self.tasks.get(task_id)
            if entry is None:
                raise KeyError(f"unknown task {task_id!r}")
            now = self.clock()
            key = idempotency_key(task_id, annotator_id, body)
            if key in self._seen_keys:
                raise ConflictError(
                    f"duplicate submission for task {task_id!r} by {annotator_id!r}"
                )
            if entry.status is TaskStatus.DONE:
                raise ConflictError(f"task {task_id!r} is done and immutable")
            if not (entry.lease_live(now) and entry.assigned_to == annotator_id):
                raise ConflictError(
                    f"task {task_id!r} is not leased by {annotator_id!r} "
                    "(lease missing or expired)"
                )
            self._validate_body(entry, annotator_id, body)

            event = {
                "type": "submit",
                "task_id": task_id,
                "annotator_id": annotator_id,
                "body": body,
                "key": key,
                "ts": now,
            }
            self._fold_submit(entry, event)
            self._append_event(entry.run_id, event)
            return {
                "task_id": task_id,
                "status": entry.status.value,
                "idempotency_key": key,
            }

    def _fold_event(self, event: dict) -> None:
        entry = self.tasks.get(event.get("task_id", ""))
        if entry is None:
            return
        if event.get("type") == "lease":
            self._fold_lease(entry, event["annotator_id"], float(event["ts"]))
        elif event.get("type") == "submit":
            self._fold_submit(entry, event)

    def _fold_submit(self, entry: TaskQueueEntry, event: dict) -> None:
        annotator_id = event["annotator_id"]
        body = event["body"]
        self._seen_keys.add(event["key"])
        self._submissions.append(event)
        if annotator_id not in entry.submitters:
            entry.submitters.append(annotator_id)
        entry.assigned_to = None
        entry.lease_expires = 0.0
        if entry.kind is TaskKind.CRITERIA_FORMULATION:
            entry.consensus = aggregation.apply_event(
                entry.consensus, _consensus_event(annotator_id, body)
            )
            entry.status = (
                TaskStatus.DONE if entry.consensus.finalized else TaskStatus.OPEN
            )
        else:
            done = len(entry.submitters) >= entry.votes_needed
            entry.status = TaskStatus.DONE if done else TaskStatus.OPEN

    # -- validation ---------------------------------------------------------

    def _validate_body(self, entry: TaskQueueEntry, annotator_id: str, body: dict) -> None:
        if not isinstance(body, dict):
            raise SchemaViolation("body", "must be a JSON object")
        if entry.kind is TaskKind.CRITERIA_FORMULATION:
            self._validate_formulation(entry, annotator_id, body)
        elif entry.kind is TaskKind.PAIRWISE_JUDGMENT:
            self._validate_judgment(entry, body)
        else:
            self._validate_ranking(entry, body)

    def _validate_formulation(self, entry: TaskQueueEntry, annotator_id: str, body: dict) -> None:
        action = body.get("action")
        valid = {a.value for a in EventAction}
        if action not in valid:
            raise SchemaViolation("action", f"must be one of {sorted(valid)}")
        version = body.get("draft_version")
        if not isinstance(version, int):
            raise SchemaViolation("draft_version", "must be an integer")
        current = len(entry.consensus.history)
        if version != current:
            raise ConflictError(
                f"draft_version {version} is stale (current {current})"
            )
        event = _consensus_event(annotator_id, body)  # raises on bad payloads
        # Dry-run the transition so protocol violations surface before commit.
        aggregation.apply_event(entry.consensus, event)

    def _validate_judgment(self, entry: TaskQueueEntry, body: dict) -> None:
        criteria = entry.payload.get("criteria", [])
        expected = [c["id"] for c in criteria]
        labels = body.get("criterion_labels")
        if not isinstance(labels, dict):
            raise SchemaViolation("criterion_labels", "must be an object")
        for cid in expected:
            if cid not in labels:
                raise SchemaViolation(
                    f"criterion_labels.{cid}", "missing label for finalized criterion"
                )
        for cid, value in labels.items():
            if cid not in expected:
                raise SchemaViolation(
                    f"criterion_labels.{cid}", "not a finalized criterion of this task"
                )
            _parse_label(value, f"criterion_labels.{cid}")
        _parse_label(body.get("overall_label"), "overall_label")

    def _validate_ranking(self, entry: TaskQueueEntry, body: dict) -> None:
        ranks = body.get("ranks")
        if not isinstance(ranks, dict):
            raise SchemaViolation("ranks", "must be an object")
        expected = {c["slot"] for c in entry.payload.get("candidates", [])}
        if set(ranks) != expected:
            raise SchemaViolation(
                "ranks", f"must cover exactly slots {sorted(expected)}"
            )
        duplicate_groups = tuple(
            tuple(group) for group in entry.payload.get("duplicate_groups", [])
        )
        try:
            rankings_to_pairwise(ranks, duplicate_groups)
        except ValueError as exc:
            path = "ranks"
            for slot in sorted(ranks):
                if f"{slot!r}" in str(exc):
                    path = f"ranks.{slot}"
                    break
            raise SchemaViolation(path, str(exc)) from exc

    # -- progress / export ---------------------------------------------------

    def progress(self, run_id: str) -> dict:
        with self._lock:
            if run_id not in self._runs:
                raise KeyError(f"unknown run {run_id!r}")
            entries = [t for t in self.tasks.values() if t.run_id == run_id]
            by_status = {status.value: 0 for status in TaskStatus}
            now = self.clock()
            for entry in entries:
                status = entry.status
                if status is TaskStatus.IN_PROGRESS and not entry.lease_live(now):
                    status = TaskStatus.OPEN
                by_status[status.value] += 1
            return {
                "run_id": run_id,
                "tasks": len(entries),
                "by_status": by_status,
                "submissions": sum(
                    1 for s in self._submissions if self.tasks[s["task_id"]].run_id == run_id
                ),
            }

    def export(self, run_id: str) -> dict[str, str]:
        """Write canonical export files; returns {filename: content}.

        A pure function of the task seeds and the event log: replaying the
        log into a fresh store exports byte-identical files.
        """
        with self._lock:
            if run_id not in self._runs:
                raise KeyError(f"unknown run {run_id!r}")
            dataset, agreement = self._export_dataset(run_id)
            files = {
                "dataset.jsonl": dataset,
                "agreement.json": agreement,
                "study.json": self._export_study(run_id),
            }
            export_dir = self._run_dir(run_id) / "export"
            export_dir.mkdir(parents=True, exist_ok=True)
            for name, content in files.items():
                (export_dir / name).write_text(content, encoding="utf-8")
            return files

    def _run_submissions(self, run_id: str) -> list[dict]:
        return [
            s for s in self._submissions if self.tasks[s["task_id"]].run_id == run_id
        ]

    def _export_dataset(self, run_id: str) -> tuple[str, str]:
        votes: dict[tuple[str, str], list[tuple[str, PreferenceLabel]]] = {}
        stubs: dict[str, dict] = {}
        for event in self._run_submissions(run_id):
            entry = self.tasks[event["task_id"]]
            if entry.kind is not TaskKind.PAIRWISE_JUDGMENT:
                continue
            stub_id = entry.payload["sample"]["id"]
            stubs.setdefault(stub_id, entry.payload)
            body = event["body"]
            annotator = event["annotator_id"]
            for cid, value in body["criterion_labels"].items():
                votes.setdefault((stub_id, cid), []).append(
                    (annotator, PreferenceLabel(value))
                )
            votes.setdefault((stub_id, "overall"), []).append(
                (annotator, PreferenceLabel(body["overall_label"]))
            )

        lines = [
            json.dumps(
                {"_meta": {"run_id": run_id, "threshold": self.retention_threshold}},
                sort_keys=True,
            )
        ]
        agreement_doc: dict[str, dict[str, float]] = {}
        for stub_id in sorted(stubs):
            payload = stubs[stub_id]
            retained: dict[str, PreferenceLabel] = {}
            agreement: dict[str, float] = {}
            for (sid, context), ballots in votes.items():
                if sid != stub_id:
                    continue
                vote_set = VoteSet(votes=tuple(ballots), context=(sid, context))
                label = retain_label(vote_set, self.retention_threshold)
                if label is not None:
                    retained[context] = label
                    agreement[context] = winning_fraction(vote_set)
            if "overall" not in retained:
                continue
            sample = _sample_from_payload(payload, retained)
            lines.append(json.dumps(sample_to_dict(sample), sort_keys=True))
            agreement_doc[sample.id] = {k: agreement[k] for k in sorted(agreement)}
        dataset = "\n".join(lines) + "\n"
        agreement_json = json.dumps(agreement_doc, sort_keys=True, indent=2) + "\n"
        return dataset, agreement_json

    def _export_study(self, run_id: str) -> str:
        per_setting: dict[str, dict[str, dict[str, int]]] = {}
        for event in self._run_submissions(run_id):
            entry = self.tasks[event["task_id"]]
            if entry.kind is not TaskKind.STUDY_RANKING:
                continue
            setting = entry.payload["setting"]
            slot_selectors = entry.payload["slot_selectors"]
            ours = entry.payload.get("subject", "ours")
            outcomes = rankings_to_pairwise(
                event["body"]["ranks"],
                tuple(tuple(g) for g in entry.payload.get("duplicate_groups", [])),
            )
            buckets = per_setting.setdefault(setting, {})

            def bucket(selector: str) -> dict[str, int]:
                return buckets.setdefault(
                    selector, {"wins": 0, "losses": 0, "ties": 0}
                )

            for winner, loser in outcomes.decisive:
                w_sel, l_sel = slot_selectors[winner], slot_selectors[loser]
                if w_sel == ours and l_sel != ours:
                    bucket(l_sel)["wins"] += 1
                elif l_sel == ours and w_sel != ours:
                    bucket(w_sel)["losses"] += 1
            for a, b in outcomes.ties:
                a_sel, b_sel = slot_selectors[a], slot_selectors[b]
                if a_sel == ours and b_sel != ours:
                    bucket(b_sel)["ties"] += 1
                elif b_sel == ours and a_sel != ours:
                    bucket(a_sel)["ties"] += 1

        doc: dict = {"run_id": run_id, "settings": {}}
        for setting in sorted(per_setting):
            doc["settings"][setting] = {}
            for baseline in sorted(per_setting[setting]):
                counts = per_setting[setting][baseline]
                summary = dict(counts)
                total = counts["wins"] + counts["losses"] + counts["ties"]
                if total:
                    gap, rate = bt_fit_two(
                        counts["wins"], counts["losses"], counts["ties"], TiePolicy.HALF
                    )
                    summary["bt_gap"] = gap
                    summary["bt_win_rate"] = rate
                doc["settings"][setting][baseline] = summary
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _parse_label(value, path: str) -> PreferenceLabel:
    try:
        return PreferenceLabel(value)
    except ValueError:
        raise SchemaViolation(path, "must be one of 'A', 'B', 'T'") from None


def _consensus_event(annotator_id: str, body: dict) -> ConsensusEvent:
    action = EventAction(body["action"])
    raw_criteria = body.get("criteria", [])
    if not isinstance(raw_criteria, list):
        raise SchemaViolation("criteria", "must be a list")
    try:
        criteria = tuple(
            Criterion(id=c["id"], text=c["text"], theme=c.get("theme"))
            for c in raw_criteria
        )
    except (KeyError, TypeError) as exc:
        raise SchemaViolation("criteria", f"malformed criterion: {exc}") from exc
    except ValueError as exc:
        raise SchemaViolation("criteria", str(exc)) from exc
    try:
        return ConsensusEvent(
            annotator_id=annotator_id,
            action=action,
            criteria=criteria,
            criterion_id=body.get("criterion_id"),
        )
    except ValueError as exc:
        raise SchemaViolation("criteria", str(exc)) from exc


def _sample_from_payload(payload: dict, labels: dict[str, PreferenceLabel]) -> Sample:
    stub = payload["sample"]
    criteria = tuple(
        Criterion(id=c["id"], text=c["text"], theme=c.get("theme"))
        for c in payload["criteria"]
    )
    criterion_labels = {
        cid: label for cid, label in labels.items() if cid != "overall"
    }
    return Sample(
        id=stub["id"],
        prompt=Prompt(
            id=stub["prompt"]["id"],
            text=stub["prompt"]["text"],
            components=frozenset(stub["prompt"]["components"]),
            topic=stub["prompt"].get("topic", ""),
        ),
        image_a=_image_from_dict(stub["image_a"]),
        image_b=_image_from_dict(stub["image_b"]),
        criteria=criteria,
        criterion_labels=criterion_labels,
        overall_label=labels["overall"],
    )


def _image_from_dict(doc: dict) -> ImageRef:
    return ImageRef(
        id=doc["id"],
        source_model=doc.get("source_model", ""),
        features=tuple(doc["features"]),
        uri=doc.get("uri"),
    )


def build_study_tasks(
    store: ServiceStore,
    run_id: str,
    prompt: Prompt,
    selections: dict[str, dict],
    subject: str,
    criteria_texts: Sequence[str],
    seed: int,
    votes_needed: int = 1,
) -> list[str]:
    """Create the three ranking tasks of one study prompt.

    `selections` maps selector name -> {"image_id": ..., "uri": ...} (the
    image each selector picked). Slots are assigned once per prompt and
    shared by all three settings; selectors that picked the same image
    become a duplicate group whose ranks must match.
    """
    assignment = blind_slot_assignment(seed, prompt.id, sorted(selections))
    by_image: dict[str, list[str]] = {}
    for slot in STUDY_SLOTS:
        image_id = selections[assignment[slot]]["image_id"]
        by_image.setdefault(image_id, []).append(slot)
    duplicate_groups = [sorted(slots) for slots in by_image.values() if len(slots) > 1]

    task_ids = []
    for setting in STUDY_SETTINGS:
        shown = (
            list(criteria_texts)
            if setting == "multi"
            else ([criteria_texts[0]] if setting == "single" and criteria_texts else [])
        )
        payload = {
            "prompt_id": prompt.id,
            "prompt_text": prompt.text,
            "setting": setting,
            "criteria_text": shown,
            "candidates": [
                {
                    "slot": slot,
                    "uri": selections[assignment[slot]].get("uri"),
                }
                for slot in STUDY_SLOTS
            ],
            "duplicate_groups": sorted(duplicate_groups),
            "slot_selectors": assignment,
            "subject": subject,
        }
        task_id = f"{run_id}-study-{prompt.id}-{setting}"
        store.add_task(run_id, task_id, TaskKind.STUDY_RANKING, payload, votes_needed)
        task_ids.append(task_id)
    return task_ids


# -- wire API ---------------------------------------------------------------


def create_app(store: ServiceStore) -> FastAPI:
    app = FastAPI(title="critpick annotation service")

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/v1/tasks/next")
    def next_task(
        annotator: str = Query(..., min_length=1),
        kind: str | None = Query(default=None),
    ) -> dict:
        task_kind = None
        if kind is not None:
            try:
                task_kind = TaskKind(kind)
            except ValueError:
                raise HTTPException(422, detail=f"kind: unknown task kind {kind!r}")
        entry = store.next_task(annotator, task_kind)
        if entry is None:
            return {"task": None}
        doc = {
            "task_id": entry.task_id,
            "run_id": entry.run_id,
            "kind": entry.kind.value,
            "payload": _public_payload(entry),
            "lease_expires_ts": entry.lease_expires,
        }
        return {"task": doc}

    @app.post("/v1/tasks/{task_id}/submit")
    def submit(task_id: str, body: dict, annotator: str = Query(..., min_length=1)) -> dict:
        try:
            return store.submit(annotator, task_id, body)
        except KeyError as exc:
            raise HTTPException(404, detail=str(exc)) from exc
        except SchemaViolation as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        except (ConflictError, ProtocolError) as exc:
            raise HTTPException(409, detail=str(exc)) from exc

    @app.get("/v1/runs/{run_id}/progress")
    def progress(run_id: str) -> dict:
        try:
            return store.progress(run_id)
        except KeyError as exc:
            raise HTTPException(404, detail=str(exc)) from exc

    @app.post("/v1/runs/{run_id}/export")
    def export(run_id: str) -> dict:
        try:
            files = store.export(run_id)
        except KeyError as exc:
            raise HTTPException(404, detail=str(exc)) from exc
        return {"files": sorted(files), "bytes": {k: len(v) for k, v in files.items()}}

    return app


def _public_payload(entry: TaskQueueEntry) -> dict:
    """Payload as shown to annotators; blind mappings stay server-side."""
    payload = dict(entry.payload)
    payload.pop("slot_selectors", None)
    payload.pop("subject", None)
    if entry.kind is TaskKind.CRITERIA_FORMULATION and entry.consensus is not None:
        payload["draft"] = [
            {"id": c.id, "text": c.text, "theme": c.theme}
            for c in entry.consensus.criteria_draft
        ]
        payload["draft_version"] = len(entry.consensus.history)
        payload["state"] = entry.consensus.state.value
    return payload
