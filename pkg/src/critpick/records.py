"""Canonical JSONL record format for datasets and benchmarks.

One JSON object per line, UTF-8. Top-level keys are exactly:
``id``, ``prompt``, ``image_a``, ``image_b``, ``criteria``,
``criterion_labels``, ``overall_label``, ``difficulty``.

Labels serialize as ``"A" | "B" | "T"`` and difficulty as
``"easy" | "medium" | "hard"``. Strict parsing rejects unknown keys at any
level; lenient parsing ignores them. Files may start with a single header
object whose only top-level key is ``"_meta"`` (run manifest and export
metadata); readers skip it, writers emit it on request.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable, Iterator

from critpick.core import (
    Criterion,
    Difficulty,
    ImageRef,
    PreferenceLabel,
    Prompt,
    Sample,
)

META_KEY = "_meta"

_PROMPT_KEYS = {"id", "text", "components", "topic"}
_IMAGE_KEYS = {"id", "source_model", "features", "uri"}
_CRITERION_KEYS = {"id", "text", "theme"}
_SAMPLE_KEYS = {
    "id",
    "prompt",
    "image_a",
    "image_b",
    "criteria",
    "criterion_labels",
    "overall_label",
    "difficulty",
}


class RecordError(ValueError):
    """A record violates the canonical schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _check_keys(obj: dict, allowed: set[str], where: str, strict: bool) -> None:
    if not isinstance(obj, dict):
        raise RecordError(f"{where} must be a JSON object")
    if strict:
        unknown = set(obj) - allowed
        if unknown:
            raise RecordError(f"unknown keys in {where}: {sorted(unknown)}")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise RecordError(f"missing key {key!r} in {where}")
    return obj[key]


def sample_to_dict(sample: Sample) -> dict:
    """Serialize one sample to the canonical record object."""
    return {
        "id": sample.id,
        "prompt": {
            "id": sample.prompt.id,
            "text": sample.prompt.text,
            "components": sorted(sample.prompt.components),
            "topic": sample.prompt.topic,
        },
        "image_a": _image_to_dict(sample.image_a),
        "image_b": _image_to_dict(sample.image_b),
        "criteria": [
            {"id": c.id, "text": c.text, "theme": c.theme} for c in sample.criteria
        ],
        "criterion_labels": {
            cid: label.value for cid, label in sample.criterion_labels.items()
        },
        "overall_label": sample.overall_label.value,
        "difficulty": sample.difficulty.value,
    }


def _image_to_dict(image: ImageRef) -> dict:
    return {
        "id": image.id,
        "source_model": image.source_model,
        "features": list(image.features),
        "uri": image.uri,
    }


def _parse_label(raw, where: str) -> PreferenceLabel:
    try:
        return PreferenceLabel(raw)
    except ValueError:
        raise RecordError(f"{where} must be one of 'A', 'B', 'T', got {raw!r}") from None


def sample_from_dict(obj: dict, strict: bool = True) -> Sample:
    """Parse one canonical record object back into a Sample."""
    _check_keys(obj, _SAMPLE_KEYS, "record", strict)

    raw_prompt = _require(obj, "prompt", "record")
    _check_keys(raw_prompt, _PROMPT_KEYS, "prompt", strict)
    prompt = Prompt(
        id=_require(raw_prompt, "id", "prompt"),
        text=_require(raw_prompt, "text", "prompt"),
        components=frozenset(_require(raw_prompt, "components", "prompt")),
        topic=raw_prompt.get("topic", ""),
    )

    images = {}
    for side in ("image_a", "image_b"):
        raw = _require(obj, side, "record")
        _check_keys(raw, _IMAGE_KEYS, side, strict)
        images[side] = ImageRef(
            id=_require(raw, "id", side),
            source_model=raw.get("source_model", ""),
            features=tuple(_require(raw, "features", side)),
            uri=raw.get("uri"),
        )

    criteria = []
    for i, raw in enumerate(_require(obj, "criteria", "record")):
        _check_keys(raw, _CRITERION_KEYS, f"criteria[{i}]", strict)
        criteria.append(
            Criterion(
                id=_require(raw, "id", f"criteria[{i}]"),
                text=_require(raw, "text", f"criteria[{i}]"),
                theme=raw.get("theme"),
            )
        )

    raw_labels = _require(obj, "criterion_labels", "record")
    if not isinstance(raw_labels, dict):
        raise RecordError("criterion_labels must be an object")
    labels = {
        cid: _parse_label(v, f"criterion_labels[{cid}]")
        for cid, v in raw_labels.items()
    }

    try:
        sample = Sample(
            id=_require(obj, "id", "record"),
            prompt=prompt,
            image_a=images["image_a"],
            image_b=images["image_b"],
            criteria=tuple(criteria),
            criterion_labels=labels,
            overall_label=_parse_label(
                _require(obj, "overall_label", "record"), "overall_label"
            ),
        )
    except ValueError as exc:
        raise RecordError(str(exc)) from exc

    raw_difficulty = _require(obj, "difficulty", "record")
    try:
        declared = Difficulty(raw_difficulty)
    except ValueError:
        raise RecordError(f"unknown difficulty {raw_difficulty!r}") from None
    if declared is not sample.difficulty:
        raise RecordError(
            f"sample {sample.id}: stored difficulty {declared.value!r} does not "
            f"match component count {len(prompt.components)}"
        )
    return sample


def read_samples(
    source: str | Path | IO[str], strict: bool = True
) -> tuple[list[Sample], dict | None]:
    """Read a JSONL dataset. Returns (samples, header metadata or None).

    Enforces one corpus-wide image feature length across the whole file.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return read_samples(handle, strict=strict)

    samples: list[Sample] = []
    meta: dict | None = None
    feature_dim: int | None = None
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(f"invalid JSON: {exc}", line=lineno) from exc
        if lineno == 1 and isinstance(obj, dict) and set(obj) == {META_KEY}:
            meta = obj[META_KEY]
            continue
        try:
            sample = sample_from_dict(obj, strict=strict)
        except RecordError as exc:
            raise RecordError(str(exc), line=lineno) from exc
        dim = len(sample.image_a.features)
        if feature_dim is None:
            feature_dim = dim
        elif dim != feature_dim:
            raise RecordError(
                f"feature length {dim} differs from corpus length {feature_dim}",
                line=lineno,
            )
        samples.append(sample)
    return samples, meta


def write_samples(
    target: str | Path | IO[str],
    samples: Iterable[Sample],
    meta: dict | None = None,
) -> None:
    """Write samples as canonical JSONL, optionally preceded by a header."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as handle:
            write_samples(handle, samples, meta=meta)
        return
    if meta is not None:
        target.write(json.dumps({META_KEY: meta}, sort_keys=True) + "\n")
    for sample in samples:
        target.write(json.dumps(sample_to_dict(sample), sort_keys=True) + "\n")


def iter_jsonl(path: str | Path) -> Iterator[dict]:
    """Yield raw JSON objects from a JSONL file, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"invalid JSON: {exc}", line=lineno) from exc
