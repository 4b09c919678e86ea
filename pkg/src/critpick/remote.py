"""Client for a remote comparison service speaking the /v1/compare protocol.

Request body::

    {"prompt": str, "image_a": uri-or-id, "image_b": uri-or-id,
     "criteria": [str, ...] | "overall",
     "mode": "pairwise" | "pointwise",
     "template": "legacy" | "structured"}

The response is one of ``{"kind": "pairwise", "s": number}``,
``{"kind": "pointwise", "r_a": number, "r_b": number}``, or
``{"kind": "label", "label": "A" | "B" | "T"}`` (labels map to s of
+1/-1/0). Under the legacy template the criteria additionally ride inside
the prompt text as ``Prompt: ... Critical Considerations: ...`` for judges
that only accept one text field; the structured template sends the raw
prompt and relies on the criteria field.

Any non-2xx status or malformed body raises `ScorerError`, which
evaluation and selection handle per-instance; a flaky judge degrades
single judgments, never a whole run.
"""

from __future__ import annotations

import math
import threading
from typing import Callable

import httpx

from critpick.core import ConditionKind, PreferenceLabel
from critpick.scorers import (
    LEGACY_TEMPLATE,
    ScoreRequest,
    ScorerError,
    ScorerOutput,
    oracle_margin,
)

Transport = Callable[[str, dict], tuple[int, dict]]
"""POSTs a JSON body to a URL; returns (status code, parsed response)."""


def httpx_transport(timeout: float = 30.0) -> Transport:
    def post(url: str, body: dict) -> tuple[int, dict]:
        try:
            response = httpx.post(url, json=body, timeout=timeout)
        except httpx.HTTPError as exc:
            raise ScorerError(f"transport failure: {exc}") from exc
        try:
            payload = response.json()
        except ValueError:
            payload = {}
        return response.status_code, payload
    return post


class RemoteScorer:
    """Judge backed by a remote comparison endpoint.

    Thread-safe; at most `max_inflight` requests are outstanding at once.
    """

    def __init__(
        self,
        base_url: str,
        mode: str = "pairwise",
        template: str = "structured",
        transport: Transport | None = None,
        max_inflight: int = 8,
    ):
        if mode not in ("pairwise", "pointwise"):
            raise ValueError(f"mode must be 'pairwise' or 'pointwise', got {mode!r}")
        if template not in ("legacy", "structured"):
            raise ValueError(
                f"template must be 'legacy' or 'structured', got {template!r}"
            )
        if max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        self._url = base_url.rstrip("/") + "/v1/compare"
        self._mode = mode
        self._template = template
        self._transport = transport or httpx_transport()
        self._gate = threading.Semaphore(max_inflight)

    def _body(self, req: ScoreRequest) -> dict:
        overall = req.condition.kind is ConditionKind.OVERALL
        criteria = (
            "overall" if overall else [c.text for c in req.condition.criteria]
        )
        if self._template == "legacy":
            prompt = (
                f"Prompt: {req.prompt.text}."
                if overall
                else LEGACY_TEMPLATE.format(
                    prompt=req.prompt.text, condition=req.condition_text()
                )
            )
        else:
            prompt = req.prompt.text
        return {
            "prompt": prompt,
            "image_a": req.image_a.uri or req.image_a.id,
            "image_b": req.image_b.uri or req.image_b.id,
            "criteria": criteria,
            "mode": self._mode,
            "template": self._template,
        }

    def score(self, req: ScoreRequest) -> ScorerOutput:
        with self._gate:
            status, payload = self._transport(self._url, self._body(req))
        if not 200 <= status < 300:
            raise ScorerError(f"remote scorer returned status {status}")
        return parse_response(payload)


def parse_response(payload: dict) -> ScorerOutput:
    if not isinstance(payload, dict):
        raise ScorerError(f"malformed response: expected an object, got {payload!r}")
    kind = payload.get("kind")
    try:
        if kind == "pairwise":
            return ScorerOutput.pairwise(_finite(payload["s"], "s"))
        if kind == "pointwise":
            return ScorerOutput.pointwise(
                _finite(payload["r_a"], "r_a"), _finite(payload["r_b"], "r_b")
            )
        if kind == "label":
            label = PreferenceLabel(payload["label"])
            return ScorerOutput.pairwise(oracle_margin(label))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScorerError(f"malformed response: {exc}") from exc
    raise ScorerError(f"malformed response: unknown kind {kind!r}")


def _finite(value, name: str) -> float:
    number = float(value)
    if not math.isfinite(number):
        raise ScorerError(f"non-finite score in field {name!r}")
    return number
