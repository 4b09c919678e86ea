import threading
import time

import pytest

from critpick.remote import RemoteScorer, parse_response
from critpick.scorers import OutputKind, ScorerError

from tests.test_scorers import make_request


class RecordingTransport:
    def __init__(self, status=200, payload=None):
        self.status = status
        self.payload = payload or {"kind": "pairwise", "s": 0.4}
        self.requests = []

    def __call__(self, url, body):
        self.requests.append((url, body))
        return self.status, self.payload


class TestRequestBody:
    def test_structured_template_body(self):
        transport = RecordingTransport()
        scorer = RemoteScorer("http://judge.local", template="structured",
                              transport=transport)
        scorer.score(make_request())
        url, body = transport.requests[0]
        assert url == "http://judge.local/v1/compare"
        assert body["prompt"] == "a lighthouse at dusk"
        assert body["criteria"] == ["sharp text"]
        assert body["mode"] == "pairwise"
        assert body["template"] == "structured"
        assert body["image_a"] == "a" and body["image_b"] == "b"

    def test_legacy_template_appends_criteria_to_prompt(self):
        transport = RecordingTransport()
        scorer = RemoteScorer("http://judge.local", template="legacy",
                              transport=transport)
        scorer.score(make_request())
        _, body = transport.requests[0]
        assert body["prompt"] == (
            "Prompt: a lighthouse at dusk. Critical Considerations: sharp text."
        )

    def test_overall_condition_sends_overall(self):
        from critpick.core import Condition

        transport = RecordingTransport()
        scorer = RemoteScorer("http://judge.local", template="legacy",
                              transport=transport)
        req = make_request()
        overall_req = req.__class__(
            prompt=req.prompt, image_a=req.image_a, image_b=req.image_b,
            condition=Condition.overall(),
        )
        scorer.score(overall_req)
        _, body = transport.requests[0]
        assert body["criteria"] == "overall"
        assert body["prompt"] == "Prompt: a lighthouse at dusk."

    def test_uri_preferred_over_id(self):
        from critpick.core import ImageRef

        transport = RecordingTransport()
        scorer = RemoteScorer("http://judge.local", transport=transport)
        req = make_request()
        with_uri = req.__class__(
            prompt=req.prompt,
            image_a=ImageRef(id="a", source_model="m", features=(1.0, 2.0),
                             uri="s3://bucket/a.png"),
            image_b=req.image_b,
            condition=req.condition,
        )
        scorer.score(with_uri)
        _, body = transport.requests[0]
        assert body["image_a"] == "s3://bucket/a.png"


class TestResponses:
    def test_pairwise_response(self):
        out = parse_response({"kind": "pairwise", "s": -1.25})
        assert out.kind is OutputKind.PAIRWISE and out.s == -1.25

    def test_pointwise_response(self):
        out = parse_response({"kind": "pointwise", "r_a": 0.9, "r_b": 0.2})
        assert out.kind is OutputKind.POINTWISE
        assert (out.r_a, out.r_b) == (0.9, 0.2)

    def test_label_response_maps_to_margin(self):
        assert parse_response({"kind": "label", "label": "A"}).s == 1.0
        assert parse_response({"kind": "label", "label": "B"}).s == -1.0
        assert parse_response({"kind": "label", "label": "T"}).s == 0.0

    @pytest.mark.parametrize(
        "payload",
        [
            {"kind": "pairwise"},
            {"kind": "pointwise", "r_a": 1.0},
            {"kind": "label", "label": "Z"},
            {"kind": "mystery"},
            {"s": 1.0},
            {"kind": "pairwise", "s": "not-a-number"},
            {"kind": "pairwise", "s": float("nan")},
        ],
    )
    def test_malformed_payloads_raise_scorer_error(self, payload):
        with pytest.raises(ScorerError):
            parse_response(payload)

    def test_non_2xx_status_raises(self):
        scorer = RemoteScorer(
            "http://judge.local", transport=RecordingTransport(status=503)
        )
        with pytest.raises(ScorerError, match="503"):
            scorer.score(make_request())


class TestAgainstStubService:
    def make_stub_transport(self):
        """In-process judge speaking the /v1/compare protocol."""
        from fastapi import FastAPI
        from fastapi.testclient import TestClient

        app = FastAPI()

        @app.post("/v1/compare")
        def compare(body: dict):
            if body["mode"] == "pointwise":
                return {"kind": "pointwise", "r_a": 0.8, "r_b": 0.1}
            longer = len(body["image_a"]) >= len(body["image_b"])
            return {"kind": "pairwise", "s": 1.0 if longer else -1.0}

        client = TestClient(app)

        def transport(url, body):
            response = client.post(url.replace("http://judge.local", ""), json=body)
            return response.status_code, response.json()

        return transport

    def test_pairwise_round_trip(self):
        scorer = RemoteScorer(
            "http://judge.local", transport=self.make_stub_transport()
        )
        out = scorer.score(make_request())
        assert out.kind is OutputKind.PAIRWISE and out.s == 1.0

    def test_pointwise_round_trip(self):
        scorer = RemoteScorer(
            "http://judge.local", mode="pointwise",
            transport=self.make_stub_transport(),
        )
        out = scorer.score(make_request())
        assert out.kind is OutputKind.POINTWISE
        assert out.r_a == 0.8


class TestConcurrencyCap:
    def test_inflight_requests_capped(self):
        active = 0
        peak = 0
        lock = threading.Lock()

        def slow(url, body):
            nonlocal active, peak
            with lock:
                active += 1
                peak = max(peak, active)
            time.sleep(0.02)
            with lock:
                active -= 1
            return 200, {"kind": "pairwise", "s": 0.0}

        scorer = RemoteScorer("http://judge.local", transport=slow, max_inflight=3)
        threads = [
            threading.Thread(target=scorer.score, args=(make_request(),))
            for _ in range(12)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert peak <= 3

    def test_invalid_cap_rejected(self):
        with pytest.raises(ValueError):
            RemoteScorer("http://judge.local", max_inflight=0)
