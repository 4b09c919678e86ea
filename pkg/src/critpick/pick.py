"""Criterion-wise best-of-N selection over a candidate image pool.

Given candidates for one prompt and a resolved criterion list, every
criterion gets its own round-robin tournament: each unordered candidate
pair is judged once (presented in canonical id order), a win is worth one
point and a tie half a point each, and the winner is the candidate with the
most points. Standings ties are broken by decisive head-to-head result
first, then by position in the input ordering. Scorer failures on a pair
degrade to a flagged tie so one flaky judgment cannot void a whole run.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from critpick.core import OVERALL, Condition, Criterion, ImageRef, PreferenceLabel, Prompt
from critpick.scorers import ScoreRequest, ScorerError, ScorerOutput, to_prediction

MAX_PROVIDER_CRITERIA = 5


class Scorer(Protocol):
    def score(self, req: ScoreRequest) -> ScorerOutput: ...


class CriteriaResolutionError(RuntimeError):
    """No usable criteria: the provider failed and none were supplied."""


@dataclass(frozen=True)
class CandidateSet:
    prompt: Prompt
    candidates: tuple[ImageRef, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if len(self.candidates) < 2:
            raise ValueError("a candidate set needs at least two images")
        ids = [c.id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError("candidate ids must be distinct")


@dataclass(frozen=True)
class CriteriaProviderRequest:
    """Context handed to an external criterion generator."""

    prompt: Prompt
    reference_candidates: tuple[ImageRef, ...]
    instruction: str = (
        "Propose task-relevant fine-grained criteria for judging images "
        "generated for this prompt."
    )


CriteriaProvider = Callable[[CriteriaProviderRequest], Sequence[Criterion]]


def resolve_criteria(
    user_criteria: Sequence[Criterion] | None,
    req: CriteriaProviderRequest,
    provider: CriteriaProvider | None = None,
) -> list[Criterion]:
    """Criteria to select under, always ending with the overall criterion.

    User-supplied criteria are used directly. Otherwise the provider is
    asked, its output deduplicated by id and capped at
    `MAX_PROVIDER_CRITERIA`. Either way the overall criterion is appended
    if not already present.
    """
    if user_criteria is not None:
        criteria = list(user_criteria)
    else:
        if provider is None:
            raise CriteriaResolutionError("no criteria given and no provider configured")
        try:
            generated = list(provider(req))
        except Exception as exc:
            raise CriteriaResolutionError(f"criteria provider failed: {exc}") from exc
        criteria = []
        seen: set[str] = set()
        for criterion in generated:
            if criterion.id in seen:
                continue
            seen.add(criterion.id)
            criteria.append(criterion)
            if len(criteria) == MAX_PROVIDER_CRITERIA:
                break
    if not any(c.is_overall for c in criteria):
        criteria.append(OVERALL)
    return criteria


@dataclass(frozen=True)
class Match:
    criterion_id: str
    a: str
    b: str
    outcome: PreferenceLabel
    scorer_failed: bool = False


@dataclass(frozen=True)
class Standings:
    criterion_id: str
    wins: tuple[tuple[str, float], ...]  # (candidate id, points) in input order
    winner: str

    def points(self, candidate_id: str) -> float:
        for cid, pts in self.wins:
            if cid == candidate_id:
                return pts
        raise KeyError(candidate_id)


@dataclass(frozen=True)
class SelectionReport:
    prompt_id: str
    criteria: tuple[Criterion, ...]
    per_criterion: dict[str, Standings]
    match_log: tuple[Match, ...]

    def winners(self) -> dict[str, str]:
        return {cid: st.winner for cid, st in self.per_criterion.items()}

    def to_dict(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "criteria": [
                {"id": c.id, "text": c.text, "theme": c.theme} for c in self.criteria
            ],
            "per_criterion": {
                cid: {
                    "winner": st.winner,
                    "standings": [
                        {"candidate": c, "wins": w} for c, w in st.wins
                    ],
                }
                for cid, st in self.per_criterion.items()
            },
            "match_log": [
                {
                    "criterion": m.criterion_id,
                    "a": m.a,
                    "b": m.b,
                    "outcome": m.outcome.value,
                    "scorer_failed": m.scorer_failed,
                }
                for m in self.match_log
            ],
        }


def _condition_for(criterion: Criterion) -> Condition:
    return Condition.overall() if criterion.is_overall else Condition.single(criterion)


def run_tournament(
    candidate_set: CandidateSet,
    criterion: Criterion,
    scorer: Scorer,
    tie_band: float = 0.0,
) -> tuple[Standings, list[Match]]:
    """Round-robin over all unordered candidate pairs under one criterion."""
    candidates = candidate_set.candidates
    condition = _condition_for(criterion)
    points = {c.id: 0.0 for c in candidates}
    beats: set[tuple[str, str]] = set()
    matches: list[Match] = []

    for left, right in itertools.combinations(candidates, 2):
        a, b = (left, right) if left.id <= right.id else (right, left)
        req = ScoreRequest(
            prompt=candidate_set.prompt, image_a=a, image_b=b, condition=condition
        )
        failed = False
        try:
            outcome = to_prediction(scorer.score(req), tie_band)
        except ScorerError:
            outcome = PreferenceLabel.TIE
            failed = True
        matches.append(
            Match(criterion_id=criterion.id, a=a.id, b=b.id, outcome=outcome,
                  scorer_failed=failed)
        )
        if outcome is PreferenceLabel.A_WINS:
            points[a.id] += 1.0
            beats.add((a.id, b.id))
        elif outcome is PreferenceLabel.B_WINS:
            points[b.id] += 1.0
            beats.add((b.id, a.id))
        else:
            points[a.id] += 0.5
            points[b.id] += 0.5

    best = max(points.values())
    leaders = [c.id for c in candidates if points[c.id] == best]
    winner = leaders[0]
    if len(leaders) > 1:
        # Head-to-head is decisive only if one leader beat every other leader.
        dominant = [
            cid
            for cid in leaders
            if all((cid, other) in beats for other in leaders if other != cid)
        ]
        if len(dominant) == 1:
            winner = dominant[0]

    standings = Standings(
        criterion_id=criterion.id,
        wins=tuple((c.id, points[c.id]) for c in candidates),
        winner=winner,
    )
    return standings, matches


def pick(
    candidate_set: CandidateSet,
    criteria: Sequence[Criterion],
    scorer: Scorer,
    tie_band: float = 0.0,
) -> SelectionReport:
    """One tournament per criterion; winners reported per criterion only."""
    if not criteria:
        raise ValueError("pick needs at least one criterion")
    ids = [c.id for c in criteria]
    if len(set(ids)) != len(ids):
        raise ValueError("criteria ids must be distinct")

    per_criterion: dict[str, Standings] = {}
    match_log: list[Match] = []
    for criterion in criteria:
        standings, matches = run_tournament(candidate_set, criterion, scorer, tie_band)
        per_criterion[criterion.id] = standings
        match_log.extend(sorted(matches, key=lambda m: (m.a, m.b)))

    n = len(candidate_set.candidates)
    expected = len(criteria) * (n * (n - 1) // 2)
    assert len(match_log) == expected, "match log must cover every pair once"
    return SelectionReport(
        prompt_id=candidate_set.prompt.id,
        criteria=tuple(criteria),
        per_criterion=per_criterion,
        match_log=tuple(match_log),
    )
