import itertools

import numpy as np
import pytest

from critpick.core import OVERALL, Criterion, PreferenceLabel
from critpick.pick import (
    CandidateSet,
    CriteriaProviderRequest,
    CriteriaResolutionError,
    pick,
    resolve_criteria,
    run_tournament,
)
from critpick.scorers import ScorerError, ScorerOutput
from critpick.synthetic import dominance_candidates

A = PreferenceLabel.A_WINS
B = PreferenceLabel.B_WINS
T = PreferenceLabel.TIE


class TableScorer:
    """Judges pairs from a fixed outcome table keyed by (min id, max id)."""

    def __init__(self, outcomes: dict[tuple[str, str], PreferenceLabel]):
        self.outcomes = outcomes

    def score(self, req):
        outcome = self.outcomes[(req.image_a.id, req.image_b.id)]
        return ScorerOutput.pairwise(
            {A: 1.0, B: -1.0, T: 0.0}[outcome]
        )


class FailingScorer:
    def __init__(self, fail_pairs):
        self.fail_pairs = set(fail_pairs)

    def score(self, req):
        if (req.image_a.id, req.image_b.id) in self.fail_pairs:
            raise ScorerError("synthetic judge outage")
        return ScorerOutput.pairwise(1.0)


def candidate_set(n=3):
    prompt, candidates = dominance_candidates(n_candidates=n, seed=1)
    return CandidateSet(prompt=prompt, candidates=tuple(candidates))


def pair_keys(cands):
    ids = [c.id for c in cands.candidates]
    return [tuple(sorted(p)) for p in itertools.combinations(ids, 2)]


CRIT = Criterion(id="sharpness", text="edge sharpness")


class TestResolveCriteria:
    def req(self):
        cands = candidate_set()
        return CriteriaProviderRequest(
            prompt=cands.prompt, reference_candidates=cands.candidates
        )

    def test_user_criteria_get_overall_appended(self):
        c1, c2 = Criterion(id="c1", text="x"), Criterion(id="c2", text="y")
        resolved = resolve_criteria([c1, c2], self.req(), provider=None)
        assert resolved == [c1, c2, OVERALL]

    def test_idempotent_when_overall_present(self):
        c1 = Criterion(id="c1", text="x")
        resolved = resolve_criteria([c1, OVERALL], self.req(), provider=None)
        assert resolved == [c1, OVERALL]

    def test_provider_output_deduped_and_capped(self):
        generated = [Criterion(id=f"g{i % 6}", text=f"aspect {i % 6}") for i in range(9)]

        def provider(req):
            return generated

        resolved = resolve_criteria(None, self.req(), provider)
        ids = [c.id for c in resolved]
        assert len(ids) == len(set(ids))
        assert len(resolved) == 6  # 5 capped + overall
        assert resolved[-1] == OVERALL

    def test_provider_failure_without_user_criteria(self):
        def provider(req):
            raise RuntimeError("backend down")

        with pytest.raises(CriteriaResolutionError, match="provider failed"):
            resolve_criteria(None, self.req(), provider)

    def test_no_provider_no_criteria(self):
        with pytest.raises(CriteriaResolutionError):
            resolve_criteria(None, self.req(), provider=None)


class TestRunTournament:
    def test_transitive_standings(self):
        cands = candidate_set(3)
        ids = [c.id for c in cands.candidates]
        # first beats all, second beats third
        outcomes = {
            (ids[0], ids[1]): A,
            (ids[0], ids[2]): A,
            (ids[1], ids[2]): A,
        }
        standings, matches = run_tournament(cands, CRIT, TableScorer(outcomes))
        assert standings.winner == ids[0]
        assert [pts for _, pts in standings.wins] == [2.0, 1.0, 0.0]
        assert len(matches) == 3

    def test_all_ties_first_by_input_order_wins(self):
        cands = candidate_set(3)
        outcomes = {pair: T for pair in pair_keys(cands)}
        standings, _ = run_tournament(cands, CRIT, TableScorer(outcomes))
        assert standings.winner == cands.candidates[0].id
        assert all(pts == 1.0 for _, pts in standings.wins)

    def test_cycle_falls_back_to_input_order(self):
        cands = candidate_set(4)
        a, b, c, d = [x.id for x in cands.candidates]

        def entry(x, y, winner):
            lo, hi = sorted((x, y))
            return (lo, hi), (A if winner == lo else B)

        outcomes = dict(
            [
                entry(a, b, a),  # 3-way cycle a > b > c > a
                entry(b, c, b),
                entry(a, c, c),
                entry(a, d, a),  # everyone beats d
                entry(b, d, b),
                entry(c, d, c),
            ]
        )
        standings, _ = run_tournament(cands, CRIT, TableScorer(outcomes))
        points = dict(standings.wins)
        assert points == {a: 2.0, b: 2.0, c: 2.0, d: 0.0}
        assert standings.winner == a  # cyclic head-to-head, lowest input index

    def test_head_to_head_breaks_two_way_tie(self):
        cands = candidate_set(4)
        a, b, c, d = [x.id for x in cands.candidates]

        def entry(x, y, winner):
            lo, hi = sorted((x, y))
            return (lo, hi), (A if winner == lo else B)

        outcomes = dict(
            [
                entry(a, b, b),  # b beats a directly
                entry(a, c, a),
                entry(a, d, a),
                entry(b, c, b),
                entry(b, d, d),
                entry(c, d, c),
            ]
        )
        standings, _ = run_tournament(cands, CRIT, TableScorer(outcomes))
        points = dict(standings.wins)
        assert points[a] == 2.0 and points[b] == 2.0
        assert standings.winner == b  # head-to-head over input order

    def test_scorer_failure_degrades_to_flagged_tie(self):
        cands = candidate_set(3)
        fail_pair = pair_keys(cands)[0]
        standings, matches = run_tournament(cands, CRIT, FailingScorer([fail_pair]))
        failed = [m for m in matches if m.scorer_failed]
        assert len(failed) == 1
        assert failed[0].outcome is T
        assert sum(pts for _, pts in standings.wins) == 3.0

    def test_total_points_sum_to_pair_count(self):
        rng = np.random.default_rng(0)
        cands = candidate_set(5)
        pairs = pair_keys(cands)
        for _ in range(25):
            outcomes = {p: [A, B, T][rng.integers(3)] for p in pairs}
            standings, _ = run_tournament(cands, CRIT, TableScorer(outcomes))
            assert sum(pts for _, pts in standings.wins) == len(pairs)


def copeland_oracle(ids_in_order, outcomes):
    """Independent computation of the tournament rule for the oracle check."""
    points = {i: 0.0 for i in ids_in_order}
    beats = set()
    for (lo, hi), outcome in outcomes.items():
        if outcome is A:
            points[lo] += 1
            beats.add((lo, hi))
        elif outcome is B:
            points[hi] += 1
            beats.add((hi, lo))
        else:
            points[lo] += 0.5
            points[hi] += 0.5
    best = max(points.values())
    leaders = [i for i in ids_in_order if points[i] == best]
    if len(leaders) == 1:
        return leaders[0], points
    dominant = [
        x for x in leaders
        if all((x, y) in beats for y in leaders if y != x)
    ]
    if len(dominant) == 1:
        return dominant[0], points
    return leaders[0], points


class TestCopelandOracle:
    def test_exhaustive_three_candidates(self):
        cands = candidate_set(3)
        ids = [c.id for c in cands.candidates]
        pairs = pair_keys(cands)
        for assignment in itertools.product([A, B, T], repeat=3):
            outcomes = dict(zip(pairs, assignment))
            standings, _ = run_tournament(cands, CRIT, TableScorer(outcomes))
            expected_winner, expected_points = copeland_oracle(ids, outcomes)
            assert standings.winner == expected_winner, outcomes
            assert dict(standings.wins) == expected_points

    def test_sampled_four_candidates(self):
        cands = candidate_set(4)
        ids = [c.id for c in cands.candidates]
        pairs = pair_keys(cands)
        rng = np.random.default_rng(77)
        labels = [A, B, T]
        for _ in range(10_000):
            outcomes = {p: labels[rng.integers(3)] for p in pairs}
            standings, _ = run_tournament(cands, CRIT, TableScorer(outcomes))
            expected_winner, expected_points = copeland_oracle(ids, outcomes)
            assert standings.winner == expected_winner, outcomes
            assert dict(standings.wins) == expected_points

    def test_candidate_permutation_preserves_pair_judgments(self):
        prompt, candidates = dominance_candidates(n_candidates=4, seed=1)
        pairs = [tuple(sorted(p)) for p in
                 itertools.combinations([c.id for c in candidates], 2)]
        rng = np.random.default_rng(5)
        outcomes = {p: [A, B, T][rng.integers(3)] for p in pairs}
        scorer = TableScorer(outcomes)
        base = run_tournament(CandidateSet(prompt=prompt, candidates=tuple(candidates)),
                              CRIT, scorer)
        for perm in itertools.permutations(candidates):
            permuted = run_tournament(
                CandidateSet(prompt=prompt, candidates=tuple(perm)), CRIT, scorer
            )
            assert dict(permuted[0].wins) == dict(base[0].wins)
            assert {(m.a, m.b, m.outcome) for m in permuted[1]} == {
                (m.a, m.b, m.outcome) for m in base[1]
            }


class TestPick:
    def test_match_log_size(self):
        cands = candidate_set(4)
        criteria = [Criterion(id=f"c{i}", text=f"aspect {i}") for i in range(3)]
        outcomes = {p: A for p in pair_keys(cands)}
        report = pick(cands, criteria, TableScorer(outcomes))
        assert len(report.match_log) == 3 * 6

    def test_oracle_backed_dominance(self):
        cands = candidate_set(4)
        ids = [c.id for c in cands.candidates]
        # Criterion X: input order dominance; criterion Y: reversed.
        forward = {}
        backward = {}
        rank = {cid: i for i, cid in enumerate(ids)}
        for lo, hi in pair_keys(cands):
            forward[(lo, hi)] = A if rank[lo] < rank[hi] else B
            backward[(lo, hi)] = B if rank[lo] < rank[hi] else A

        class PerCriterion:
            def score(self, req):
                table = forward if req.condition.criteria and \
                    req.condition.criteria[0].id == "x" else backward
                outcome = table[(req.image_a.id, req.image_b.id)]
                return ScorerOutput.pairwise({A: 1.0, B: -1.0, T: 0.0}[outcome])

        report = pick(
            cands,
            [Criterion(id="x", text="forward"), Criterion(id="y", text="reverse")],
            PerCriterion(),
        )
        assert report.per_criterion["x"].winner == ids[0]
        assert report.per_criterion["y"].winner == ids[-1]

    def test_two_candidates_single_overall(self):
        cands = candidate_set(2)
        outcomes = {pair_keys(cands)[0]: B}
        report = pick(cands, [OVERALL], TableScorer(outcomes))
        lo, hi = pair_keys(cands)[0]
        assert report.per_criterion["overall"].winner == hi

    def test_report_serialization_shape(self):
        cands = candidate_set(3)
        outcomes = {p: T for p in pair_keys(cands)}
        report = pick(cands, [CRIT], TableScorer(outcomes))
        doc = report.to_dict()
        assert set(doc) == {"prompt_id", "criteria", "per_criterion", "match_log"}
        assert doc["per_criterion"]["sharpness"]["winner"] == cands.candidates[0].id

    def test_duplicate_criteria_rejected(self):
        cands = candidate_set(3)
        with pytest.raises(ValueError, match="distinct"):
            pick(cands, [CRIT, CRIT], TableScorer({}))
