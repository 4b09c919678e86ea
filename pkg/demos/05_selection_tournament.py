"""Criterion-wise best-of-N selection: resolve criteria, run one
round-robin tournament per criterion, and read the winners.

Run: python3 demos/05_selection_tournament.py
"""

from critpick.core import Criterion
from critpick.pick import (
    CandidateSet,
    CriteriaProviderRequest,
    pick,
    resolve_criteria,
)
from critpick.scorers import LinearScorer
from critpick.synthetic import dominance_candidates

prompt, candidates = dominance_candidates(n_candidates=4, d_img=8, seed=7)
pool = CandidateSet(prompt=prompt, candidates=tuple(candidates))
print("prompt:", prompt.text)
print("candidates:", [c.id for c in pool.candidates])

# Criteria resolution: explicit user criteria are used directly and the
# overall criterion is appended; otherwise a provider generates them.
user_criteria = [
    Criterion(id="subject", text="main subject matches the prompt",
              theme="semantic_alignment"),
    Criterion(id="palette", text="color palette feels coherent",
              theme="lighting_color"),
]
request = CriteriaProviderRequest(prompt=prompt, reference_candidates=pool.candidates)
criteria = resolve_criteria(user_criteria, request)
print("resolved criteria:", [c.id for c in criteria])


def mock_provider(req):
    return [
        Criterion(id=f"gen{i}", text=f"generated aspect {i}") for i in range(7)
    ]


print("provider path (7 generated, capped at 5 + overall):",
      [c.id for c in resolve_criteria(None, request, mock_provider)])

# Any scorer with a .score(request) method drives the tournaments; here a
# random linear judge (a trained one serializes/loads the same way). Note a
# linear head adds the criterion text as a constant per tournament, so its
# winners rarely differ across criteria.
import numpy as np

rng = np.random.default_rng(3)
judge = LinearScorer(weights=tuple(rng.normal(size=2 * 8 + 16)), bias=0.0, text_dim=16)

report = pick(pool, criteria, judge, tie_band=0.05)
print("\nper-criterion results (linear judge):")
for cid, standings in report.per_criterion.items():
    table = ", ".join(f"{c}={pts:g}" for c, pts in standings.wins)
    print(f"  {cid:8s} winner={standings.winner}  [{table}]")
print(f"match log has {len(report.match_log)} entries "
      f"({len(criteria)} criteria x C(4,2) pairs)")


# A judge that actually conditions on the criterion produces
# criterion-dependent winners, the case the per-criterion report exists for.
class CriterionAwareJudge:
    """Scores each image by a per-criterion quality table."""

    quality = {
        "subject": {"cand-a": 3, "cand-b": 2, "cand-c": 1, "cand-d": 0},
        "palette": {"cand-a": 0, "cand-b": 1, "cand-c": 2, "cand-d": 3},
        "overall": {"cand-a": 2, "cand-b": 3, "cand-c": 2, "cand-d": 1},
    }

    def score(self, req):
        from critpick.scorers import ScorerOutput

        key = req.condition.criteria[0].id if req.condition.criteria else "overall"
        table = self.quality[key]
        return ScorerOutput.pairwise(
            float(table[req.image_a.id] - table[req.image_b.id])
        )


report = pick(pool, criteria, CriterionAwareJudge(), tie_band=0.0)
print("\nper-criterion results (criterion-aware judge):")
for cid, standings in report.per_criterion.items():
    print(f"  {cid:8s} winner={standings.winner}")
