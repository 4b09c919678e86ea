"""The two-stage annotation protocol: criteria formulation by iterative
consensus, then agreement-thresholded label retention.

Run: python3 demos/04_annotation_consensus.py
"""

from critpick.aggregation import (
    ConsensusEvent,
    ConsensusTask,
    EventAction,
    VoteSet,
    apply_event,
    retain_label,
    winning_fraction,
)
from critpick.core import Criterion, PreferenceLabel

# Stage 1: the first annotator proposes five criteria; later annotators
# edit or approve. Three consecutive approvals by distinct annotators
# finalize the draft; any edit resets the run.
task = ConsensusTask(task_id="pair-042")
proposal = tuple(
    Criterion(id=f"c{i}", text=text)
    for i, text in enumerate(
        [
            "text on the sign is readable",
            "lighting matches the golden-hour request",
            "hands have correct anatomy",
            "background depth of field is shallow",
            "watercolor style is consistent",
        ]
    )
)
history = [
    ConsensusEvent("alice", EventAction.PROPOSE, proposal),
    ConsensusEvent("bob", EventAction.APPROVE),
    ConsensusEvent("carol", EventAction.MODIFY,
                   (Criterion(id="c3", text="background stays uncluttered"),)),
    ConsensusEvent("bob", EventAction.APPROVE),
    ConsensusEvent("dave", EventAction.APPROVE),
    ConsensusEvent("erin", EventAction.APPROVE),
]
for event in history:
    task = apply_event(task, event)
    print(f"{event.annotator_id:6s} {event.action.value:8s} "
          f"approvals={task.consecutive_approvals} state={task.state.value}")
print("final criteria:", [c.text for c in task.criteria_draft])

# Stage 2: per-criterion votes are retained only above a strict agreement
# threshold (70% for the dataset, 80% for the benchmark).
votes = VoteSet(
    votes=tuple(
        (f"annotator{i}", PreferenceLabel.A_WINS if i < 8 else PreferenceLabel.B_WINS)
        for i in range(10)
    ),
    context=("pair-042", "c0"),
)
print("\n8-of-10 agreement:", f"{winning_fraction(votes):.0%}")
print("  retained at 0.7:", retain_label(votes, 0.7))
print("  retained at 0.8:", retain_label(votes, 0.8))

split = VoteSet(
    votes=tuple(
        (f"annotator{i}", PreferenceLabel.A_WINS if i % 2 else PreferenceLabel.B_WINS)
        for i in range(10)
    )
)
print("5-of-10 split retained at 0.7:", retain_label(split, 0.7))
