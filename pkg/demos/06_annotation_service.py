"""The annotation service end to end, in process: seed tasks, collect
judgments and blind study rankings over the wire API, export, and verify
the export replays identically from the event log.

Run: python3 demos/06_annotation_service.py
"""

import json
import tempfile

from fastapi.testclient import TestClient

from critpick.core import Prompt
from critpick.service import ServiceStore, TaskKind, build_study_tasks, create_app

data_dir = tempfile.mkdtemp(prefix="critpick-demo-")
store = ServiceStore(data_dir, lease_minutes=30)
store.create_run("demo")

criteria = [{"id": f"c{i}", "text": f"aspect {i}", "theme": None} for i in range(5)]
for t in range(4):
    store.add_task(
        "demo", f"judge{t}", TaskKind.PAIRWISE_JUDGMENT,
        {
            "sample": {
                "id": f"s{t}",
                "prompt": {"id": f"p{t}", "text": "a paper crane on a desk",
                           "components": ["core_subjects"], "topic": "objects"},
                "image_a": {"id": f"s{t}-a", "source_model": "gen-1",
                            "features": [0.1, 0.2], "uri": None},
                "image_b": {"id": f"s{t}-b", "source_model": "gen-2",
                            "features": [0.3, 0.1], "uri": None},
            },
            "criteria": criteria,
        },
        votes_needed=3,
    )

prompt = Prompt(id="study-p0", text="a paper crane on a desk",
                components=frozenset({"core_subjects"}), topic="objects")
build_study_tasks(
    store, "demo", prompt,
    selections={
        "ours": {"image_id": "best-1", "uri": None},
        "hpsv3": {"image_id": "best-2", "uri": None},
        "pickscore": {"image_id": "best-1", "uri": None},  # same pick as ours
        "imagereward": {"image_id": "best-3", "uri": None},
    },
    subject="ours", criteria_texts=["crease sharpness"], seed=5,
)

client = TestClient(create_app(store))
print("health:", client.get("/v1/health").json())

# Three annotators vote on every judgment task.
for annotator in ("ann1", "ann2", "ann3"):
    while True:
        task = client.get(
            "/v1/tasks/next",
            params={"annotator": annotator, "kind": "pairwise_judgment"},
        ).json()["task"]
        if task is None:
            break
        body = {"criterion_labels": {c["id"]: "A" for c in criteria},
                "overall_label": "A"}
        client.post(f"/v1/tasks/{task['task_id']}/submit",
                    params={"annotator": annotator}, json=body)

# One rater completes the three blind ranking settings of the study prompt.
while True:
    task = client.get(
        "/v1/tasks/next", params={"annotator": "rater1", "kind": "study_ranking"}
    ).json()["task"]
    if task is None:
        break
    payload = task["payload"]
    print(f"ranking task ({payload['setting']}): slots only, duplicates "
          f"{payload['duplicate_groups']}")
    ranks = {"A": 1, "B": 2, "C": 3, "D": 4}
    for group in payload["duplicate_groups"]:
        best = min(ranks[s] for s in group)
        for slot in group:
            ranks[slot] = best
    client.post(f"/v1/tasks/{task['task_id']}/submit",
                params={"annotator": "rater1"}, json={"ranks": ranks})

print("progress:", client.get("/v1/runs/demo/progress").json())

files = store.export("demo")
replayed = ServiceStore(data_dir).export("demo")
print("replay-from-log export identical:", files == replayed)
print("\nretained dataset lines:", files["dataset.jsonl"].count("\n"))
study = json.loads(files["study.json"])
for baseline, counts in study["settings"]["overall"].items():
    print(f"  vs {baseline}: {counts}")
