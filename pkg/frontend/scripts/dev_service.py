"""Start a seeded annotation service for frontend development and tests.

Usage: python3 scripts/dev_service.py [port]

Serves one criteria-formulation task, one pairwise-judgment task, and the
three blind ranking settings of one study prompt, over a throwaway data
directory.
"""

import sys
import tempfile

import uvicorn

from critpick.core import Prompt
from critpick.service import ServiceStore, TaskKind, build_study_tasks, create_app


def seeded_store() -> ServiceStore:
    store = ServiceStore(tempfile.mkdtemp(prefix="critpick-ui-"), lease_minutes=30)
    store.create_run("dev")
    stub = {
        "id": "s1",
        "prompt": {
            "id": "p1",
            "text": "a misty stone bridge at dawn, watercolor, soft light",
            "components": ["core_subjects", "artistic_format"],
            "topic": "nature",
        },
        "image_a": {"id": "s1-a", "source_model": "gen-1",
                    "features": [0.2, 0.4], "uri": None},
        "image_b": {"id": "s1-b", "source_model": "gen-2",
                    "features": [0.1, 0.3], "uri": None},
    }
    store.add_task("dev", "form-1", TaskKind.CRITERIA_FORMULATION, {"sample": stub})
    store.add_task(
        "dev", "judge-1", TaskKind.PAIRWISE_JUDGMENT,
        {
            "sample": stub,
            "criteria": [
                {"id": f"c{i}", "text": f"aspect {i}", "theme": None}
                for i in range(5)
            ],
        },
        votes_needed=3,
    )
    prompt = Prompt(
        id="study-p1",
        text="a misty stone bridge at dawn, watercolor, soft light",
        components=frozenset({"core_subjects", "artistic_format"}),
        topic="nature",
    )
    build_study_tasks(
        store, "dev", prompt,
        selections={
            "ours": {"image_id": "img-1", "uri": None},
            "base1": {"image_id": "img-2", "uri": None},
            "base2": {"image_id": "img-1", "uri": None},  # duplicate pick
            "base3": {"image_id": "img-3", "uri": None},
        },
        subject="ours",
        criteria_texts=["brush texture fidelity", "morning light mood"],
        seed=7,
    )
    return store


if __name__ == "__main__":
    port = int(sys.argv[1]) if len(sys.argv) > 1 else 8080
    uvicorn.run(create_app(seeded_store()), host="127.0.0.1", port=port,
                log_level="warning")
