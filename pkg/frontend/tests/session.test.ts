import { beforeEach, describe, expect, it } from "vitest";

import { ServiceClient, type TaskEnvelope } from "../src/api.js";
import { AnnotationSession } from "../src/session.js";
import { DraftStore } from "../src/storage.js";

interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function rankingTask(setting: "overall" | "single" | "multi"): TaskEnvelope {
  return {
    task_id: `study-p1-${setting}`,
    run_id: "run1",
    kind: "study_ranking",
    payload: {
      prompt_id: "p1",
      prompt_text: "a paper crane",
      setting,
      criteria_text: [],
      candidates: [
        { slot: "A", uri: null },
        { slot: "B", uri: null },
        { slot: "C", uri: null },
        { slot: "D", uri: null },
      ],
      duplicate_groups: [],
    },
    lease_expires_ts: 9999,
  };
}

function makeHarness(queue: TaskEnvelope[], submitStatus = 200, detail = "") {
  const requests: RecordedRequest[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    requests.push({
      url,
      method,
      body: init?.body ? JSON.parse(String(init.body)) : null,
    });
    if (url.includes("/v1/tasks/next")) {
      return jsonResponse(200, { task: queue.shift() ?? null });
    }
    if (url.includes("/submit")) {
      if (submitStatus !== 200) {
        return jsonResponse(submitStatus, { detail });
      }
      return jsonResponse(200, {
        task_id: "t",
        status: "done",
        idempotency_key: "k",
      });
    }
    if (url.includes("/export")) {
      return jsonResponse(200, { files: ["dataset.jsonl"], bytes: {} });
    }
    return jsonResponse(404, { detail: "no route" });
  };
  const client = new ServiceClient("http://svc", fetchFn);
  const session = new AnnotationSession(
    client,
    new DraftStore(localStorage, "ann1"),
    "ann1",
  );
  return { session, requests };
}

beforeEach(() => localStorage.clear());

describe("task flow", () => {
  it("fetches the next task with annotator and kind", async () => {
    const { session, requests } = makeHarness([rankingTask("overall")]);
    const task = await session.fetchNext("study_ranking");
    expect(task?.task_id).toBe("study-p1-overall");
    expect(requests[0]!.url).toContain("annotator=ann1");
    expect(requests[0]!.url).toContain("kind=study_ranking");
  });

  it("a successful submit clears the draft and marks the setting done", async () => {
    const { session } = makeHarness([rankingTask("overall")]);
    await session.fetchNext();
    session.saveDraft({ ranks: { A: 1 } });
    const outcome = await session.submit({ ranks: { A: 1, B: 2, C: 3, D: 4 } });
    expect(outcome.ok).toBe(true);
    expect(session.drafts.loadDraft("study-p1-overall")).toBeNull();
    expect(session.settingsProgress("p1").overall).toBe(true);
  });

  it("the accepted record derives from the submitted body alone", async () => {
    const { session, requests } = makeHarness([rankingTask("single")]);
    await session.fetchNext();
    const body = { ranks: { A: 1, B: 1, C: 2, D: 3 } };
    await session.submit(body);
    const submit = requests.find((r) => r.url.includes("/submit"))!;
    expect(submit.method).toBe("POST");
    expect(submit.body).toEqual(body); // nothing hidden rides along
    expect(submit.url).toContain("annotator=ann1");
  });
});

describe("failure handling", () => {
  it("network failure keeps the draft and reports retryable", async () => {
    const failingFetch = async (): Promise<Response> => {
      throw new TypeError("fetch failed");
    };
    const client = new ServiceClient("http://svc", async (url, init) => {
      if (url.includes("/v1/tasks/next")) {
        return jsonResponse(200, { task: rankingTask("overall") });
      }
      return failingFetch();
    });
    const session = new AnnotationSession(
      client,
      new DraftStore(localStorage, "ann1"),
      "ann1",
    );
    await session.fetchNext();
    session.saveDraft({ ranks: { A: 1 } });
    const outcome = await session.submit({ ranks: { A: 1, B: 2, C: 3, D: 4 } });
    expect(outcome.ok).toBe(false);
    if (!outcome.ok) expect(outcome.retryable).toBe(true);
    expect(session.drafts.loadDraft("study-p1-overall")).toEqual({
      ranks: { A: 1 },
    });
    expect(session.current).not.toBeNull(); // still on the same task
  });

  it("server rejection surfaces the field path and is not retryable", async () => {
    const { session } = makeHarness(
      [rankingTask("overall")],
      422,
      "ranks.D: rank for 'D' must be in 1..4, got 5",
    );
    await session.fetchNext();
    const outcome = await session.submit({ ranks: { A: 1, B: 2, C: 3, D: 5 } });
    expect(outcome.ok).toBe(false);
    if (!outcome.ok && !outcome.retryable) {
      expect(outcome.status).toBe(422);
      expect(outcome.detail).toContain("ranks.D");
    }
  });

  it("conflicts (duplicate submissions) surface as non-retryable", async () => {
    const { session } = makeHarness(
      [rankingTask("overall")],
      409,
      "duplicate submission for task 'study-p1-overall' by 'ann1'",
    );
    await session.fetchNext();
    const outcome = await session.submit({ ranks: { A: 1, B: 2, C: 3, D: 4 } });
    expect(outcome.ok).toBe(false);
    if (!outcome.ok && !outcome.retryable) {
      expect(outcome.status).toBe(409);
    }
  });
});

describe("three-setting completion gate", () => {
  it("canAdvance only after overall, single, and multi are submitted", async () => {
    const { session } = makeHarness([
      rankingTask("overall"),
      rankingTask("single"),
      rankingTask("multi"),
    ]);
    const body = { ranks: { A: 1, B: 2, C: 3, D: 4 } };
    for (const expected of [false, false, true]) {
      await session.fetchNext();
      await session.submit(body);
      expect(session.canAdvance("p1")).toBe(expected);
    }
  });
});

describe("export", () => {
  it("delegates to the service export endpoint", async () => {
    const { session, requests } = makeHarness([]);
    const result = await session.exportRun("run1");
    expect(result.files).toEqual(["dataset.jsonl"]);
    const request = requests.find((r) => r.url.includes("/export"))!;
    expect(request.method).toBe("POST");
    expect(request.url).toContain("/v1/runs/run1/export");
  });
});
