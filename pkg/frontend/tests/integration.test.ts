/**
 * End-to-end conformance against the real backend: spawns the Python
 * annotation service and drives the client modules through the wire API
 * only. Requires python3 with the critpick package installed; the suite
 * skips itself if the service cannot start.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, ServiceClient, type RankingPayload, type FormulationPayload } from "../src/api.js";
import { FormulationEditor } from "../src/formulation.js";
import { RankingControl } from "../src/ranking.js";

const PORT = 8137;
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess | null = null;
let available = false;

async function waitForHealth(client: ServiceClient): Promise<boolean> {
  for (let attempt = 0; attempt < 50; attempt += 1) {
    try {
      if (await client.health()) return true;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 200));
    }
  }
  return false;
}

beforeAll(async () => {
  const python = process.env.PYTHON ?? "python3";
  // vitest runs with the package root as cwd; scripts/ sits next to it.
  service = spawn(python, ["scripts/dev_service.py", String(PORT)], {
    cwd: process.cwd(),
    stdio: "ignore",
    env: process.env,
  });
  available = await waitForHealth(new ServiceClient(BASE));
}, 20_000);

afterAll(() => {
  service?.kill();
});

describe.sequential("live service conformance", () => {
  it("starts the backend", () => {
    expect(available).toBe(true);
  });

  it("completes a proposal through the formulation editor", async () => {
    if (!available) return;
    const client = new ServiceClient(BASE);
    const task = await client.nextTask("ui-ann1", "criteria_formulation");
    expect(task?.kind).toBe("criteria_formulation");
    const editor = new FormulationEditor(
      task!.payload as unknown as FormulationPayload,
    );
    expect(editor.proposalMode).toBe(true);
    editor.slots.forEach((_, i) =>
      editor.setSlotText(i, `fine-grained aspect ${i}`),
    );
    const ack = await client.submit(
      "ui-ann1",
      task!.task_id,
      editor.proposeBody() as unknown as Record<string, unknown>,
    );
    expect(ack.status).toBe("open"); // waiting for approvals
  });

  it("the proposer is not offered their own draft to approve", async () => {
    if (!available) return;
    const client = new ServiceClient(BASE);
    const again = await client.nextTask("ui-ann1", "criteria_formulation");
    expect(again).toBeNull();
  });

  it("rejects an out-of-bounds rank server-side with a field path", async () => {
    if (!available) return;
    const client = new ServiceClient(BASE);
    const task = await client.nextTask("ui-rater1", "study_ranking");
    expect(task).not.toBeNull();
    let caught: ApiError | null = null;
    try {
      await client.submit("ui-rater1", task!.task_id, {
        ranks: { A: 1, B: 2, C: 3, D: 5 },
      });
    } catch (error) {
      caught = error as ApiError;
    }
    expect(caught).toBeInstanceOf(ApiError);
    expect(caught!.status).toBe(422);
    expect(caught!.detail).toContain("rank");
  });

  let lastAccepted: { taskId: string; body: Record<string, unknown> } | null =
    null;

  it("serves the three settings with identical blind candidate order", async () => {
    if (!available) return;
    const client = new ServiceClient(BASE);
    const orders: string[][] = [];
    for (let i = 0; i < 3; i += 1) {
      // The first iteration resumes the task still leased to this rater
      // after the rejected out-of-bounds submission above.
      const task = await client.nextTask("ui-rater1", "study_ranking");
      expect(task).not.toBeNull();
      const payload = task!.payload as unknown as RankingPayload;
      expect(payload).not.toHaveProperty("slot_selectors");
      const control = new RankingControl(payload);
      orders.push(control.slots());
      // rank respecting duplicate groups, then submit
      control.setRank("A", 1);
      control.setRank("B", 2);
      control.setRank("C", 3);
      control.setRank("D", 4);
      for (const group of payload.duplicate_groups) {
        control.setRank(group[0]!, 2);
      }
      const body = control.body();
      const ack = await client.submit("ui-rater1", task!.task_id, body);
      expect(ack.status).toBe("done");
      lastAccepted = { taskId: task!.task_id, body };
    }
    expect(orders[1]).toEqual(orders[0]);
    expect(orders[2]).toEqual(orders[0]);
  });

  it("rejects a duplicate submission idempotently", async () => {
    if (!available) return;
    expect(lastAccepted).not.toBeNull();
    const client = new ServiceClient(BASE);
    let caught: ApiError | null = null;
    try {
      await client.submit("ui-rater1", lastAccepted!.taskId, lastAccepted!.body);
    } catch (error) {
      caught = error as ApiError;
    }
    expect(caught).toBeInstanceOf(ApiError);
    expect(caught!.status).toBe(409);
    expect(caught!.detail).toContain("duplicate");
  });

  it("export endpoint writes the canonical files", async () => {
    if (!available) return;
    const client = new ServiceClient(BASE);
    const result = await client.exportRun("dev");
    expect(result.files).toContain("dataset.jsonl");
    expect(result.files).toContain("study.json");
  });
});
