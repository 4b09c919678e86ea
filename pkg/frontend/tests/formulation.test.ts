import { describe, expect, it } from "vitest";

import type { FormulationPayload } from "../src/api.js";
import { FormulationEditor, PROPOSAL_SIZE } from "../src/formulation.js";

function payload(overrides: Partial<FormulationPayload> = {}): FormulationPayload {
  return {
    sample: {},
    draft: [],
    draft_version: 0,
    state: "formulating",
    ...overrides,
  };
}

function draftedPayload(version = 1): FormulationPayload {
  return payload({
    draft: [
      { id: "c0", text: "subject matches the prompt", theme: null },
      { id: "c1", text: "lighting is coherent", theme: "lighting_color" },
    ],
    draft_version: version,
  });
}

describe("proposal mode", () => {
  it("starts with five empty required slots", () => {
    const editor = new FormulationEditor(payload());
    expect(editor.proposalMode).toBe(true);
    expect(editor.slots).toHaveLength(PROPOSAL_SIZE);
    expect(editor.proposalComplete()).toBe(false);
    expect(() => editor.proposeBody()).toThrow(/5 criterion slots/);
  });

  it("requires every slot before the proposal body builds", () => {
    const editor = new FormulationEditor(payload());
    for (let i = 0; i < PROPOSAL_SIZE - 1; i += 1) {
      editor.setSlotText(i, `criterion ${i}`);
    }
    expect(editor.proposalComplete()).toBe(false);
    editor.setSlotText(PROPOSAL_SIZE - 1, "last criterion");
    expect(editor.proposalComplete()).toBe(true);
    const body = editor.proposeBody();
    expect(body.action).toBe("propose");
    if (body.action === "propose") {
      expect(body.criteria).toHaveLength(5);
      expect(body.draft_version).toBe(0);
    }
  });

  it("whitespace-only slots do not count", () => {
    const editor = new FormulationEditor(payload());
    editor.slots.forEach((_, i) => editor.setSlotText(i, "   "));
    expect(editor.proposalComplete()).toBe(false);
  });

  it("slot drafts survive a save/restore cycle", () => {
    const editor = new FormulationEditor(payload());
    editor.setSlotText(0, "first");
    editor.setSlotText(3, "fourth");
    const restored = new FormulationEditor(payload());
    restored.restore(editor.toDraft());
    expect(restored.slots[0]).toBe("first");
    expect(restored.slots[3]).toBe("fourth");
  });
});

describe("edit mode bodies map 1:1 to protocol events", () => {
  it("add carries one new criterion and the draft version", () => {
    const editor = new FormulationEditor(draftedPayload(4));
    const body = editor.addBody("hands look anatomically right");
    expect(body).toEqual({
      action: "add",
      criteria: [
        { id: "c2", text: "hands look anatomically right", theme: null },
      ],
      draft_version: 4,
    });
  });

  it("modify keeps the criterion id and theme", () => {
    const editor = new FormulationEditor(draftedPayload());
    const body = editor.modifyBody("c1", "lighting matches the brief");
    expect(body).toEqual({
      action: "modify",
      criteria: [
        { id: "c1", text: "lighting matches the brief", theme: "lighting_color" },
      ],
      draft_version: 1,
    });
  });

  it("delete names the criterion id", () => {
    const editor = new FormulationEditor(draftedPayload());
    expect(editor.deleteBody("c0")).toEqual({
      action: "delete",
      criterion_id: "c0",
      draft_version: 1,
    });
  });

  it("approve sends only the version it approves", () => {
    const editor = new FormulationEditor(draftedPayload(7));
    expect(editor.approveBody()).toEqual({ action: "approve", draft_version: 7 });
  });

  it("rejects edits against unknown criteria", () => {
    const editor = new FormulationEditor(draftedPayload());
    expect(() => editor.modifyBody("zz", "text")).toThrow(/unknown/);
    expect(() => editor.deleteBody("zz")).toThrow(/unknown/);
  });

  it("proposing is blocked once a draft exists", () => {
    const editor = new FormulationEditor(draftedPayload());
    expect(editor.proposalMode).toBe(false);
    expect(() => editor.proposeBody()).toThrow(/already exists/);
  });
});

describe("finalized tasks", () => {
  it("are read-only for every action", () => {
    const editor = new FormulationEditor(
      payload({
        draft: [{ id: "c0", text: "kept criterion", theme: null }],
        draft_version: 9,
        state: "finalized",
      }),
    );
    expect(editor.readOnly).toBe(true);
    expect(editor.proposalMode).toBe(false);
    expect(() => editor.addBody("more")).toThrow(/finalized/);
    expect(() => editor.modifyBody("c0", "x")).toThrow(/finalized/);
    expect(() => editor.deleteBody("c0")).toThrow(/finalized/);
    expect(() => editor.approveBody()).toThrow(/finalized/);
    expect(() => editor.setSlotText(0, "x")).toThrow(/finalized/);
  });
});
