/**
 * Scripted browser tests over the rendered DOM (jsdom): rank bounds, tie
 * entry, duplicate synchronization, fixed candidate order across a
 * prompt's three settings, blind slot labels, and draft survival across a
 * page reload.
 */

import { beforeEach, describe, expect, it, vi } from "vitest";

import type { RankingPayload } from "../src/api.js";
import { renderFormulation, renderRanking } from "../src/dom.js";
import { FormulationEditor } from "../src/formulation.js";
import { RankingControl, type RankingDraft } from "../src/ranking.js";
import { DraftStore, type SettingsProgress } from "../src/storage.js";

const NO_PROGRESS: SettingsProgress = { overall: false, single: false, multi: false };

function payload(
  setting: "overall" | "single" | "multi" = "overall",
  duplicateGroups: string[][] = [],
): RankingPayload {
  return {
    prompt_id: "p1",
    prompt_text: "a misty bridge at dawn, watercolor",
    setting,
    criteria_text: setting === "overall" ? [] : ["brush texture fidelity"],
    candidates: [
      { slot: "A", uri: "blob:a" },
      { slot: "B", uri: "blob:b" },
      { slot: "C", uri: "blob:c" },
      { slot: "D", uri: "blob:d" },
    ],
    duplicate_groups: duplicateGroups,
  };
}

function mount(): HTMLElement {
  const container = document.createElement("div");
  document.body.replaceChildren(container);
  return container;
}

function selectFor(container: HTMLElement, slot: string): HTMLSelectElement {
  return container.querySelector<HTMLSelectElement>(
    `select[data-slot="${slot}"]`,
  )!;
}

function pickRank(container: HTMLElement, slot: string, value: string): void {
  const select = selectFor(container, slot);
  select.value = value;
  select.dispatchEvent(new Event("change", { bubbles: true }));
}

beforeEach(() => localStorage.clear());

describe("ranking view", () => {
  it("offers exactly the ranks 1..4 per candidate", () => {
    const container = mount();
    renderRanking(container, new RankingControl(payload()), NO_PROGRESS, {
      onChange: () => {},
      onSubmit: () => {},
    });
    const selects = container.querySelectorAll("select.rank-select");
    expect(selects).toHaveLength(4);
    for (const select of selects) {
      const values = [...select.querySelectorAll("option")]
        .map((o) => o.value)
        .filter((v) => v !== "");
      expect(values).toEqual(["1", "2", "3", "4"]);
    }
  });

  it("accepts ties entered through the controls", () => {
    const container = mount();
    const control = new RankingControl(payload());
    renderRanking(container, control, NO_PROGRESS, {
      onChange: () => {},
      onSubmit: () => {},
    });
    pickRank(container, "A", "1");
    pickRank(container, "B", "1");
    pickRank(container, "C", "3");
    pickRank(container, "D", "3");
    expect(control.body().ranks).toEqual({ A: 1, B: 1, C: 3, D: 3 });
  });

  it("synchronizes duplicate-image candidates automatically", () => {
    const container = mount();
    const control = new RankingControl(payload("overall", [["B", "C"]]));
    renderRanking(container, control, NO_PROGRESS, {
      onChange: () => {},
      onSubmit: () => {},
    });
    pickRank(container, "B", "2");
    expect(control.rankOf("C")).toBe(2);
    expect(selectFor(container, "C").value).toBe("2");
  });

  it("shows candidates only as blind slot letters, in served order", () => {
    const container = mount();
    const settings: Array<"overall" | "single" | "multi"> = [
      "overall",
      "single",
      "multi",
    ];
    const orders: string[][] = [];
    for (const setting of settings) {
      renderRanking(
        container,
        new RankingControl(payload(setting)),
        NO_PROGRESS,
        { onChange: () => {}, onSubmit: () => {} },
      );
      const labels = [...container.querySelectorAll(".slot-label")].map(
        (n) => n.textContent,
      );
      orders.push(labels as string[]);
    }
    // fixed order across the prompt's three settings
    expect(orders[1]).toEqual(orders[0]);
    expect(orders[2]).toEqual(orders[0]);
    expect(orders[0]).toEqual(["A", "B", "C", "D"]);
    // nothing in the DOM names a model or selector
    const text = container.innerHTML.toLowerCase();
    for (const identity of ["hpsv3", "pickscore", "imagereward", "model", "selector"]) {
      expect(text).not.toContain(identity);
    }
  });

  it("gates submit until every slot is ranked", () => {
    const container = mount();
    const onSubmit = vi.fn();
    renderRanking(container, new RankingControl(payload()), NO_PROGRESS, {
      onChange: () => {},
      onSubmit,
    });
    const submit = container.querySelector<HTMLButtonElement>("button.submit")!;
    expect(submit.disabled).toBe(true);
    for (const [slot, rank] of [["A", "1"], ["B", "2"], ["C", "3"]] as const) {
      pickRank(container, slot, rank);
      expect(submit.disabled).toBe(true);
    }
    pickRank(container, "D", "4");
    expect(submit.disabled).toBe(false);
    submit.click();
    expect(onSubmit).toHaveBeenCalledOnce();
  });

  it("shows the three-settings progress and completion notice", () => {
    const container = mount();
    renderRanking(
      container,
      new RankingControl(payload("multi")),
      { overall: true, single: true, multi: false },
      { onChange: () => {}, onSubmit: () => {} },
    );
    const chips = [...container.querySelectorAll(".setting-chip")];
    expect(chips.map((c) => c.classList.contains("done"))).toEqual([
      true,
      true,
      false,
    ]);
    expect(container.querySelector(".advance-notice")?.textContent).toMatch(
      /all three/i,
    );
  });

  it("click on a candidate image toggles the enlarged view", () => {
    const container = mount();
    renderRanking(container, new RankingControl(payload()), NO_PROGRESS, {
      onChange: () => {},
      onSubmit: () => {},
    });
    const image = container.querySelector<HTMLImageElement>(".candidate-image")!;
    image.click();
    expect(image.classList.contains("enlarged")).toBe(true);
    image.click();
    expect(image.classList.contains("enlarged")).toBe(false);
  });

  it("drafts survive a page reload", () => {
    // First page: rank two candidates, drafts saved on every change.
    let container = mount();
    const store = new DraftStore(localStorage, "ann1");
    const control = new RankingControl(payload());
    renderRanking(container, control, NO_PROGRESS, {
      onChange: () => store.saveDraft("task-1", control.toDraft()),
      onSubmit: () => {},
    });
    pickRank(container, "A", "1");
    pickRank(container, "C", "2");

    // "Reload": fresh DOM, fresh objects, same localStorage.
    container = mount();
    const reloadedStore = new DraftStore(localStorage, "ann1");
    const reloaded = new RankingControl(payload());
    const saved = reloadedStore.loadDraft<RankingDraft>("task-1");
    expect(saved).not.toBeNull();
    reloaded.restore(saved!);
    renderRanking(container, reloaded, NO_PROGRESS, {
      onChange: () => {},
      onSubmit: () => {},
    });
    expect(selectFor(container, "A").value).toBe("1");
    expect(selectFor(container, "C").value).toBe("2");
    expect(selectFor(container, "B").value).toBe("");
  });
});

describe("formulation view", () => {
  it("first annotator sees five required slots and a gated submit", () => {
    const container = mount();
    const editor = new FormulationEditor({
      sample: {},
      draft: [],
      draft_version: 0,
      state: "formulating",
    });
    const onPropose = vi.fn();
    renderFormulation(container, editor, {
      onChange: () => {},
      onPropose,
      onAdd: () => {},
      onModify: () => {},
      onDelete: () => {},
      onApprove: () => {},
    });
    const inputs = container.querySelectorAll<HTMLInputElement>("input.criterion-slot");
    expect(inputs).toHaveLength(5);
    const submit = container.querySelector<HTMLButtonElement>("button.submit")!;
    expect(submit.disabled).toBe(true);
    inputs.forEach((input, i) => {
      input.value = `criterion ${i}`;
      input.dispatchEvent(new Event("input", { bubbles: true }));
    });
    expect(submit.disabled).toBe(false);
    submit.click();
    expect(onPropose).toHaveBeenCalledOnce();
  });

  it("editor view maps buttons to add, modify, delete, approve", () => {
    const container = mount();
    const editor = new FormulationEditor({
      sample: {},
      draft: [{ id: "c0", text: "subject matches", theme: null }],
      draft_version: 1,
      state: "formulating",
    });
    const calls: string[] = [];
    renderFormulation(container, editor, {
      onChange: () => {},
      onPropose: () => calls.push("propose"),
      onAdd: (text) => calls.push(`add:${text}`),
      onModify: (id, text) => calls.push(`modify:${id}:${text}`),
      onDelete: (id) => calls.push(`delete:${id}`),
      onApprove: () => calls.push("approve"),
    });
    const addInput = container.querySelector<HTMLInputElement>("input.add-text")!;
    addInput.value = "color palette";
    container.querySelector<HTMLButtonElement>("button.add")!.click();
    const editInput = container.querySelector<HTMLInputElement>("input.criterion-text")!;
    editInput.value = "subject matches the prompt";
    container.querySelector<HTMLButtonElement>("button.modify")!.click();
    container.querySelector<HTMLButtonElement>("button.delete")!.click();
    container.querySelector<HTMLButtonElement>("button.approve")!.click();
    expect(calls).toEqual([
      "add:color palette",
      "modify:c0:subject matches the prompt",
      "delete:c0",
      "approve",
    ]);
  });

  it("finalized tasks render read-only", () => {
    const container = mount();
    const editor = new FormulationEditor({
      sample: {},
      draft: [{ id: "c0", text: "kept", theme: null }],
      draft_version: 5,
      state: "finalized",
    });
    renderFormulation(container, editor, {
      onChange: () => {},
      onPropose: () => {},
      onAdd: () => {},
      onModify: () => {},
      onDelete: () => {},
      onApprove: () => {},
    });
    expect(container.querySelector(".finalized-note")).not.toBeNull();
    expect(container.querySelector("button")).toBeNull();
    expect(container.querySelector("input")).toBeNull();
  });
});
