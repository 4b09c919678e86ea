/**
 * Criteria-formulation editor.
 *
 * The first annotator proposes exactly five criteria (five slots, all
 * required before submit). Later annotators see the current draft and act
 * on it: add, delete, or modify one entry, or approve the draft as-is.
 * Each action maps 1:1 to a consensus protocol event and carries the draft
 * version it was based on, so stale edits are rejected server-side.
 * Finalized tasks render read-only.
 */

import type { CriterionDoc, FormulationPayload } from "./api.js";

export const PROPOSAL_SIZE = 5;

export type FormulationBody =
  | {
      action: "propose";
      criteria: CriterionDoc[];
      draft_version: number;
    }
  | { action: "add"; criteria: CriterionDoc[]; draft_version: number }
  | { action: "modify"; criteria: CriterionDoc[]; draft_version: number }
  | { action: "delete"; criterion_id: string; draft_version: number }
  | { action: "approve"; draft_version: number };

export interface FormulationDraft {
  slots: string[];
}

export class FormulationEditor {
  /** Proposal slot texts; only meaningful in propose mode. */
  readonly slots: string[];

  constructor(readonly payload: FormulationPayload) {
    this.slots = Array.from({ length: PROPOSAL_SIZE }, () => "");
  }

  get readOnly(): boolean {
    return this.payload.state === "finalized";
  }

  /** No draft yet: this annotator writes the initial five criteria. */
  get proposalMode(): boolean {
    return this.payload.draft.length === 0 && !this.readOnly;
  }

  get draft(): CriterionDoc[] {
    return this.payload.draft;
  }

  private get version(): number {
    return this.payload.draft_version;
  }

  private assertWritable(): void {
    if (this.readOnly) {
      throw new Error("criteria are finalized; no further edits");
    }
  }

  setSlotText(index: number, text: string): void {
    this.assertWritable();
    if (index < 0 || index >= PROPOSAL_SIZE) {
      throw new RangeError(`slot index out of range: ${index}`);
    }
    this.slots[index] = text;
  }

  /** All five slots filled; submit stays disabled until then. */
  proposalComplete(): boolean {
    return this.slots.every((text) => text.trim().length > 0);
  }

  proposeBody(): FormulationBody {
    this.assertWritable();
    if (!this.proposalMode) {
      throw new Error("a proposal already exists for this task");
    }
    if (!this.proposalComplete()) {
      throw new Error(`all ${PROPOSAL_SIZE} criterion slots are required`);
    }
    return {
      action: "propose",
      criteria: this.slots.map((text, i) => ({
        id: `c${i}`,
        text: text.trim(),
        theme: null,
      })),
      draft_version: this.version,
    };
  }

  addBody(text: string): FormulationBody {
    this.assertWritable();
    const trimmed = text.trim();
    if (!trimmed) throw new Error("criterion text must be non-empty");
    const taken = new Set(this.draft.map((c) => c.id));
    let n = this.draft.length;
    while (taken.has(`c${n}`)) n += 1;
    return {
      action: "add",
      criteria: [{ id: `c${n}`, text: trimmed, theme: null }],
      draft_version: this.version,
    };
  }

  modifyBody(criterionId: string, text: string): FormulationBody {
    this.assertWritable();
    const existing = this.draft.find((c) => c.id === criterionId);
    if (!existing) throw new Error(`unknown criterion ${criterionId}`);
    const trimmed = text.trim();
    if (!trimmed) throw new Error("criterion text must be non-empty");
    return {
      action: "modify",
      criteria: [{ id: criterionId, text: trimmed, theme: existing.theme }],
      draft_version: this.version,
    };
  }

  deleteBody(criterionId: string): FormulationBody {
    this.assertWritable();
    if (!this.draft.some((c) => c.id === criterionId)) {
      throw new Error(`unknown criterion ${criterionId}`);
    }
    return {
      action: "delete",
      criterion_id: criterionId,
      draft_version: this.version,
    };
  }

  approveBody(): FormulationBody {
    this.assertWritable();
    return { action: "approve", draft_version: this.version };
  }

  toDraft(): FormulationDraft {
    return { slots: [...this.slots] };
  }

  restore(draft: FormulationDraft): void {
    draft.slots.slice(0, PROPOSAL_SIZE).forEach((text, i) => {
      this.slots[i] = text;
    });
  }
}
