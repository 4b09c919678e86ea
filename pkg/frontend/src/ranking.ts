/**
 * 4-way blind ranking control.
 *
 * Candidates are shown only as slots A-D in the order the server fixed for
 * the prompt (shared by all three settings, never reordered client-side).
 * Ranks run 1 (best) to 4 (worst), ties are allowed, and slots showing the
 * same underlying image are synchronized automatically: ranking one member
 * of a duplicate group ranks them all. Everything here is re-validated
 * server-side; client checks exist for immediate feedback only.
 */

import type { RankingPayload } from "./api.js";

export const MIN_RANK = 1;
export const MAX_RANK = 4;

export interface RankingDraft {
  ranks: Record<string, number>;
}

export class RankingControl {
  private readonly ranks = new Map<string, number>();
  private readonly slotOrder: string[];
  private readonly groupOf = new Map<string, string[]>();

  constructor(readonly payload: RankingPayload) {
    this.slotOrder = payload.candidates.map((c) => c.slot);
    for (const group of payload.duplicate_groups) {
      for (const slot of group) {
        this.groupOf.set(slot, [...group]);
      }
    }
  }

  /** Display order exactly as served; identical across the prompt's settings. */
  slots(): string[] {
    return [...this.slotOrder];
  }

  duplicatesOf(slot: string): string[] {
    return (this.groupOf.get(slot) ?? [slot]).filter((s) => s !== slot);
  }

  rankOf(slot: string): number | undefined {
    return this.ranks.get(slot);
  }

  /**
   * Assign a rank; duplicate-group members follow automatically.
   * Throws RangeError outside 1..4 - the UI never offers such values, this
   * guards programmatic use.
   */
  setRank(slot: string, rank: number): void {
    if (!this.slotOrder.includes(slot)) {
      throw new RangeError(`unknown slot ${slot}`);
    }
    if (!Number.isInteger(rank) || rank < MIN_RANK || rank > MAX_RANK) {
      throw new RangeError(`rank must be an integer in 1..4, got ${rank}`);
    }
    for (const member of this.groupOf.get(slot) ?? [slot]) {
      this.ranks.set(member, rank);
    }
  }

  clearRank(slot: string): void {
    for (const member of this.groupOf.get(slot) ?? [slot]) {
      this.ranks.delete(member);
    }
  }

  /** Every slot ranked and duplicate groups internally equal. */
  isComplete(): boolean {
    if (!this.slotOrder.every((slot) => this.ranks.has(slot))) return false;
    for (const group of this.payload.duplicate_groups) {
      const values = new Set(group.map((slot) => this.ranks.get(slot)));
      if (values.size > 1) return false;
    }
    return true;
  }

  /** Submission body; the server-accepted record derives from this alone. */
  body(): { ranks: Record<string, number> } {
    if (!this.isComplete()) {
      throw new Error("ranking incomplete: every slot needs a rank");
    }
    const ranks: Record<string, number> = {};
    for (const slot of this.slotOrder) {
      ranks[slot] = this.ranks.get(slot)!;
    }
    return { ranks };
  }

  toDraft(): RankingDraft {
    const ranks: Record<string, number> = {};
    for (const [slot, rank] of this.ranks) {
      ranks[slot] = rank;
    }
    return { ranks };
  }

  restore(draft: RankingDraft): void {
    this.ranks.clear();
    for (const [slot, rank] of Object.entries(draft.ranks)) {
      if (
        this.slotOrder.includes(slot) &&
        Number.isInteger(rank) &&
        rank >= MIN_RANK &&
        rank <= MAX_RANK
      ) {
        this.ranks.set(slot, rank);
      }
    }
  }
}
