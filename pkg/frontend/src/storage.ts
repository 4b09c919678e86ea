/**
 * Local draft and progress persistence.
 *
 * Incomplete work survives refreshes and accidental navigation: drafts are
 * written on every mutation and cleared only after the server accepts the
 * submission. Backed by any Storage-like object (localStorage in the
 * browser, a stub in tests).
 */

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const DRAFT_PREFIX = "critpick:draft";
const PROGRESS_PREFIX = "critpick:settings";

export interface SettingsProgress {
  overall: boolean;
  single: boolean;
  multi: boolean;
}

export class DraftStore {
  constructor(
    private readonly storage: StorageLike,
    private readonly annotatorId: string,
  ) {}

  private draftKey(taskId: string): string {
    return `${DRAFT_PREFIX}:${this.annotatorId}:${taskId}`;
  }

  private progressKey(promptId: string): string {
    return `${PROGRESS_PREFIX}:${this.annotatorId}:${promptId}`;
  }

  saveDraft(taskId: string, draft: unknown): void {
    this.storage.setItem(this.draftKey(taskId), JSON.stringify(draft));
  }

  loadDraft<T>(taskId: string): T | null {
    const raw = this.storage.getItem(this.draftKey(taskId));
    if (raw === null) return null;
    try {
      return JSON.parse(raw) as T;
    } catch {
      return null; // corrupted drafts are dropped, never fatal
    }
  }

  clearDraft(taskId: string): void {
    this.storage.removeItem(this.draftKey(taskId));
  }

  settingsProgress(promptId: string): SettingsProgress {
    const raw = this.storage.getItem(this.progressKey(promptId));
    if (raw !== null) {
      try {
        return JSON.parse(raw) as SettingsProgress;
      } catch {
        // fall through to a fresh record
      }
    }
    return { overall: false, single: false, multi: false };
  }

  markSettingDone(promptId: string, setting: keyof SettingsProgress): void {
    const progress = this.settingsProgress(promptId);
    progress[setting] = true;
    this.storage.setItem(this.progressKey(promptId), JSON.stringify(progress));
  }

  /** All three ranking settings of the prompt are complete. */
  promptComplete(promptId: string): boolean {
    const progress = this.settingsProgress(promptId);
    return progress.overall && progress.single && progress.multi;
  }
}
