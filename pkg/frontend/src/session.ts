/**
 * Annotation session: task flow, draft persistence, and submission.
 *
 * Drafts are saved locally on every change and cleared only when the
 * server accepts the submission; a failed network call keeps the draft and
 * reports the submission as retryable, while a 4xx rejection surfaces the
 * server's field-path detail. Ranking progress is tracked per prompt; the
 * session refuses to advance past a prompt until its three settings
 * (overall, single, multi) are all complete.
 */

import {
  ApiError,
  NetworkError,
  ServiceClient,
  type RankingPayload,
  type TaskEnvelope,
  type TaskKind,
} from "./api.js";
import { DraftStore, type SettingsProgress } from "./storage.js";

export type SubmitOutcome =
  | { ok: true; status: string }
  | { ok: false; retryable: true; message: string }
  | { ok: false; retryable: false; status: number; detail: string };

export class AnnotationSession {
  current: TaskEnvelope | null = null;

  constructor(
    private readonly client: ServiceClient,
    readonly drafts: DraftStore,
    readonly annotatorId: string,
  ) {}

  async fetchNext(kind?: TaskKind): Promise<TaskEnvelope | null> {
    this.current = await this.client.nextTask(this.annotatorId, kind);
    return this.current;
  }

  saveDraft(state: unknown): void {
    if (this.current) {
      this.drafts.saveDraft(this.current.task_id, state);
    }
  }

  loadDraft<T>(): T | null {
    return this.current
      ? this.drafts.loadDraft<T>(this.current.task_id)
      : null;
  }

  /**
   * Submit the body for the current task. The server-side record derives
   * from this body alone; no hidden client state participates.
   */
  async submit(body: Record<string, unknown>): Promise<SubmitOutcome> {
    if (!this.current) {
      return { ok: false, retryable: false, status: 0, detail: "no active task" };
    }
    const task = this.current;
    try {
      const ack = await this.client.submit(this.annotatorId, task.task_id, body);
      this.drafts.clearDraft(task.task_id);
      if (task.kind === "study_ranking") {
        const payload = task.payload as unknown as RankingPayload;
        this.drafts.markSettingDone(payload.prompt_id, payload.setting);
      }
      this.current = null;
      return { ok: true, status: ack.status };
    } catch (error) {
      if (error instanceof NetworkError) {
        // Draft already persisted; the submission can be retried as-is.
        return { ok: false, retryable: true, message: error.message };
      }
      if (error instanceof ApiError) {
        return {
          ok: false,
          retryable: false,
          status: error.status,
          detail: error.detail,
        };
      }
      throw error;
    }
  }

  settingsProgress(promptId: string): SettingsProgress {
    return this.drafts.settingsProgress(promptId);
  }

  /** All three ranking settings of the prompt are done. */
  canAdvance(promptId: string): boolean {
    return this.drafts.promptComplete(promptId);
  }

  exportRun(runId: string): Promise<Record<string, unknown>> {
    return this.client.exportRun(runId);
  }
}
