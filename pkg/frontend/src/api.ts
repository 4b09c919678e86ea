/**
 * Typed client for the annotation service wire API.
 *
 * Endpoints: GET /v1/health, GET /v1/tasks/next, POST /v1/tasks/{id}/submit,
 * GET /v1/runs/{id}/progress, POST /v1/runs/{id}/export. The fetch function
 * is injectable so the client runs unchanged in tests.
 */

export type TaskKind =
  | "criteria_formulation"
  | "pairwise_judgment"
  | "study_ranking";

export interface CriterionDoc {
  id: string;
  text: string;
  theme: string | null;
}

export interface FormulationPayload {
  sample: unknown;
  draft: CriterionDoc[];
  draft_version: number;
  state: "formulating" | "finalized";
}

export interface RankingCandidate {
  slot: string;
  uri: string | null;
}

export interface RankingPayload {
  prompt_id: string;
  prompt_text: string;
  setting: "overall" | "single" | "multi";
  criteria_text: string[];
  candidates: RankingCandidate[];
  duplicate_groups: string[][];
}

export interface TaskEnvelope {
  task_id: string;
  run_id: string;
  kind: TaskKind;
  payload: Record<string, unknown>;
  lease_expires_ts: number;
}

export interface SubmitAck {
  task_id: string;
  status: string;
  idempotency_key: string;
}

/** Server-side rejection; `detail` carries the offending field path. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service returned ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** Transport failure (offline, DNS, aborted); submissions stay retryable. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`network failure: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ServiceClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON body; detail stays generic
    }
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body;
  }

  async health(): Promise<boolean> {
    const body = (await this.request("/v1/health")) as { status?: string };
    return body?.status === "ok";
  }

  async nextTask(
    annotator: string,
    kind?: TaskKind,
  ): Promise<TaskEnvelope | null> {
    const params = new URLSearchParams({ annotator });
    if (kind) params.set("kind", kind);
    const body = (await this.request(`/v1/tasks/next?${params}`)) as {
      task: TaskEnvelope | null;
    };
    return body.task;
  }

  async submit(
    annotator: string,
    taskId: string,
    body: Record<string, unknown>,
  ): Promise<SubmitAck> {
    const params = new URLSearchParams({ annotator });
    return (await this.request(
      `/v1/tasks/${encodeURIComponent(taskId)}/submit?${params}`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      },
    )) as SubmitAck;
  }

  async progress(runId: string): Promise<Record<string, unknown>> {
    return (await this.request(
      `/v1/runs/${encodeURIComponent(runId)}/progress`,
    )) as Record<string, unknown>;
  }

  /** Triggers the server-side export; files land in the run's data dir. */
  async exportRun(runId: string): Promise<Record<string, unknown>> {
    return (await this.request(
      `/v1/runs/${encodeURIComponent(runId)}/export`,
      { method: "POST" },
    )) as Record<string, unknown>;
  }
}
