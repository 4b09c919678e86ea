/**
 * Browser entry point: wires the service client, local draft storage, and
 * the two task views into the page shell in index.html.
 */

import { ServiceClient, type RankingPayload, type FormulationPayload } from "./api.js";
import { renderError, renderFormulation, renderRanking } from "./dom.js";
import { FormulationEditor, type FormulationBody, type FormulationDraft } from "./formulation.js";
import { RankingControl, type RankingDraft } from "./ranking.js";
import { AnnotationSession } from "./session.js";
import { DraftStore } from "./storage.js";

export function bootstrap(root: HTMLElement, baseUrl: string): void {
  const doc = root.ownerDocument;
  const annotatorInput = root.querySelector<HTMLInputElement>("#annotator-id")!;
  const startButton = root.querySelector<HTMLButtonElement>("#start")!;
  const exportButton = root.querySelector<HTMLButtonElement>("#export")!;
  const runInput = root.querySelector<HTMLInputElement>("#run-id")!;
  const taskContainer = root.querySelector<HTMLElement>("#task")!;
  const status = root.querySelector<HTMLElement>("#status")!;

  const client = new ServiceClient(baseUrl);
  let session: AnnotationSession | null = null;

  async function advance(): Promise<void> {
    if (!session) return;
    const task = await session.fetchNext();
    if (!task) {
      status.textContent = "No open tasks. Check back later.";
      taskContainer.replaceChildren();
      return;
    }
    status.textContent = `task ${task.task_id} (${task.kind})`;
    if (task.kind === "study_ranking") {
      showRanking(task.payload as unknown as RankingPayload);
    } else if (task.kind === "criteria_formulation") {
      showFormulation(task.payload as unknown as FormulationPayload);
    } else {
      status.textContent = `task kind ${task.kind} is handled elsewhere`;
    }
  }

  function showRanking(payload: RankingPayload): void {
    const active = session!;
    const control = new RankingControl(payload);
    const saved = active.loadDraft<RankingDraft>();
    if (saved) control.restore(saved);

    const rerender = () =>
      renderRanking(taskContainer, control, active.settingsProgress(payload.prompt_id), {
        onChange: () => active.saveDraft(control.toDraft()),
        onSubmit: () => void submitRanking(),
      });

    async function submitRanking(): Promise<void> {
      const outcome = await active.submit(control.body());
      if (outcome.ok) {
        if (active.canAdvance(payload.prompt_id)) {
          status.textContent = `prompt ${payload.prompt_id} complete`;
        }
        await advance();
      } else if (outcome.retryable) {
        renderError(taskContainer, outcome.message, true, () =>
          void submitRanking(),
        );
      } else {
        renderError(taskContainer, outcome.detail, false);
      }
    }

    rerender();
  }

  function showFormulation(payload: FormulationPayload): void {
    const active = session!;
    const editor = new FormulationEditor(payload);
    const saved = active.loadDraft<FormulationDraft>();
    if (saved) editor.restore(saved);

    async function send(body: FormulationBody): Promise<void> {
      const outcome = await active.submit(body as Record<string, unknown>);
      if (outcome.ok) {
        await advance();
      } else if (outcome.retryable) {
        renderError(taskContainer, outcome.message, true, () => void send(body));
      } else {
        renderError(taskContainer, outcome.detail, false);
      }
    }

    const guarded = (make: () => FormulationBody) => () => {
      try {
        void send(make());
      } catch (error) {
        renderError(taskContainer, String(error), false);
      }
    };

    renderFormulation(taskContainer, editor, {
      onChange: () => active.saveDraft(editor.toDraft()),
      onPropose: guarded(() => editor.proposeBody()),
      onAdd: (text) => guarded(() => editor.addBody(text))(),
      onModify: (id, text) => guarded(() => editor.modifyBody(id, text))(),
      onDelete: (id) => guarded(() => editor.deleteBody(id))(),
      onApprove: guarded(() => editor.approveBody()),
    });
  }

  startButton.addEventListener("click", () => {
    const annotatorId = annotatorInput.value.trim();
    if (!annotatorId) {
      status.textContent = "Enter an annotator id first.";
      return;
    }
    session = new AnnotationSession(
      client,
      new DraftStore(doc.defaultView!.localStorage, annotatorId),
      annotatorId,
    );
    void advance();
  });

  exportButton.addEventListener("click", () => {
    const runId = runInput.value.trim();
    if (!runId || !session) {
      status.textContent = "Enter a run id and start a session first.";
      return;
    }
    session
      .exportRun(runId)
      .then((result) => {
        status.textContent = `export written: ${JSON.stringify(result.files)}`;
      })
      .catch((error) => {
        status.textContent = `export failed: ${error}`;
      });
  });
}

declare global {
  interface Window {
    CRITPICK_SERVICE_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(
    document.getElementById("app")!,
    window.CRITPICK_SERVICE_URL ?? "http://127.0.0.1:8080",
  );
}
