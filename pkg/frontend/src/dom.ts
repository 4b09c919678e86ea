/**
 * DOM rendering for the two annotation views.
 *
 * Thin layer: all state lives in the editor/control objects, all data
 * validation is repeated server-side. Candidates render as blind slot
 * letters only; nothing in the DOM ever names a model or selector.
 */

import type { FormulationEditor } from "./formulation.js";
import type { RankingControl } from "./ranking.js";
import type { SettingsProgress } from "./storage.js";
import { MAX_RANK, MIN_RANK } from "./ranking.js";

export interface RankingCallbacks {
  onChange(): void;
  onSubmit(): void;
}

export interface FormulationCallbacks {
  onChange(): void;
  onPropose(): void;
  onAdd(text: string): void;
  onModify(criterionId: string, text: string): void;
  onDelete(criterionId: string): void;
  onApprove(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderRanking(
  container: HTMLElement,
  control: RankingControl,
  progress: SettingsProgress,
  callbacks: RankingCallbacks,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  const payload = control.payload;

  const header = el(doc, "div", "task-header");
  header.append(
    el(doc, "h2", "setting", `${payload.setting} ranking`),
    el(doc, "p", "prompt-text", payload.prompt_text),
  );
  if (payload.criteria_text.length > 0) {
    const list = el(doc, "ul", "criteria");
    for (const text of payload.criteria_text) {
      list.append(el(doc, "li", "criterion", text));
    }
    header.append(list);
  }
  container.append(header);

  const settings: Array<keyof SettingsProgress> = ["overall", "single", "multi"];
  const progressBar = el(doc, "div", "settings-progress");
  for (const setting of settings) {
    const chip = el(
      doc,
      "span",
      progress[setting] ? "setting-chip done" : "setting-chip",
      progress[setting] ? `${setting} ✓` : setting,
    );
    progressBar.append(chip);
  }
  container.append(progressBar);

  const grid = el(doc, "div", "candidates");
  for (const slot of control.slots()) {
    const candidate = payload.candidates.find((c) => c.slot === slot)!;
    const card = el(doc, "div", "candidate");
    card.dataset.slot = slot;

    // Blind label: the slot letter is the only identity shown.
    card.append(el(doc, "div", "slot-label", slot));

    const img = el(doc, "img", "candidate-image");
    img.alt = `candidate ${slot}`;
    if (candidate.uri) img.src = candidate.uri;
    // Click to enlarge for close inspection of local detail.
    img.addEventListener("click", () => {
      img.classList.toggle("enlarged");
    });
    card.append(img);

    const select = el(doc, "select", "rank-select");
    select.dataset.slot = slot;
    const blank = el(doc, "option", undefined, "rank…");
    blank.value = "";
    select.append(blank);
    for (let rank = MIN_RANK; rank <= MAX_RANK; rank += 1) {
      const option = el(doc, "option", undefined, String(rank));
      option.value = String(rank);
      select.append(option);
    }
    const currentRank = control.rankOf(slot);
    select.value = currentRank === undefined ? "" : String(currentRank);
    select.addEventListener("change", () => {
      if (select.value === "") {
        control.clearRank(slot);
      } else {
        control.setRank(slot, Number(select.value));
      }
      // Re-sync duplicate group members' selects.
      for (const other of control.duplicatesOf(slot)) {
        const peer = container.querySelector<HTMLSelectElement>(
          `select[data-slot="${other}"]`,
        );
        if (peer) peer.value = select.value;
      }
      submit.disabled = !control.isComplete();
      callbacks.onChange();
    });
    card.append(select);
    grid.append(card);
  }
  container.append(grid);

  const footer = el(doc, "div", "footer");
  const notice = el(
    doc,
    "p",
    "advance-notice",
    "Finish all three ranking settings of this prompt before moving on.",
  );
  footer.append(notice);
  const submit = el(doc, "button", "submit", "Submit ranking");
  submit.disabled = !control.isComplete();
  submit.addEventListener("click", () => callbacks.onSubmit());
  footer.append(submit);
  container.append(footer);
}

export function renderFormulation(
  container: HTMLElement,
  editor: FormulationEditor,
  callbacks: FormulationCallbacks,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const header = el(doc, "div", "task-header");
  header.append(el(doc, "h2", undefined, "Criteria formulation"));
  container.append(header);

  if (editor.readOnly) {
    container.append(
      el(doc, "p", "finalized-note", "Criteria are finalized (read-only)."),
    );
    const list = el(doc, "ul", "criteria readonly");
    for (const criterion of editor.draft) {
      list.append(el(doc, "li", "criterion", criterion.text));
    }
    container.append(list);
    return;
  }

  if (editor.proposalMode) {
    const form = el(doc, "div", "proposal");
    form.append(
      el(doc, "p", undefined, "Propose five fine-grained criteria:"),
    );
    const submit = el(doc, "button", "submit", "Submit proposal");
    editor.slots.forEach((text, index) => {
      const input = el(doc, "input", "criterion-slot");
      input.type = "text";
      input.value = text;
      input.placeholder = `criterion ${index + 1}`;
      input.dataset.slot = String(index);
      input.addEventListener("input", () => {
        editor.setSlotText(index, input.value);
        submit.disabled = !editor.proposalComplete();
        callbacks.onChange();
      });
      form.append(input);
    });
    submit.disabled = !editor.proposalComplete();
    submit.addEventListener("click", () => callbacks.onPropose());
    form.append(submit);
    container.append(form);
    return;
  }

  const list = el(doc, "ul", "criteria editable");
  for (const criterion of editor.draft) {
    const item = el(doc, "li", "criterion");
    item.dataset.criterionId = criterion.id;
    const input = el(doc, "input", "criterion-text");
    input.type = "text";
    input.value = criterion.text;
    const modify = el(doc, "button", "modify", "Save edit");
    modify.addEventListener("click", () =>
      callbacks.onModify(criterion.id, input.value),
    );
    const remove = el(doc, "button", "delete", "Delete");
    remove.addEventListener("click", () => callbacks.onDelete(criterion.id));
    item.append(input, modify, remove);
    list.append(item);
  }
  container.append(list);

  const addRow = el(doc, "div", "add-row");
  const addInput = el(doc, "input", "add-text");
  addInput.type = "text";
  addInput.placeholder = "new criterion";
  const addButton = el(doc, "button", "add", "Add criterion");
  addButton.addEventListener("click", () => callbacks.onAdd(addInput.value));
  addRow.append(addInput, addButton);
  container.append(addRow);

  const approve = el(doc, "button", "approve", "Approve draft");
  approve.addEventListener("click", () => callbacks.onApprove());
  container.append(approve);
}

/** Error banner; shows the server's field-path detail verbatim. */
export function renderError(
  container: HTMLElement,
  message: string,
  retryable: boolean,
  onRetry?: () => void,
): void {
  const doc = container.ownerDocument;
  const existing = container.querySelector(".error-banner");
  if (existing) existing.remove();
  const banner = el(doc, "div", "error-banner", message);
  if (retryable && onRetry) {
    const retry = el(doc, "button", "retry", "Retry submission");
    retry.addEventListener("click", onRetry);
    banner.append(retry);
  }
  container.prepend(banner);
}
