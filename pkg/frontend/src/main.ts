// DOM glue: wires the form, candidate list, plan editor, and draft tabs
// to the /v1 API. At most one mutation is in flight; controls are
// disabled while a request runs.

import { ApiClient, ApiError } from "./api.js";
import { parsePlan, PlanError, renderPlan, type SentencePlan } from "./plan.js";
import {
  renderBadges,
  renderCandidates,
  renderDraftText,
  renderError,
  renderQuery,
} from "./render.js";
import type { Draft, IndexedPaper, SessionSummary } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const abstractInput = el<HTMLTextAreaElement>("abstract");
const keywordsInput = el<HTMLInputElement>("keywords");
const seedInput = el<HTMLInputElement>("seed");
const sendButton = el<HTMLButtonElement>("send");
const sortSelect = el<HTMLSelectElement>("sort");
const planInput = el<HTMLTextAreaElement>("plan-text");
const planApply = el<HTMLButtonElement>("plan-apply");
const planSentences = el<HTMLInputElement>("plan-sentences");
const planWords = el<HTMLInputElement>("plan-words");
const planRows = el<HTMLDivElement>("plan-rows");
const planAddRow = el<HTMLButtonElement>("plan-add-row");
const planInsert = el<HTMLButtonElement>("plan-insert");
const errorArea = el<HTMLDivElement>("errors");
const queryArea = el<HTMLDivElement>("query");
const candidatesArea = el<HTMLDivElement>("candidates");
const draftTabs = el<HTMLDivElement>("draft-tabs");
const draftArea = el<HTMLDivElement>("draft");
const baseUrlInput = el<HTMLInputElement>("base-url");

const api = new ApiClient(localStorage.getItem("litpipe-base-url") ?? "");
baseUrlInput.value = api.baseUrl;
baseUrlInput.addEventListener("change", () => {
  api.baseUrl = baseUrlInput.value.trim().replace(/\/$/, "");
  localStorage.setItem("litpipe-base-url", api.baseUrl);
});

let session: SessionSummary | null = null;
let drafts: Draft[] = [];
let activeDraft = 0;
let inflight = false;

function keywords(): string[] {
  return keywordsInput.value
    .split(",")
    .map((k) => k.trim())
    .filter((k) => k.length > 0);
}

function formIsEmpty(): boolean {
  return !abstractInput.value.trim() && keywords().length === 0 && !seedInput.value.trim();
}

function refreshControls(): void {
  sendButton.disabled = inflight || formIsEmpty();
  sortSelect.disabled = inflight || session === null;
  planApply.disabled = inflight || session === null;
  planInsert.disabled = session === null;
}

for (const input of [abstractInput, keywordsInput, seedInput]) {
  input.addEventListener("input", refreshControls);
}

function showError(error: unknown, planText?: string): void {
  if (error instanceof ApiError) {
    errorArea.innerHTML = renderError(
      {
        code: error.code,
        message: error.message,
        stage: error.stage,
        position: error.position,
        isRateLimit: error.isRateLimit,
      },
      planText,
    );
  } else if (error instanceof PlanError) {
    errorArea.innerHTML = renderError(
      { code: "PlanError", message: error.message, position: error.position },
      planText ?? planInput.value,
    );
  } else {
    errorArea.innerHTML = renderError({ code: "Error", message: String(error) });
  }
}

function clearError(): void {
  errorArea.innerHTML = "";
}

function indexedCandidates(summary: SessionSummary): IndexedPaper[] {
  return summary.candidates.map((paper, i) => ({ ...paper, index: i + 1 }));
}

function renderDrafts(): void {
  const tabs = drafts
    .map((_, i) => {
      const cls = i === activeDraft ? "tab active" : "tab";
      return `<button class="${cls}" data-draft="${i}">Draft ${i + 1}</button>`;
    })
    .join("");
  draftTabs.innerHTML = tabs;
  const draft = drafts[activeDraft];
  if (!draft) {
    draftArea.innerHTML = "";
    return;
  }
  draftArea.innerHTML = renderBadges(draft.compliance) + renderDraftText(draft);
}

draftTabs.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const index = target.dataset.draft;
  if (index !== undefined) {
    activeDraft = parseInt(index, 10);
    renderDrafts();
  }
});

function renderSession(summary: SessionSummary): void {
  session = summary;
  drafts = summary.drafts;
  activeDraft = drafts.length - 1;
  queryArea.innerHTML = renderQuery(summary.query);
  candidatesArea.innerHTML = renderCandidates(indexedCandidates(summary));
  renderDrafts();
  refreshControls();
}

async function mutate<T>(action: () => Promise<T>): Promise<T | undefined> {
  if (inflight) return undefined;
  inflight = true;
  refreshControls();
  clearError();
  try {
    return await action();
  } finally {
    inflight = false;
    refreshControls();
  }
}

sendButton.addEventListener("click", async () => {
  await mutate(async () => {
    try {
      const summary = await api.createSession({
        abstract: abstractInput.value.trim(),
        keywords: keywords(),
        seed_ids: seedInput.value.trim() ? [seedInput.value.trim()] : [],
      });
      renderSession(summary);
    } catch (error) {
      showError(error);
    }
  });
});

errorArea.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.dataset.action === "retry") {
    sendButton.click();
  }
});

sortSelect.addEventListener("change", async () => {
  if (!session) return;
  await mutate(async () => {
    try {
      const view = await api.getPapers(session!.session_id, sortSelect.value);
      candidatesArea.innerHTML = renderCandidates(view.papers);
    } catch (error) {
      showError(error);
    }
  });
});

planApply.addEventListener("click", async () => {
  if (!session) return;
  const planText = planInput.value.trim();
  let parsed: SentencePlan;
  try {
    parsed = parsePlan(planText); // same grammar as the service
  } catch (error) {
    showError(error, planText);
    return;
  }
  void parsed;
  await mutate(async () => {
    try {
      const response = await api.createDraft(session!.session_id, { plan: planText });
      if (response.draft) {
        drafts = [...drafts, response.draft];
        activeDraft = drafts.length - 1;
        renderDrafts();
      }
    } catch (error) {
      showError(error, planText);
    }
  });
});

// --- structured plan editor: serializes to the same grammar ---------------

function addDirectiveRow(line = 1, cites = ""): void {
  const row = document.createElement("div");
  row.className = "plan-row";
  row.innerHTML =
    `<label>line <input type="number" min="1" class="row-line" value="${line}"></label>` +
    `<label>cite <input type="text" class="row-cites" placeholder="1, 3" value="${cites}"></label>` +
    `<button class="row-remove">remove</button>`;
  row.querySelector(".row-remove")!.addEventListener("click", () => row.remove());
  planRows.appendChild(row);
}

planAddRow.addEventListener("click", () => addDirectiveRow());

planInsert.addEventListener("click", () => {
  const plan: SentencePlan = {
    numSentences: parseInt(planSentences.value, 10) || 1,
    numWords: planWords.value ? parseInt(planWords.value, 10) : null,
    directives: [],
  };
  for (const row of planRows.querySelectorAll(".plan-row")) {
    const line = parseInt((row.querySelector(".row-line") as HTMLInputElement).value, 10);
    const cites = (row.querySelector(".row-cites") as HTMLInputElement).value
      .split(",")
      .map((c) => parseInt(c.trim(), 10))
      .filter((c) => Number.isFinite(c) && c >= 1);
    if (Number.isFinite(line) && line >= 1 && cites.length) {
      plan.directives.push({ line, cites });
    }
  }
  planInput.value = renderPlan(plan);
});

addDirectiveRow();
refreshControls();
