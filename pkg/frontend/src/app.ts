import {
  ConflictError,
  RejectedError,
  UnavailableError,
  fetchQueue,
  fetchStats,
  postDecision,
} from "./api.js";
import { diffTokens, words } from "./diff.js";
import { ReviewState } from "./state.js";
import type { Decision, QueueItem } from "./types.js";

const state = new ReviewState();

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node;
}

function span(className: string, text: string): HTMLSpanElement {
  const node = document.createElement("span");
  node.className = className;
  node.textContent = text;
  return node;
}

function renderDiff(container: HTMLElement, correct: string, contrastive: string): void {
  container.replaceChildren();
  for (const segment of diffTokens(words(correct), words(contrastive))) {
    container.append(span(`tok ${segment.op}`, segment.token), " ");
  }
}

function renderMachineReference(container: HTMLElement, item: QueueItem): void {
  container.replaceChildren();
  const highlighted = new Set(item.machine_highlight);
  words(item.machine_reference).forEach((token, i) => {
    container.append(span(highlighted.has(i) ? "tok highlight" : "tok", token), " ");
  });
}

function renderStats(): void {
  const stats = state.stats;
  el("stats").textContent =
    stats === null
      ? ""
      : `${stats.pending} pending of ${stats.total} records — ` +
        `${state.decidedThisSession} decided this session`;
}

function renderBanner(): void {
  const banner = el("banner");
  if (state.banner === null) {
    banner.hidden = true;
    return;
  }
  banner.hidden = false;
  banner.className = `banner ${state.banner.kind}`;
  banner.replaceChildren(state.banner.message);
  if (state.banner.kind === "offline") {
    const retry = document.createElement("button");
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void refresh());
    banner.append(" ", retry);
  }
}

function render(): void {
  renderBanner();
  renderStats();
  const card = el("card");
  const empty = el("empty");
  const item = state.current();
  if (item === null) {
    card.hidden = true;
    empty.hidden = false;
    el("empty-message").textContent = state.isDrained()
      ? "Queue empty — every record is resolved."
      : "Loading…";
    return;
  }
  card.hidden = false;
  empty.hidden = true;
  el("item-id").textContent = `${item.id} · ${item.error_type} · v${item.version}`;
  el("source").textContent = item.source;
  renderDiff(el("variant-diff"), item.human_correct, item.human_contrastive);
  renderMachineReference(el("machine-ref"), item);
  const corrected = el("corrected") as HTMLTextAreaElement;
  if (corrected.value !== state.correctedText(item.id)) {
    corrected.value = state.correctedText(item.id);
  }
  (el("btn-accept") as HTMLButtonElement).disabled = !state.canSubmit("accept");
  (el("btn-contrastive") as HTMLButtonElement).disabled =
    !state.canSubmit("mark_contrastive");
  (el("btn-drop") as HTMLButtonElement).disabled = !state.canSubmit("drop");
  el("position").textContent = `${state.index + 1} / ${state.items.length}`;
}

async function refresh(): Promise<void> {
  try {
    const [page, stats] = await Promise.all([
      fetchQueue(lastCursor()),
      fetchStats(),
    ]);
    state.loadPage(page);
    state.setStats(stats);
    if (state.banner?.kind === "offline") state.setBanner(null);
  } catch (e) {
    if (e instanceof UnavailableError) {
      state.setBanner({ kind: "offline", message: e.message });
    } else {
      throw e;
    }
  }
  render();
}

function lastCursor(): string {
  const last = state.items[state.items.length - 1];
  return last === undefined ? "" : last.id;
}

function secret(): string {
  return (el("secret") as HTMLInputElement).value;
}

function reviewer(): string {
  return (el("reviewer") as HTMLInputElement).value.trim() || "anonymous";
}

async function decide(decision: Decision): Promise<void> {
  const item = state.current();
  if (item === null || !state.canSubmit(decision)) return;
  const body = {
    id: item.id,
    decision,
    expected_version: item.version,
    reviewer: reviewer(),
    ...(decision === "mark_contrastive"
      ? { manually_derived_correct: state.correctedText(item.id).trim() }
      : {}),
  };
  try {
    await postDecision(body, secret());
    state.completeCurrent();
    if (state.items.length === 0 && state.nextCursor !== null) await refresh();
  } catch (e) {
    if (e instanceof ConflictError) {
      state.applyConflict(item.id, e.currentVersion, e.currentStatus);
    } else if (e instanceof RejectedError) {
      state.setBanner({ kind: "rejected", message: e.message });
    } else if (e instanceof UnavailableError) {
      state.setBanner({ kind: "offline", message: e.message });
    } else {
      throw e;
    }
  }
  render();
}

function bindEvents(): void {
  el("btn-accept").addEventListener("click", () => void decide("accept"));
  el("btn-contrastive").addEventListener("click", () => void decide("mark_contrastive"));
  el("btn-drop").addEventListener("click", () => void decide("drop"));
  el("corrected").addEventListener("input", (event) => {
    const item = state.current();
    if (item !== null) {
      state.setCorrectedText(item.id, (event.target as HTMLTextAreaElement).value);
      render();
    }
  });
  document.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement;
    if (target.tagName === "TEXTAREA" || target.tagName === "INPUT") return;
    switch (event.key) {
      case "a":
        void decide("accept");
        break;
      case "c":
        void decide("mark_contrastive");
        break;
      case "d":
        void decide("drop");
        break;
      case "j":
        state.next();
        render();
        break;
      case "k":
        state.prev();
        render();
        break;
    }
  });
}

bindEvents();
void refresh();
