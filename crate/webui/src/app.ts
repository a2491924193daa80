import {
  applyChip,
  chipColumns,
  parseDetectResponse,
  segments,
  spanClass,
  tablePreview,
  type DetectResponse,
  type TableSchema,
  type Verdict,
} from "./render.js";

interface HistoryEntry {
  question: string;
  verdict: Verdict;
}

const state = {
  tables: [] as TableSchema[],
  history: [] as HistoryEntry[],
  pending: false,
};

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function make(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function showError(message: string): void {
  const banner = el("error");
  banner.textContent = message;
  banner.hidden = false;
}

function clearError(): void {
  el("error").hidden = true;
}

function selectedTable(): TableSchema | undefined {
  const id = el<HTMLSelectElement>("table").value;
  return state.tables.find((t) => t.table_id === id);
}

function renderPreview(): void {
  const box = el("preview");
  box.replaceChildren();
  const table = selectedTable();
  if (!table) return;
  for (const { column, samples } of tablePreview(table)) {
    const row = make("div", "preview-row");
    row.append(make("span", "preview-column", column), make("span", "preview-samples", samples.join(", ")));
    box.append(row);
  }
}

function renderHistory(): void {
  const list = el("history");
  list.replaceChildren();
  for (const entry of [...state.history].reverse()) {
    const item = make("li", "");
    item.append(make("span", `badge badge-${entry.verdict}`, entry.verdict), make("span", "history-question", entry.question));
    list.append(item);
  }
}

function renderDetection(question: string, result: DetectResponse): void {
  const input = el<HTMLInputElement>("question");
  const view = el("result");
  view.replaceChildren();

  view.append(make("div", `badge badge-${result.verdict}`, result.verdict));

  const rendered = make("p", "rendered");
  for (const seg of segments(question, result.spans)) {
    if (!seg.span) {
      rendered.append(document.createTextNode(seg.text));
      continue;
    }
    const mark = make("mark", spanClass(seg.span.category), seg.text);
    mark.dataset.start = String(seg.span.start);
    mark.dataset.end = String(seg.span.end);
    mark.title = seg.span.candidates.map((c) => `${c.text} (${c.score.toFixed(2)})`).join("\n") || seg.span.category;
    rendered.append(mark);
  }
  view.append(rendered);

  if (result.response) view.append(make("p", "explanation", result.response));

  for (const span of result.spans) {
    const columns = chipColumns(span);
    if (columns.length === 0) continue;
    const chips = make("div", "chips");
    chips.append(make("span", "chips-label", `"${span.text}" could mean:`));
    for (const column of columns) {
      const chip = make("button", "chip", column) as HTMLButtonElement;
      chip.type = "button";
      chip.addEventListener("click", () => {
        input.value = applyChip(question, span, column);
        input.focus();
      });
      chips.append(chip);
    }
    view.append(chips);
  }
}

async function submit(event: Event): Promise<void> {
  event.preventDefault();
  if (state.pending) return;
  const table = selectedTable();
  const question = el<HTMLInputElement>("question").value;
  if (!table) {
    showError("register a table first (POST /tables or --tables-dir)");
    return;
  }
  const button = el<HTMLButtonElement>("submit");
  state.pending = true;
  button.disabled = true;
  clearError();
  try {
    const reply = await fetch("/detect", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ table_id: table.table_id, question }),
    });
    const body: unknown = await reply.json().catch(() => null);
    if (!reply.ok) {
      const message = body && typeof body === "object" && "error" in body ? String((body as { error: unknown }).error) : reply.statusText;
      throw new Error(message);
    }
    const result = parseDetectResponse(body, question);
    renderDetection(question, result);
    state.history.push({ question, verdict: result.verdict });
    renderHistory();
  } catch (e) {
    showError(e instanceof Error ? e.message : String(e));
  } finally {
    state.pending = false;
    button.disabled = false;
  }
}

async function loadTables(): Promise<void> {
  const reply = await fetch("/tables");
  if (!reply.ok) throw new Error(`GET /tables failed: ${reply.status}`);
  const body = (await reply.json()) as { tables: TableSchema[] };
  state.tables = body.tables;
  const select = el<HTMLSelectElement>("table");
  select.replaceChildren(...state.tables.map((t) => new Option(t.table_id, t.table_id)));
  renderPreview();
}

function main(): void {
  el("form").addEventListener("submit", (e) => void submit(e));
  el("table").addEventListener("change", renderPreview);
  el("reload").addEventListener("click", () => void loadTables().catch((e: Error) => showError(e.message)));
  loadTables().catch((e: Error) => showError(e.message));
}

main();
