// Pure view logic for detection payloads. No DOM access so it runs under node tests.

export type SpanCategory = "COL" | "VAL" | "AMB" | "UNK";
export type Verdict = "answerable" | "ambiguous" | "unanswerable";

export interface Candidate {
  kind: "column" | "value";
  text: string;
  column: string;
  score: number;
}

export interface SpanHighlight {
  start: number;
  end: number;
  text: string;
  category: SpanCategory;
  candidates: Candidate[];
}

export interface DetectResponse {
  labels: string[];
  spans: SpanHighlight[];
  verdict: Verdict;
  response: string;
}

export interface TableSchema {
  table_id: string;
  columns: string[];
  cells: Record<string, string[]>;
}

export interface Segment {
  text: string;
  span: SpanHighlight | null;
}

const CATEGORIES: readonly string[] = ["COL", "VAL", "AMB", "UNK"];
const VERDICTS: readonly string[] = ["answerable", "ambiguous", "unanswerable"];

function fail(what: string): never {
  throw new Error(`malformed response: ${what}`);
}

function isObject(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

// Offsets in the payload count Unicode scalar values, so work on code points.
export function codePoints(s: string): string[] {
  return Array.from(s);
}

function parseCandidate(x: unknown): Candidate {
  if (!isObject(x)) fail("candidate is not an object");
  const { kind, text, column, score } = x;
  if (kind !== "column" && kind !== "value") fail("candidate kind");
  if (typeof text !== "string" || typeof column !== "string") fail("candidate text");
  if (typeof score !== "number") fail("candidate score");
  return { kind, text, column, score };
}

/** Checks the shape of a `POST /detect` body against the submitted question. */
export function parseDetectResponse(x: unknown, question: string): DetectResponse {
  if (!isObject(x)) fail("not an object");
  const { labels, spans, verdict, response } = x;
  if (!Array.isArray(labels) || !labels.every((l) => typeof l === "string")) fail("labels");
  if (typeof verdict !== "string" || !VERDICTS.includes(verdict)) fail("verdict");
  if (typeof response !== "string") fail("response");
  if (!Array.isArray(spans)) fail("spans");
  const length = codePoints(question).length;
  const out: SpanHighlight[] = [];
  let previousEnd = 0;
  for (const s of spans) {
    if (!isObject(s)) fail("span is not an object");
    const { start, end, text, category, candidates } = s;
    if (!Number.isInteger(start) || !Number.isInteger(end)) fail("span offsets");
    const [a, b] = [start as number, end as number];
    if (a < previousEnd || a >= b || b > length) fail("span offsets out of range");
    if (typeof text !== "string" || typeof category !== "string" || !CATEGORIES.includes(category)) fail("span category");
    if (!Array.isArray(candidates)) fail("span candidates");
    out.push({ start: a, end: b, text, category: category as SpanCategory, candidates: candidates.map(parseCandidate) });
    previousEnd = b;
  }
  return { labels: labels as string[], spans: out, verdict: verdict as Verdict, response };
}

/** Splits the question into plain and highlighted runs using the payload offsets as given. */
export function segments(question: string, spans: SpanHighlight[]): Segment[] {
  const chars = codePoints(question);
  const out: Segment[] = [];
  let at = 0;
  for (const span of spans) {
    if (span.start > at) out.push({ text: chars.slice(at, span.start).join(""), span: null });
    out.push({ text: chars.slice(span.start, span.end).join(""), span });
    at = span.end;
  }
  if (at < chars.length) out.push({ text: chars.slice(at).join(""), span: null });
  return out;
}

/** Column names offered as chips for an ambiguous span, best first, without repeats. */
export function chipColumns(span: SpanHighlight): string[] {
  if (span.category !== "AMB") return [];
  const seen = new Set<string>();
  const out: string[] = [];
  for (const c of span.candidates) {
    if (!seen.has(c.column)) {
      seen.add(c.column);
      out.push(c.column);
    }
  }
  return out;
}

/** The question with the span replaced by the chosen column name. */
export function applyChip(question: string, span: SpanHighlight, column: string): string {
  const chars = codePoints(question);
  return chars.slice(0, span.start).join("") + column + chars.slice(span.end).join("");
}

/** Column names with up to `limit` sample cell values each. */
export function tablePreview(table: TableSchema, limit = 5): { column: string; samples: string[] }[] {
  return table.columns.map((column) => ({ column, samples: (table.cells?.[column] ?? []).slice(0, limit) }));
}

export function spanClass(category: SpanCategory): string {
  return `span span-${category.toLowerCase()}`;
}
