/** Typed client for the run-artifact HTTP API. All methods hit /api routes
 * only; the UI never reads artifacts off disk. */

export interface RunInfo {
  run_id: string;
  rfc_id: string;
  status: string;
  generated_at: string;
}

export interface GraphState {
  name: string;
  kind: "normal" | "grouped" | "any" | string;
  members: string[];
  description?: string;
}

export interface SpanDto {
  span: [number, number];
  quote: string;
  match_kind: "exact" | "fuzzy" | string;
  similarity: number;
  segment_id?: string;
}

export interface GraphTransition {
  source: string;
  target: string;
  event: string;
  conditions: string[];
  actions: string[];
  origin: "fsm_section" | "other_text" | "inferred" | "recommended" | string;
  reasoning: string;
  ungrounded: boolean;
  edge_id: string;
  provenance: { segment_id: string; spans: SpanDto[] }[];
}

export interface SummaryGraph {
  rfc_id: string;
  states: GraphState[];
  transitions: GraphTransition[];
  meta?: Record<string, unknown>;
}

export interface GroundingDto {
  edge_id: string;
  source: string;
  target: string;
  event: string;
  origin: string;
  reasoning: string;
  ungrounded: boolean;
  conditions: string[];
  actions: string[];
  spans: SpanDto[];
  provenance: { segment_id: string; spans: SpanDto[] }[];
  segments: { segment_id: string; text: string }[];
}

export interface LayoutPositions {
  [state: string]: { x: number; y: number };
}

export interface LayoutDocument {
  run_id?: string;
  positions: LayoutPositions;
  labels?: Record<string, string>;
  view?: { zoom?: number; pan?: { x: number; y: number } };
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function errorOf(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export class Api {
  constructor(readonly base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async listRuns(): Promise<RunInfo[]> {
    const response = await fetch(this.url("/api/runs"));
    if (!response.ok) throw await errorOf(response);
    return response.json();
  }

  async getGraph(
    runId: string,
  ): Promise<{ graph: SummaryGraph; status: string }> {
    const response = await fetch(this.url(`/api/runs/${runId}/graph`));
    if (!response.ok) throw await errorOf(response);
    const graph = (await response.json()) as SummaryGraph;
    return { graph, status: response.headers.get("X-Run-Status") ?? "" };
  }

  async getRfcText(runId: string): Promise<string> {
    const response = await fetch(this.url(`/api/runs/${runId}/rfc`));
    if (!response.ok) throw await errorOf(response);
    return response.text();
  }

  async getGrounding(runId: string, edgeId: string): Promise<GroundingDto> {
    const response = await fetch(
      this.url(`/api/runs/${runId}/edges/${edgeId}/grounding`),
    );
    if (!response.ok) throw await errorOf(response);
    return response.json();
  }

  /** null when no layout has been saved yet. */
  async getLayout(runId: string): Promise<LayoutDocument | null> {
    const response = await fetch(this.url(`/api/runs/${runId}/layout`));
    if (response.status === 404) return null;
    if (!response.ok) throw await errorOf(response);
    return response.json();
  }

  async putLayout(
    runId: string,
    layout: LayoutDocument,
  ): Promise<LayoutDocument> {
    const response = await fetch(this.url(`/api/runs/${runId}/layout`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(layout),
    });
    if (!response.ok) throw await errorOf(response);
    return response.json();
  }
}
