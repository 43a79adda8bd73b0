/** View state shared by the canvas, tooltip, and RFC panel. */

import type { GraphTransition, SummaryGraph } from "./api.js";

export interface GroundingCursor {
  index: number; // 1-based, always within [1, total]
  total: number;
}

export interface ViewState {
  runId: string | null;
  hover: string | null; // edge id currently under inspection
  cursor: GroundingCursor | null;
  lightBulb: boolean;
  pan: { x: number; y: number };
  zoom: number;
  unsavedLayout: boolean;
}

export function initialViewState(): ViewState {
  return {
    runId: null,
    hover: null,
    cursor: null,
    lightBulb: false,
    pan: { x: 0, y: 0 },
    zoom: 1,
    unsavedLayout: false,
  };
}

/** Holds the loaded graph plus the mutable view state, enforcing the
 * cursor and hover-target invariants at every transition. */
export class ExplorerStore {
  graph: SummaryGraph | null = null;
  readonly state: ViewState = initialViewState();
  private edges = new Map<string, GraphTransition>();

  setGraph(graph: SummaryGraph | null, runId: string | null): void {
    this.graph = graph;
    this.state.runId = runId;
    this.state.hover = null;
    this.state.cursor = null;
    this.edges.clear();
    for (const t of graph?.transitions ?? []) this.edges.set(t.edge_id, t);
  }

  edge(edgeId: string): GraphTransition | undefined {
    return this.edges.get(edgeId);
  }

  /** total is the hovered edge's grounded span count (0 when ungrounded). */
  setHover(edgeId: string | null, total = 0): void {
    if (edgeId === null) {
      this.state.hover = null;
      this.state.cursor = null;
      return;
    }
    if (!this.edges.has(edgeId)) {
      throw new Error(`hover target ${edgeId} is not in the loaded graph`);
    }
    this.state.hover = edgeId;
    this.state.cursor = total > 0 ? { index: 1, total } : null;
  }

  /** Step the grounding cursor, wrapping at both ends. */
  advanceCursor(delta: number): GroundingCursor | null {
    const cursor = this.state.cursor;
    if (!cursor) return null;
    const next = ((cursor.index - 1 + delta) % cursor.total + cursor.total) % cursor.total;
    cursor.index = next + 1;
    return cursor;
  }

  toggleLightBulb(): boolean {
    this.state.lightBulb = !this.state.lightBulb;
    return this.state.lightBulb;
  }

  markUnsaved(): void {
    this.state.unsavedLayout = true;
  }

  clearUnsaved(): void {
    this.state.unsavedLayout = false;
  }
}
