/** Shared fixture builders for the unit suites. */

import type {
  GraphState,
  GraphTransition,
  GroundingDto,
  SpanDto,
  SummaryGraph,
} from "../src/api.js";

export function state(name: string, kind = "normal", members: string[] = []): GraphState {
  return { name, kind, members };
}

let edgeCounter = 0;

export function edge(partial: Partial<GraphTransition> & {
  source: string;
  target: string;
  event: string;
}): GraphTransition {
  edgeCounter += 1;
  return {
    conditions: [],
    actions: [],
    origin: "fsm_section",
    reasoning: "",
    ungrounded: false,
    edge_id: `e-${edgeCounter.toString(16).padStart(12, "0")}`,
    provenance: [],
    ...partial,
  };
}

export function graph(states: GraphState[], transitions: GraphTransition[]): SummaryGraph {
  return { rfc_id: "RFC9999", states, transitions };
}

export function span(
  start: number,
  end: number,
  quote: string,
  matchKind = "exact",
): SpanDto {
  return { span: [start, end], quote, match_kind: matchKind, similarity: 1.0 };
}

export function grounding(
  e: GraphTransition,
  spans: SpanDto[],
  segments: { segment_id: string; text: string }[],
): GroundingDto {
  return {
    edge_id: e.edge_id,
    source: e.source,
    target: e.target,
    event: e.event,
    origin: e.origin,
    reasoning: e.reasoning,
    ungrounded: e.ungrounded,
    conditions: e.conditions,
    actions: e.actions,
    spans,
    provenance: segments.map((seg) => ({ segment_id: seg.segment_id, spans })),
    segments,
  };
}
