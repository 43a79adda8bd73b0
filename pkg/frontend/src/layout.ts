/** Deterministic auto-layout: layered left to right by BFS depth from the
 * states with no incoming edges, following the graph's canonical ordering. */

import type { LayoutPositions, SummaryGraph } from "./api.js";

export const COLUMN_WIDTH = 190;
export const ROW_HEIGHT = 110;
export const MARGIN_X = 60;
export const MARGIN_Y = 50;

export function autoLayout(graph: SummaryGraph): LayoutPositions {
  const names = graph.states.map((s) => s.name);
  const adjacency = new Map<string, string[]>(names.map((n) => [n, []]));
  const hasIncoming = new Set<string>();
  for (const t of graph.transitions) {
    if (!adjacency.has(t.source) || !adjacency.has(t.target)) continue;
    if (t.source !== t.target) {
      adjacency.get(t.source)!.push(t.target);
      hasIncoming.add(t.target);
    }
  }

  const depth = new Map<string, number>();
  const queue: string[] = [];
  const roots = names.filter((n) => !hasIncoming.has(n));
  for (const root of roots.length > 0 ? roots : names.slice(0, 1)) {
    depth.set(root, 0);
    queue.push(root);
  }
  while (queue.length > 0) {
    const node = queue.shift()!;
    for (const next of adjacency.get(node) ?? []) {
      if (!depth.has(next)) {
        depth.set(next, depth.get(node)! + 1);
        queue.push(next);
      }
    }
  }
  // states unreachable from any root (cycle islands) form extra columns,
  // assigned in canonical order so the result stays deterministic
  let overflow = Math.max(-1, ...depth.values()) + 1;
  for (const name of names) {
    if (depth.has(name)) continue;
    depth.set(name, overflow);
    queue.push(name);
    while (queue.length > 0) {
      const node = queue.shift()!;
      for (const next of adjacency.get(node) ?? []) {
        if (!depth.has(next)) {
          depth.set(next, depth.get(node)! + 1);
          queue.push(next);
        }
      }
    }
    overflow = Math.max(...depth.values()) + 1;
  }

  const rowInColumn = new Map<number, number>();
  const positions: LayoutPositions = {};
  for (const name of names) {
    const column = depth.get(name)!;
    const row = rowInColumn.get(column) ?? 0;
    rowInColumn.set(column, row + 1);
    positions[name] = {
      x: MARGIN_X + column * COLUMN_WIDTH,
      y: MARGIN_Y + row * ROW_HEIGHT,
    };
  }
  return positions;
}
