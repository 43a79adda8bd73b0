/** Application controller: builds the page chrome, loads a run, and wires
 * the canvas, tooltip, and RFC panel to the HTTP API. */

import { Api } from "./api.js";
import type { GroundingDto, RunInfo, SummaryGraph } from "./api.js";
import { GraphView } from "./graphView.js";
import { autoLayout } from "./layout.js";
import { RfcPanel } from "./rfcPanel.js";
import { ExplorerStore } from "./state.js";
import { Tooltip } from "./tooltip.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface BootOptions {
  container: HTMLElement;
  apiBase?: string;
  runId?: string;
}

function assertGraphShape(graph: SummaryGraph): void {
  if (!graph || !Array.isArray(graph.states) || !Array.isArray(graph.transitions)) {
    throw new Error("graph payload is missing states or transitions");
  }
  for (const t of graph.transitions) {
    if (typeof t.edge_id !== "string" || !t.edge_id) {
      throw new Error("graph transition lacks an edge id");
    }
  }
}

export class ExplorerApp {
  readonly api: Api;
  readonly store = new ExplorerStore();
  readonly view: GraphView;
  readonly panel: RfcPanel;
  readonly tooltip: Tooltip;
  readonly elements: {
    select: HTMLSelectElement;
    status: HTMLElement;
    unsaved: HTMLElement;
    bulb: HTMLButtonElement;
    save: HTMLButtonElement;
    banner: HTMLElement;
    message: HTMLElement;
    toast: HTMLElement;
    svg: SVGSVGElement;
    panelBox: HTMLElement;
  };
  /** Latest in-flight async chain; tests await this after firing events. */
  pending: Promise<unknown> = Promise.resolve();
  currentGrounding: GroundingDto | null = null;
  private groundingCache = new Map<string, GroundingDto>();
  private lastHighlightedEdge: string | null = null;
  private hideTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(readonly container: HTMLElement, apiBase = "") {
    this.api = new Api(apiBase);
    const doc = container.ownerDocument;
    container.classList.add("explorer");
    container.innerHTML = `
      <header class="toolbar">
        <select id="run-select"></select>
        <span id="run-status" class="status"></span>
        <button id="light-bulb" title="highlight text-sourced edges">&#128161;</button>
        <button id="save-layout">Save layout</button>
        <span id="unsaved" class="unsaved hidden">unsaved layout</span>
      </header>
      <div id="banner" class="banner hidden"></div>
      <div id="message" class="message hidden"></div>
      <main class="split">
        <div id="canvas-wrap" class="canvas-wrap"></div>
        <div id="rfc-panel" class="rfc-panel"></div>
      </main>
      <div id="toast" class="toast hidden"></div>
    `;
    const byId = <T extends Element>(id: string) =>
      container.querySelector(`#${id}`) as unknown as T;
    const canvasWrap = byId<HTMLElement>("canvas-wrap");
    const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    svg.setAttribute("id", "canvas");
    svg.setAttribute("width", "100%");
    svg.setAttribute("height", "100%");
    const defs = doc.createElementNS(SVG_NS, "defs");
    const marker = doc.createElementNS(SVG_NS, "marker");
    marker.setAttribute("id", "arrow");
    marker.setAttribute("markerWidth", "10");
    marker.setAttribute("markerHeight", "10");
    marker.setAttribute("refX", "9");
    marker.setAttribute("refY", "3");
    marker.setAttribute("orient", "auto");
    const tip = doc.createElementNS(SVG_NS, "path");
    tip.setAttribute("d", "M0,0 L9,3 L0,6 Z");
    marker.appendChild(tip);
    defs.appendChild(marker);
    svg.appendChild(defs);
    canvasWrap.appendChild(svg);

    this.elements = {
      select: byId<HTMLSelectElement>("run-select"),
      status: byId<HTMLElement>("run-status"),
      unsaved: byId<HTMLElement>("unsaved"),
      bulb: byId<HTMLButtonElement>("light-bulb"),
      save: byId<HTMLButtonElement>("save-layout"),
      banner: byId<HTMLElement>("banner"),
      message: byId<HTMLElement>("message"),
      toast: byId<HTMLElement>("toast"),
      svg,
      panelBox: byId<HTMLElement>("rfc-panel"),
    };
    this.panel = new RfcPanel(this.elements.panelBox);
    this.tooltip = new Tooltip(container);
    this.view = new GraphView(svg, {
      onEdgeHover: (edgeId, at) => this.hoverEdge(edgeId, at),
      onEdgeLeave: () => this.scheduleHide(),
      onNodeMoved: () => {
        this.store.markUnsaved();
        this.refreshChrome();
      },
      onLabelEdit: (name, at) => this.openLabelEditor(name, at),
    });
    this.tooltip.element.addEventListener("mouseenter", () => this.cancelHide());
    this.tooltip.element.addEventListener("mouseleave", () => this.scheduleHide());

    this.elements.select.addEventListener("change", () => {
      this.pending = this.openRun(this.elements.select.value);
    });
    this.elements.bulb.addEventListener("click", () => {
      const on = this.store.toggleLightBulb();
      this.view.setLightBulb(on);
      this.elements.bulb.classList.toggle("active", on);
    });
    this.elements.save.addEventListener("click", () => {
      this.pending = this.saveLayout();
    });
    svg.addEventListener("wheel", (event) => {
      const e = event as WheelEvent;
      e.preventDefault();
      const factor = e.deltaY < 0 ? 1.1 : 1 / 1.1;
      this.store.state.zoom = Math.min(4, Math.max(0.25, this.store.state.zoom * factor));
      this.applyViewTransform();
    });
  }

  async start(runId?: string): Promise<void> {
    let runs: RunInfo[];
    try {
      runs = await this.api.listRuns();
    } catch (err) {
      this.showBanner(`could not list runs: ${(err as Error).message}`);
      return;
    }
    this.elements.select.textContent = "";
    for (const run of runs) {
      const option = this.container.ownerDocument.createElement("option");
      option.value = run.run_id;
      option.textContent = `${run.rfc_id} (${run.run_id})`;
      this.elements.select.appendChild(option);
    }
    if (runs.length === 0) {
      this.showMessage("no runs available; extract one with the CLI first");
      return;
    }
    const chosen = runId ?? runs[0].run_id;
    this.elements.select.value = chosen;
    await this.openRun(chosen);
  }

  async openRun(runId: string): Promise<void> {
    this.hideBanner();
    this.tooltip.hide();
    this.groundingCache.clear();
    this.currentGrounding = null;
    this.lastHighlightedEdge = null;
    try {
      const { graph, status } = await this.api.getGraph(runId);
      assertGraphShape(graph);
      const text = await this.api.getRfcText(runId);
      const layout = await this.api.getLayout(runId);

      this.store.setGraph(graph, runId);
      this.store.clearUnsaved();
      const positions = { ...autoLayout(graph), ...(layout?.positions ?? {}) };
      const labels = layout?.labels ?? {};
      if (layout?.view) {
        if (typeof layout.view.zoom === "number") this.store.state.zoom = layout.view.zoom;
        if (layout.view.pan) this.store.state.pan = { ...this.store.state.pan, ...layout.view.pan };
      }
      this.panel.setText(text);
      this.view.render(graph, positions, labels);
      this.view.setLightBulb(this.store.state.lightBulb);
      this.applyViewTransform();
      this.elements.status.textContent = status;
      this.elements.status.dataset.status = status;
      if (graph.states.length === 0 && graph.transitions.length === 0) {
        this.showMessage("this run produced an empty graph");
      } else {
        this.hideMessage();
      }
      this.refreshChrome();
    } catch (err) {
      this.showBanner(`could not render run ${runId}: ${(err as Error).message}`);
    }
  }

  hoverEdge(edgeId: string, at?: { x: number; y: number }): Promise<void> {
    this.cancelHide();
    const task = (async () => {
      const runId = this.store.state.runId;
      const edge = this.store.edge(edgeId);
      if (!runId || !edge) return;
      let grounding = this.groundingCache.get(edgeId);
      if (!grounding) {
        grounding = await this.api.getGrounding(runId, edgeId);
        this.groundingCache.set(edgeId, grounding);
      }
      this.store.setHover(edgeId, grounding.spans.length);
      this.currentGrounding = grounding;
      this.tooltip.showFor(edge, grounding, this.store.state.cursor, {
        onPrev: () => this.stepCursor(-1),
        onNext: () => this.stepCursor(1),
        onShow: () => this.showInRfc(),
      }, at);
    })();
    this.pending = task;
    return task;
  }

  /** Highlight every span of the hovered edge and center on the cursor;
   * repeat activations only recenter. */
  showInRfc(): void {
    const grounding = this.currentGrounding;
    const cursor = this.store.state.cursor;
    if (!grounding || !cursor) return;
    if (this.lastHighlightedEdge !== grounding.edge_id) {
      this.panel.highlight(grounding.spans);
      this.lastHighlightedEdge = grounding.edge_id;
    }
    this.panel.centerOn(cursor.index - 1);
  }

  stepCursor(delta: number): void {
    const cursor = this.store.advanceCursor(delta);
    if (!cursor) return;
    this.tooltip.updateCursor(cursor);
    if (this.lastHighlightedEdge === this.store.state.hover) {
      this.panel.centerOn(cursor.index - 1);
    }
  }

  async saveLayout(): Promise<void> {
    const runId = this.store.state.runId;
    if (!runId) return;
    const doc = {
      positions: this.view.currentPositions(),
      labels: this.view.currentLabels(),
      view: { zoom: this.store.state.zoom, pan: { ...this.store.state.pan } },
    };
    try {
      await this.api.putLayout(runId, doc);
      this.store.clearUnsaved();
      this.showToast("layout saved");
    } catch (err) {
      // unsaved flag deliberately retained
      this.showToast(`save failed: ${(err as Error).message}`, true);
    }
    this.refreshChrome();
  }

  private openLabelEditor(name: string, at: { x: number; y: number }): void {
    const doc = this.container.ownerDocument;
    const input = doc.createElement("input");
    input.className = "label-editor";
    input.value = this.view.currentLabels()[name] ?? name;
    input.style.left = `${at.x}px`;
    input.style.top = `${at.y}px`;
    input.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        this.view.setLabel(name, input.value);
        this.store.markUnsaved();
        this.refreshChrome();
        input.remove();
      } else if (event.key === "Escape") {
        input.remove();
      }
    });
    this.container.appendChild(input);
    input.focus();
  }

  private applyViewTransform(): void {
    this.view.setViewTransform(this.store.state.pan, this.store.state.zoom);
  }

  private scheduleHide(): void {
    this.cancelHide();
    this.hideTimer = setTimeout(() => this.tooltip.hide(), 150);
  }

  private cancelHide(): void {
    if (this.hideTimer !== null) {
      clearTimeout(this.hideTimer);
      this.hideTimer = null;
    }
  }

  private refreshChrome(): void {
    this.elements.unsaved.classList.toggle("hidden", !this.store.state.unsavedLayout);
  }

  private showBanner(text: string): void {
    this.elements.banner.textContent = text;
    this.elements.banner.classList.remove("hidden");
  }

  private hideBanner(): void {
    this.elements.banner.classList.add("hidden");
  }

  private showMessage(text: string): void {
    this.elements.message.textContent = text;
    this.elements.message.classList.remove("hidden");
  }

  private hideMessage(): void {
    this.elements.message.classList.add("hidden");
  }

  private showToast(text: string, isError = false): void {
    const toast = this.elements.toast;
    toast.textContent = text;
    toast.classList.toggle("error", isError);
    toast.classList.remove("hidden");
    setTimeout(() => toast.classList.add("hidden"), 2500);
  }
}

export async function boot(options: BootOptions): Promise<ExplorerApp> {
  const app = new ExplorerApp(options.container, options.apiBase ?? "");
  await app.start(options.runId);
  return app;
}
