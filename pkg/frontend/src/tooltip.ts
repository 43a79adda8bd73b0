/** Edge tooltip: cited summary excerpts, the grounding cursor, and the
 * Show-in-RFC control. Excerpt text is the served segment text, verbatim. */

import type { GraphTransition, GroundingDto } from "./api.js";
import type { GroundingCursor } from "./state.js";

export interface TooltipCallbacks {
  onPrev(): void;
  onNext(): void;
  onShow(): void;
}

export class Tooltip {
  readonly element: HTMLElement;
  private showUsed = false;
  private cursorLabel: HTMLElement | null = null;
  private showButton: HTMLButtonElement | null = null;

  constructor(readonly root: HTMLElement) {
    this.element = root.ownerDocument.createElement("div");
    this.element.className = "tooltip hidden";
    root.appendChild(this.element);
  }

  get visible(): boolean {
    return !this.element.classList.contains("hidden");
  }

  showFor(
    edge: GraphTransition,
    grounding: GroundingDto,
    cursor: GroundingCursor | null,
    callbacks: TooltipCallbacks,
    at?: { x: number; y: number },
  ): void {
    const doc = this.element.ownerDocument;
    this.element.textContent = "";
    this.showUsed = false;
    this.cursorLabel = null;
    this.showButton = null;

    const header = doc.createElement("div");
    header.className = "tooltip-header";
    header.textContent = `${edge.source} → ${edge.target} on "${edge.event}"`;
    this.element.appendChild(header);

    if (edge.ungrounded) {
      const badge = doc.createElement("span");
      badge.className = "badge-ungrounded";
      badge.textContent = "ungrounded";
      this.element.appendChild(badge);
      if (grounding.reasoning) {
        const reasoning = doc.createElement("p");
        reasoning.className = "tooltip-reasoning";
        reasoning.textContent = grounding.reasoning;
        this.element.appendChild(reasoning);
      }
    }

    for (const segment of grounding.segments) {
      const excerpt = doc.createElement("blockquote");
      excerpt.className = "tooltip-excerpt";
      excerpt.textContent = segment.text;
      this.element.appendChild(excerpt);
    }

    if (!edge.ungrounded && cursor) {
      const controls = doc.createElement("div");
      controls.className = "tooltip-controls";
      if (cursor.total > 1) {
        const prev = doc.createElement("button");
        prev.className = "cursor-prev";
        prev.textContent = "←";
        prev.addEventListener("click", () => callbacks.onPrev());
        controls.appendChild(prev);
      }
      const label = doc.createElement("span");
      label.className = "cursor-label";
      label.textContent = `${cursor.index}/${cursor.total}`;
      controls.appendChild(label);
      this.cursorLabel = label;
      if (cursor.total > 1) {
        const next = doc.createElement("button");
        next.className = "cursor-next";
        next.textContent = "→";
        next.addEventListener("click", () => callbacks.onNext());
        controls.appendChild(next);
      }
      const show = doc.createElement("button");
      show.className = "show-in-rfc";
      show.textContent = "Show in RFC";
      show.addEventListener("click", () => {
        callbacks.onShow();
        this.showUsed = true;
        show.textContent = "Recenter";
      });
      controls.appendChild(show);
      this.showButton = show;
      this.element.appendChild(controls);
    }

    if (at) {
      this.element.style.left = `${at.x + 12}px`;
      this.element.style.top = `${at.y + 12}px`;
    }
    this.element.classList.remove("hidden");
  }

  updateCursor(cursor: GroundingCursor): void {
    if (this.cursorLabel) {
      this.cursorLabel.textContent = `${cursor.index}/${cursor.total}`;
    }
  }

  showButtonLabel(): string | null {
    return this.showButton?.textContent ?? null;
  }

  hide(): void {
    this.element.classList.add("hidden");
    this.element.textContent = "";
    this.showUsed = false;
    this.cursorLabel = null;
    this.showButton = null;
  }
}
