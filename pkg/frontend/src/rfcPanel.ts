/** Side panel showing the normalized RFC text with grounded-span highlights.
 * The panel's text content is byte-for-byte the served document, so a
 * highlight is provably the same characters a span addresses. */

import type { SpanDto } from "./api.js";

export class RfcPanel {
  private readonly pre: HTMLPreElement;
  private text = "";
  private marks: HTMLElement[] = [];
  private focusedIndex = -1;

  constructor(readonly container: HTMLElement) {
    this.pre = container.ownerDocument.createElement("pre");
    this.pre.className = "rfc-text";
    container.appendChild(this.pre);
  }

  setText(text: string): void {
    this.text = text;
    this.clearHighlights();
  }

  /** Replace all highlights with the given spans (document order enforced;
   * overlap trimmed so the text is never duplicated). */
  highlight(spans: SpanDto[]): void {
    const doc = this.pre.ownerDocument;
    this.pre.textContent = "";
    this.marks = [];
    this.focusedIndex = -1;
    const ordered = [...spans].sort((a, b) => a.span[0] - b.span[0] || a.span[1] - b.span[1]);
    let cursor = 0;
    for (const span of ordered) {
      const start = Math.max(span.span[0], cursor);
      const end = Math.min(span.span[1], this.text.length);
      if (end <= start) continue;
      if (start > cursor) {
        this.pre.appendChild(doc.createTextNode(this.text.slice(cursor, start)));
      }
      const mark = doc.createElement("mark");
      mark.className = "grounded-span";
      mark.dataset.spanStart = String(start);
      mark.dataset.spanEnd = String(end);
      mark.textContent = this.text.slice(start, end);
      this.pre.appendChild(mark);
      this.marks.push(mark);
      cursor = end;
    }
    if (cursor < this.text.length) {
      this.pre.appendChild(doc.createTextNode(this.text.slice(cursor)));
    }
  }

  clearHighlights(): void {
    this.pre.textContent = this.text;
    this.marks = [];
    this.focusedIndex = -1;
  }

  /** Scroll the panel so the 0-based indexed highlight sits mid-viewport. */
  centerOn(index: number): void {
    if (index < 0 || index >= this.marks.length) return;
    if (this.focusedIndex >= 0) {
      this.marks[this.focusedIndex].classList.remove("focused");
    }
    const mark = this.marks[index];
    mark.classList.add("focused");
    this.focusedIndex = index;
    const target = mark.offsetTop - this.container.clientHeight / 2;
    this.container.scrollTop = Math.max(0, target);
  }

  highlightedTexts(): string[] {
    return this.marks.map((m) => m.textContent ?? "");
  }

  markCount(): number {
    return this.marks.length;
  }

  fullText(): string {
    return this.pre.textContent ?? "";
  }
}
