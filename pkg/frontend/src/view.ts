/**
 * DOM rendering: SVG graph on the left, the two report stages side by
 * side on the right. Rendering is a pure function of the store, so every
 * change just re-renders from state.
 */

import { Metrics, NodeView } from "./api.js";
import { computeLayout, styleFor } from "./layout.js";
import { SessionStore, Toast } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class GraphView {
  constructor(
    private readonly svg: SVGSVGElement,
    private readonly store: SessionStore,
  ) {}

  render(): void {
    const graph = this.store.graph;
    this.svg.replaceChildren();
    if (!graph) return;
    const width = this.svg.clientWidth || 640;
    const height = this.svg.clientHeight || 480;
    const layout = computeLayout(graph.nodes, graph.edges, width, height);

    for (const edge of graph.edges) {
      const a = layout.get(edge.source);
      const b = layout.get(edge.target);
      if (!a || !b) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      line.setAttribute("class", "edge");
      this.svg.appendChild(line);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String((a.x + b.x) / 2));
      label.setAttribute("y", String((a.y + b.y) / 2 - 4));
      label.setAttribute("class", "edge-label");
      label.textContent = edge.relationship_type;
      this.svg.appendChild(label);
    }

    for (const node of graph.nodes) {
      const p = layout.get(node.id);
      if (!p) continue;
      this.svg.appendChild(this.renderNode(node, p.x, p.y));
    }
  }

  private renderNode(node: NodeView, x: number, y: number): SVGGElement {
    const group = document.createElementNS(SVG_NS, "g");
    const classes = ["node"];
    if (node.expanded) classes.push("expanded");
    if (this.store.newlyAdded.has(node.id)) classes.push("new");
    if (this.store.selectedFocus === node.id) classes.push("focus");
    group.setAttribute("class", classes.join(" "));

    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(x));
    circle.setAttribute("cy", String(y));
    circle.setAttribute("r", "14");
    circle.setAttribute("fill", styleFor(node.type).color);
    group.appendChild(circle);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(x));
    label.setAttribute("y", String(y + 28));
    label.setAttribute("class", "node-label");
    label.textContent = node.name;
    group.appendChild(label);

    // click expands scope; shift-click selects the focus entity
    group.addEventListener("click", (event) => {
      if (event.shiftKey) {
        this.store.setFocus(
          this.store.selectedFocus === node.id ? null : node.id,
        );
      } else {
        void this.store.expand(node.id);
      }
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${styleFor(node.type).label}: ${node.name}\n` +
      "click to expand, shift-click to set focus";
    group.appendChild(title);
    return group;
  }
}

export function metricsBadge(metrics: Metrics | undefined, slorMean?: number): string {
  if (!metrics) return "";
  const recall = metrics.recall === null ? "n/a" : metrics.recall.toFixed(3);
  const parts = [`fact recall ${recall}`, `fp ${metrics.fp}`];
  if (slorMean !== undefined) parts.push(`SLOR ${slorMean.toFixed(2)}`);
  return parts.join(" · ");
}

export class ReportView {
  constructor(
    private readonly container: HTMLElement,
    private readonly store: SessionStore,
  ) {}

  render(): void {
    const badge = this.container.querySelector(".metrics-badge")!;
    const templatePane =
      this.container.querySelector<HTMLTextAreaElement>(".template-stage")!;
    const finalPane =
      this.container.querySelector<HTMLTextAreaElement>(".final-stage")!;
    const inlineError = this.container.querySelector(".inline-error")!;

    inlineError.textContent = this.store.validationError ?? "";
    const report = this.store.report;
    if (!report) {
      badge.textContent = "";
      templatePane.value = "";
      finalPane.value = "";
      return;
    }
    badge.textContent = metricsBadge(report.metrics, report.metrics.slor_mean);
    templatePane.value = report.template_text;
    finalPane.value = report.final_text;
  }

  /** Offer the currently displayed final stage as a text download. */
  exportCurrent(): void {
    const report = this.store.report;
    if (!report) return;
    const blob = new Blob([report.final_text], { type: "text/plain" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `${report.report_type}-report.txt`;
    link.click();
    URL.revokeObjectURL(link.href);
  }
}

export function showToast(container: HTMLElement, toast: Toast): void {
  const el = document.createElement("div");
  el.className = `toast ${toast.level}`;
  el.textContent = toast.message;
  container.appendChild(el);
  setTimeout(() => el.remove(), 4000);
}
