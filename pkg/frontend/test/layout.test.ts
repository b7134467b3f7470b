import { describe, expect, it } from "vitest";

import { computeLayout, seededRandom, styleFor } from "../src/layout.js";
import { metricsBadge } from "../src/view.js";

const NODES = [
  { id: "malware--a", type: "malware", name: "A", expanded: false },
  { id: "threat-actor--b", type: "threat-actor", name: "B", expanded: false },
  { id: "ipv4-addr--c", type: "ipv4-addr", name: "198.51.100.7", expanded: false },
];
const EDGES = [
  { source: "threat-actor--b", relationship_type: "uses", target: "malware--a" },
  { source: "malware--a", relationship_type: "communicates-with", target: "ipv4-addr--c" },
];

describe("seededRandom", () => {
  it("is deterministic for a given seed and uniform-ish in [0, 1)", () => {
    const a = seededRandom(7);
    const b = seededRandom(7);
    for (let i = 0; i < 100; i += 1) {
      const value = a();
      expect(value).toBe(b());
      expect(value).toBeGreaterThanOrEqual(0);
      expect(value).toBeLessThan(1);
    }
  });
});

describe("computeLayout", () => {
  it("places every node inside the viewport", () => {
    const layout = computeLayout(NODES, EDGES, 640, 480);
    expect(layout.size).toBe(NODES.length);
    for (const point of layout.values()) {
      expect(point.x).toBeGreaterThanOrEqual(20);
      expect(point.x).toBeLessThanOrEqual(620);
      expect(point.y).toBeGreaterThanOrEqual(20);
      expect(point.y).toBeLessThanOrEqual(460);
    }
  });

  it("is deterministic regardless of input node order", () => {
    const forward = computeLayout(NODES, EDGES, 640, 480);
    const reversed = computeLayout([...NODES].reverse(), EDGES, 640, 480);
    for (const node of NODES) {
      expect(reversed.get(node.id)).toEqual(forward.get(node.id));
    }
  });

  it("settles edge lengths near the spring rest length", () => {
    const layout = computeLayout(NODES, EDGES, 640, 480);
    for (const edge of EDGES) {
      const a = layout.get(edge.source)!;
      const b = layout.get(edge.target)!;
      const dist = Math.hypot(a.x - b.x, a.y - b.y);
      expect(dist).toBeGreaterThan(40);
      expect(dist).toBeLessThan(300);
    }
  });
});

describe("styleFor", () => {
  it("falls back to a neutral style for unknown types", () => {
    expect(styleFor("malware").color).not.toBe(styleFor("x-custom").color);
    expect(styleFor("x-custom").label).toBe("x-custom");
  });
});

describe("metricsBadge", () => {
  it("formats recall, false positives, and optional SLOR", () => {
    const metrics = { tp: 9, fp: 0, fn: 0, precision: 1, recall: 1, f1: 1 };
    expect(metricsBadge(metrics)).toBe("fact recall 1.000 · fp 0");
    expect(metricsBadge(metrics, 0.6189)).toBe("fact recall 1.000 · fp 0 · SLOR 0.62");
    expect(metricsBadge(undefined)).toBe("");
  });

  it("shows n/a when recall is undefined", () => {
    const metrics = { tp: 0, fp: 0, fn: 0, precision: 1, recall: null, f1: null };
    expect(metricsBadge(metrics)).toBe("fact recall n/a · fp 0");
  });
});
