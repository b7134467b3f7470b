/**
 * Small force-directed layout: spring forces along edges, inverse-square
 * repulsion between all node pairs, centering pull. Deterministic for a
 * given graph because initial positions come from a seeded generator.
 */

import { EdgeView, NodeView } from "./api.js";

export interface Point {
  x: number;
  y: number;
}

export type Layout = Map<string, Point>;

const SPRING_LENGTH = 120;
const SPRING_K = 0.04;
const REPULSION = 2800;
const CENTER_PULL = 0.015;
const STEPS = 200;

/** Mulberry32: tiny deterministic PRNG so layouts are reproducible. */
export function seededRandom(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function computeLayout(
  nodes: NodeView[],
  edges: EdgeView[],
  width: number,
  height: number,
  seed = 1,
): Layout {
  const rand = seededRandom(seed);
  const positions: Layout = new Map();
  const ordered = [...nodes].sort((a, b) => a.id.localeCompare(b.id));
  for (const node of ordered) {
    positions.set(node.id, {
      x: width * (0.2 + 0.6 * rand()),
      y: height * (0.2 + 0.6 * rand()),
    });
  }

  const ids = ordered.map((n) => n.id);
  for (let step = 0; step < STEPS; step += 1) {
    const force = new Map<string, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));

    for (let i = 0; i < ids.length; i += 1) {
      for (let j = i + 1; j < ids.length; j += 1) {
        const a = positions.get(ids[i])!;
        const b = positions.get(ids[j])!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const dist2 = Math.max(dx * dx + dy * dy, 1);
        const push = REPULSION / dist2;
        const dist = Math.sqrt(dist2);
        const fx = (push * dx) / dist;
        const fy = (push * dy) / dist;
        force.get(ids[i])!.x += fx;
        force.get(ids[i])!.y += fy;
        force.get(ids[j])!.x -= fx;
        force.get(ids[j])!.y -= fy;
      }
    }

    for (const edge of edges) {
      const a = positions.get(edge.source);
      const b = positions.get(edge.target);
      if (!a || !b) continue;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const dist = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const pull = SPRING_K * (dist - SPRING_LENGTH);
      force.get(edge.source)!.x += (pull * dx) / dist;
      force.get(edge.source)!.y += (pull * dy) / dist;
      force.get(edge.target)!.x -= (pull * dx) / dist;
      force.get(edge.target)!.y -= (pull * dy) / dist;
    }

    const cooling = 1 - step / STEPS;
    for (const id of ids) {
      const p = positions.get(id)!;
      const f = force.get(id)!;
      f.x += (width / 2 - p.x) * CENTER_PULL;
      f.y += (height / 2 - p.y) * CENTER_PULL;
      p.x += f.x * cooling;
      p.y += f.y * cooling;
      p.x = Math.min(Math.max(p.x, 20), width - 20);
      p.y = Math.min(Math.max(p.y, 20), height - 20);
    }
  }
  return positions;
}

/** Visual idiom per STIX type: color used for node fill, label for legend. */
export const TYPE_STYLES: Record<string, { color: string; label: string }> = {
  "threat-actor": { color: "#c0392b", label: "threat actor" },
  "intrusion-set": { color: "#8e44ad", label: "intrusion set" },
  malware: { color: "#d35400", label: "malware" },
  tool: { color: "#e67e22", label: "tool" },
  "attack-pattern": { color: "#2980b9", label: "attack pattern" },
  campaign: { color: "#16a085", label: "campaign" },
  infrastructure: { color: "#7f8c8d", label: "infrastructure" },
  vulnerability: { color: "#f39c12", label: "vulnerability" },
  "course-of-action": { color: "#27ae60", label: "course of action" },
  identity: { color: "#2c3e50", label: "identity" },
  indicator: { color: "#95a5a6", label: "indicator" },
  "ipv4-addr": { color: "#aab7b8", label: "IPv4 address" },
  "domain-name": { color: "#aab7b8", label: "domain" },
  file: { color: "#aab7b8", label: "file" },
};

export function styleFor(type: string): { color: string; label: string } {
  return TYPE_STYLES[type] ?? { color: "#bdc3c7", label: type };
}
