// Dependency overlay model. The overlay never invents edges: it filters
// what the service returned, and the per-node view shows exactly the edges
// whose target is the selected node plus the pruned predecessor highlights.

import type { InferResponse, PruneResponse, WireEdge } from "./types.js";

export interface OverlayState {
  mode: "none" | "node" | "global";
  target: string | null;
  edges: WireEdge[];
  highlighted: string[];
}

export function emptyOverlay(): OverlayState {
  return { mode: "none", target: null, edges: [], highlighted: [] };
}

export function overlayForTarget(
  infer: InferResponse,
  prune: PruneResponse,
): OverlayState {
  return {
    mode: "node",
    target: prune.target,
    edges: infer.edges.filter((e) => e.target === prune.target),
    highlighted: [...prune.members],
  };
}

export function overlayForGlobal(infer: InferResponse): OverlayState {
  return {
    mode: "global",
    target: null,
    edges: [...infer.edges],
    highlighted: [],
  };
}

/** Node ids an overlay touches; rendering requires all of them on screen. */
export function overlayNodeIds(overlay: OverlayState): string[] {
  const ids = new Set<string>(overlay.highlighted);
  for (const edge of overlay.edges) {
    ids.add(edge.source);
    ids.add(edge.target);
  }
  return [...ids].sort();
}
