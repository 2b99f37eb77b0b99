// Workspace view state. Transitions are pure: each returns a new view
// built from a service response, so everything on screen traces back to
// a payload the server actually sent.

import { buildPanel, PanelEntry } from "./diagnostics.js";
import {
  emptyOverlay,
  overlayForGlobal,
  overlayForTarget,
  OverlayState,
} from "./overlay.js";
import type {
  EdgResponse,
  InferResponse,
  PruneResponse,
  UsecaseResponse,
  WireDiagnostic,
} from "./types.js";

export interface WorkspaceView {
  usecases: string[];
  selected: string | null;
  detail: UsecaseResponse | null;
  edg: EdgResponse | null;
  overlay: OverlayState;
  panel: PanelEntry[];
  banner: string | null;
}

export function initialView(): WorkspaceView {
  return {
    usecases: [],
    selected: null,
    detail: null,
    edg: null,
    overlay: emptyOverlay(),
    panel: [],
    banner: null,
  };
}

export function withUsecases(view: WorkspaceView, names: string[]): WorkspaceView {
  const selected =
    view.selected !== null && names.includes(view.selected)
      ? view.selected
      : (names[0] ?? null);
  return { ...view, usecases: [...names], selected, banner: null };
}

/** Loading a use case drops any overlay built for the previous one. */
export function withDetail(
  view: WorkspaceView,
  detail: UsecaseResponse,
  edg: EdgResponse,
): WorkspaceView {
  return {
    ...view,
    selected: detail.usecase.name,
    detail,
    edg,
    overlay: emptyOverlay(),
    panel: [],
    banner: null,
  };
}

export function withNodeInference(
  view: WorkspaceView,
  infer: InferResponse,
  prune: PruneResponse,
): WorkspaceView {
  return {
    ...view,
    overlay: overlayForTarget(infer, prune),
    panel: buildPanel(infer.diagnostics),
  };
}

export function withGlobalInference(
  view: WorkspaceView,
  infer: InferResponse,
): WorkspaceView {
  return { ...view, overlay: overlayForGlobal(infer), panel: buildPanel(infer.diagnostics) };
}

/** A rejected request surfaces its diagnostic but keeps the prior overlay. */
export function withInferenceFailure(
  view: WorkspaceView,
  diagnostic: WireDiagnostic,
): WorkspaceView {
  return { ...view, panel: buildPanel([diagnostic]) };
}

export function withBanner(view: WorkspaceView, message: string): WorkspaceView {
  return { ...view, banner: message };
}

/**
 * Monotonic ticket counter for in-flight requests. Only the most recently
 * issued ticket is current; responses for older tickets must be dropped.
 */
export class RequestSequencer {
  private seq = 0;

  begin(): number {
    return ++this.seq;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.seq;
  }
}
