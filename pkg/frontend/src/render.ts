// SVG renderer. Produces a markup string from a computed layout plus the
// current overlay; the host page injects it and listens for clicks on the
// data-node attributes. Message arrows are straight and solid, returns are
// dashed, dependency overlay edges are curved so the two never blend.

import type { ArrowLayout, DiagramLayout, FragmentLayout, Point } from "./layout.js";
import type { OverlayState } from "./overlay.js";

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&apos;");
}

function classes(base: string, id: string, overlay: OverlayState): string {
  let value = base;
  if (overlay.highlighted.includes(id)) {
    value += " highlighted";
  }
  if (overlay.target === id) {
    value += " selected";
  }
  return value;
}

const DEFS = `<defs>
<marker id="arrow" markerWidth="10" markerHeight="8" refX="9" refY="4" orient="auto"><path d="M0,0 L10,4 L0,8 z" class="arrow-head"/></marker>
<marker id="arrow-open" markerWidth="10" markerHeight="8" refX="9" refY="4" orient="auto"><path d="M0,0 L10,4 L0,8" fill="none" class="arrow-open-head"/></marker>
<marker id="arrow-dep" markerWidth="9" markerHeight="8" refX="8" refY="4" orient="auto"><path d="M0,0 L9,4 L0,8 z" class="dep-head"/></marker>
</defs>`;

function renderLanes(layout: DiagramLayout): string {
  const parts: string[] = ['<g class="lanes">'];
  const bottom = layout.height - 16;
  for (const lane of layout.lanes) {
    parts.push(
      `<line class="lifeline" x1="${lane.x}" y1="64" x2="${lane.x}" y2="${bottom}"/>`,
      `<rect class="participant" x="${lane.x - 54}" y="22" width="108" height="34" rx="4"/>`,
      `<text class="participant-name" x="${lane.x}" y="44" text-anchor="middle">${escapeXml(lane.name)}</text>`,
    );
  }
  parts.push("</g>");
  return parts.join("");
}

function renderInput(layout: DiagramLayout, overlay: OverlayState): string {
  const chip = layout.input;
  const cls = classes("input-chip", "@input", overlay);
  const fields = chip.fields.length ? chip.fields.join(", ") : "(no fields)";
  return (
    `<g class="${cls}" data-node="@input">` +
    `<rect x="${chip.x}" y="${chip.y}" width="${chip.width}" height="${chip.height}" rx="8"/>` +
    `<text x="${chip.x + chip.width / 2}" y="${chip.y + 18}" text-anchor="middle" class="input-title">@input</text>` +
    `<text x="${chip.x + chip.width / 2}" y="${chip.y + 34}" text-anchor="middle" class="input-fields">${escapeXml(fields)}</text>` +
    `</g>`
  );
}

function renderFragment(fragment: FragmentLayout, overlay: OverlayState): string {
  const cls = classes("fragment", fragment.id, overlay);
  let label = `${fragment.kind} ${fragment.id}`;
  if (fragment.tables.length) {
    label += `  [${fragment.tables.join(", ")}]`;
  }
  const parts: string[] = [`<g class="${cls}" data-node="${escapeXml(fragment.id)}">`];
  parts.push(
    `<rect class="fragment-box" x="${fragment.x1}" y="${fragment.y1}" width="${fragment.x2 - fragment.x1}" height="${fragment.y2 - fragment.y1}" rx="6"/>`,
    `<text class="fragment-label" x="${fragment.x1 + 8}" y="${fragment.y1 + 16}">${escapeXml(label)}</text>`,
  );
  for (const divider of fragment.dividers) {
    parts.push(
      `<line class="fragment-divider" x1="${fragment.x1}" y1="${divider.y}" x2="${fragment.x2}" y2="${divider.y}"/>`,
      `<text class="fragment-branch" x="${fragment.x1 + 8}" y="${divider.y - 5}">[${escapeXml(divider.label)}]</text>`,
    );
  }
  parts.push("</g>");
  return parts.join("");
}

function renderArrow(arrow: ArrowLayout, overlay: OverlayState): string {
  const cls = classes(`node-arrow ${arrow.shape}`, arrow.id, overlay);
  const parts: string[] = [`<g class="${cls}" data-node="${escapeXml(arrow.id)}">`];
  const labelX = (arrow.x1 + arrow.x2) / 2;
  if (arrow.shape === "message" && arrow.x1 === arrow.x2) {
    // self call: short loop out to the right
    const d = `M${arrow.x1},${arrow.y - 8} h46 v16 h-46`;
    parts.push(`<path class="message-line" d="${d}" fill="none" marker-end="url(#arrow)"/>`);
    parts.push(
      `<text class="arrow-label" x="${arrow.x1 + 52}" y="${arrow.y - 12}">${escapeXml(arrow.label)}</text>`,
    );
  } else if (arrow.shape === "message") {
    parts.push(
      `<line class="message-line" x1="${arrow.x1}" y1="${arrow.y}" x2="${arrow.x2}" y2="${arrow.y}" marker-end="url(#arrow)"/>`,
      `<text class="arrow-label" x="${labelX}" y="${arrow.y - 8}" text-anchor="middle">${escapeXml(arrow.label)}</text>`,
    );
  } else {
    parts.push(
      `<line class="return-line" x1="${arrow.x1}" y1="${arrow.y}" x2="${arrow.x2}" y2="${arrow.y}" marker-end="url(#arrow-open)"/>`,
      `<text class="arrow-label" x="${labelX}" y="${arrow.y - 8}" text-anchor="middle">${escapeXml(arrow.label)}</text>`,
    );
  }
  if (arrow.shape === "message" && arrow.tables.length) {
    parts.push(
      `<text class="table-badge" x="${labelX}" y="${arrow.y + 16}" text-anchor="middle">tables: ${escapeXml(arrow.tables.join(", "))}</text>`,
    );
  }
  parts.push("</g>");
  return parts.join("");
}

function depPath(from: Point, to: Point): string {
  // bow out to the left so overlay edges never sit on a message line
  const bend = Math.min(from.x, to.x) - 70;
  return `M${from.x},${from.y} C${bend},${from.y} ${bend},${to.y} ${to.x - 6},${to.y}`;
}

function renderOverlay(layout: DiagramLayout, overlay: OverlayState): string {
  const parts: string[] = ['<g class="overlay">'];
  for (const edge of overlay.edges) {
    const from = layout.anchors[edge.source];
    const to = layout.anchors[edge.target];
    if (!from || !to) {
      continue; // stale overlay for another diagram; skip rather than draw junk
    }
    const midY = (from.y + to.y) / 2;
    const bend = Math.min(from.x, to.x) - 70;
    parts.push(
      `<path class="dep dep-${escapeXml(edge.category)}" d="${depPath(from, to)}" fill="none" marker-end="url(#arrow-dep)"/>`,
      `<text class="dep-label" x="${bend + 6}" y="${midY - 4}">${escapeXml(edge.data)}</text>`,
    );
  }
  parts.push("</g>");
  return parts.join("");
}

export function renderDiagramSvg(layout: DiagramLayout, overlay: OverlayState): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" height="${layout.height}" viewBox="0 0 ${layout.width} ${layout.height}" class="diagram">`,
    DEFS,
    renderLanes(layout),
  ];
  for (const fragment of layout.fragments) {
    parts.push(renderFragment(fragment, overlay));
  }
  for (const arrow of layout.arrows) {
    parts.push(renderArrow(arrow, overlay));
  }
  parts.push(renderInput(layout, overlay));
  parts.push(renderOverlay(layout, overlay));
  parts.push("</svg>");
  return parts.join("\n");
}
