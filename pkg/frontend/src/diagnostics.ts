// Diagnostics panel model: errors sort above warnings, order is otherwise
// preserved, and type-compatibility warnings surface the two dtypes plus
// the conversion hint the engine wrote into the message.

import type { Severity, WireDiagnostic } from "./types.js";

export interface PanelEntry {
  severity: Severity;
  code: string;
  message: string;
  node: string | null;
  entity: string | null;
  /** For W_TYPE_COMPAT: produced and consumed dtypes, in that order. */
  dtypes: [string, string] | null;
  /** For W_TYPE_COMPAT: the conversion clause, e.g. "a widening ... is safe". */
  hint: string | null;
}

const TYPE_PATTERN = /as (\S+) but consumed by .* as (\S+?);/;

function toEntry(diagnostic: WireDiagnostic): PanelEntry {
  let dtypes: [string, string] | null = null;
  let hint: string | null = null;
  if (diagnostic.code === "W_TYPE_COMPAT") {
    const match = TYPE_PATTERN.exec(diagnostic.message);
    if (match) {
      dtypes = [match[1], match[2]];
    }
    const clause = diagnostic.message.split("; ")[1];
    hint = clause ?? null;
  }
  return { ...diagnostic, dtypes, hint };
}

export function buildPanel(diagnostics: WireDiagnostic[]): PanelEntry[] {
  const entries = diagnostics.map(toEntry);
  const rank = (e: PanelEntry) => (e.severity === "error" ? 0 : 1);
  // stable: equal-severity entries keep their response order
  return entries
    .map((entry, i) => ({ entry, i }))
    .sort((a, b) => rank(a.entry) - rank(b.entry) || a.i - b.i)
    .map(({ entry }) => entry);
}
