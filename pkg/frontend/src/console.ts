import { escapeHtml } from "./html.js";
import type { RoundReply } from "./types.js";

/**
 * One item in a console's message list, in transcript order.
 * Entries are kept as data (not markup) so the trace toggle can
 * re-render the same history with traces shown or hidden.
 */
export type ConsoleEntry =
  | { kind: "greeting"; text: string }
  | { kind: "user"; text: string }
  | { kind: "round"; round: RoundReply }
  | { kind: "notice"; text: string };

export function renderTimingChip(round: RoundReply): string {
  const t = round.timing;
  const detail =
    `parse ${t.parse_ms.toFixed(2)} ms, reasoning ${t.reasoning_ms.toFixed(2)} ms, ` +
    `generate ${t.generate_ms.toFixed(2)} ms`;
  return `<span class="chip" title="${escapeHtml(detail)}">${escapeHtml(t.total_ms.toFixed(1))} ms</span>`;
}

/** Frames and predicates exactly as the API reported them. */
export function renderTrace(round: RoundReply): string {
  return (
    `<div class="trace">` +
    `<div class="trace-row"><span class="trace-label">frames</span>` +
    `<code>${escapeHtml(round.frames)}</code></div>` +
    `<div class="trace-row"><span class="trace-label">predicates</span>` +
    `<code>${escapeHtml(round.predicates)}</code></div>` +
    `</div>`
  );
}

export function renderEntry(entry: ConsoleEntry, showTraces: boolean): string {
  switch (entry.kind) {
    case "greeting":
      return `<div class="msg bot greeting">${escapeHtml(entry.text)}</div>`;
    case "user":
      return `<div class="msg user">${escapeHtml(entry.text)}</div>`;
    case "notice":
      return `<div class="msg notice">${escapeHtml(entry.text)}</div>`;
    case "round": {
      const trace = showTraces ? renderTrace(entry.round) : "";
      return (
        `<div class="msg bot">${escapeHtml(entry.round.reply)}` +
        `${renderTimingChip(entry.round)}${trace}</div>`
      );
    }
  }
}

/** The whole message list, in the order the entries were appended. */
export function renderMessages(entries: readonly ConsoleEntry[], showTraces: boolean): string {
  return entries.map((entry) => renderEntry(entry, showTraces)).join("\n");
}
