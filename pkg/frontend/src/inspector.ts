import { escapeHtml } from "./html.js";
import type { CommitOutcome, StatePayload } from "./types.js";

/**
 * The shortage list, each entry shown in the same `runout(...)` form
 * the reasoner cites when it rejects an affected dish.
 */
export function renderShortages(state: StatePayload | null): string {
  if (!state || state.runout.length === 0) {
    return `<p class="placeholder">No shortages.</p>`;
  }
  const items = state.runout
    .map((name) => `<li><code>runout(${escapeHtml(name)})</code></li>`)
    .join("");
  return `<ul class="shortages">${items}</ul>`;
}

function renderCommit(commit: CommitOutcome): string {
  const parts = [
    commit.adds.length ? `${commit.adds.length} add(s)` : "",
    commit.removes.length ? `${commit.removes.length} removal(s)` : "",
    commit.shortage.staged.length ? `${commit.shortage.staged.length} shortage delta(s)` : "",
  ].filter(Boolean);
  const summary = parts.length ? parts.join(", ") : "empty";
  const error = commit.error ? ` <span class="error">${escapeHtml(commit.error)}</span>` : "";
  return `<li><span class="status">${escapeHtml(commit.status)}</span> ${escapeHtml(summary)}${error}</li>`;
}

/** Active sessions and queued menu commits from the shared store. */
export function renderStateSummary(state: StatePayload | null): string {
  if (!state) {
    return `<p class="placeholder">Not connected.</p>`;
  }
  const sessions = state.active_sessions.length
    ? state.active_sessions.map((sid) => `<code>${escapeHtml(sid)}</code>`).join(" ")
    : "none";
  const commits = state.pending_commits.length
    ? `<ul class="commits">${state.pending_commits.map(renderCommit).join("")}</ul>`
    : `<p class="placeholder">No pending commits.</p>`;
  return (
    `<p class="sessions-row">Active sessions: ${sessions}</p>` +
    `<h3>Pending commits</h3>${commits}`
  );
}

export function renderBadges(kbVersion: number, stateVersion: number): string {
  return (
    `<span class="badge">kb v${escapeHtml(kbVersion)}</span>` +
    `<span class="badge">state v${escapeHtml(stateVersion)}</span>`
  );
}
