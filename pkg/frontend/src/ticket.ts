import { escapeHtml } from "./html.js";
import type { Ticket, TicketLine, TicketRecord } from "./types.js";

/** Human-readable form of one customization record, data untouched. */
export function describeRecord(record: TicketRecord): string {
  if (record.kind === "specify") {
    const group = record.group ?? "choice";
    return `${group}: ${record.dish}`;
  }
  const base = `${record.op}(${record.option})`;
  return record.member ? `${base} on ${record.member}` : base;
}

function renderLine(line: TicketLine): string {
  const marker = line.combo ? ` <span class="combo">combo</span>` : "";
  const records = line.records
    .map((r) => `<li class="ticket-record">${escapeHtml(describeRecord(r))}</li>`)
    .join("");
  const sub = records ? `<ul class="ticket-records">${records}</ul>` : "";
  return (
    `<li class="ticket-line"><span class="ticket-food">${escapeHtml(line.food)}</span>` +
    `<span class="ticket-instance">#${escapeHtml(line.instance)}</span>${marker}${sub}</li>`
  );
}

/**
 * Renders the itemized ticket exactly as the API reports it. The view
 * repeats the server's total verbatim; no figure on screen is computed
 * client side.
 */
export function renderTicket(ticket: Ticket | null): string {
  if (!ticket) {
    return `<p class="placeholder">Order in progress: no ticket yet.</p>`;
  }
  const lines = ticket.lines.map(renderLine).join("\n");
  const list = lines
    ? `<ul class="ticket-lines">\n${lines}\n</ul>`
    : `<p class="placeholder">No items.</p>`;
  const footer = `<p class="ticket-footer">Total <strong>$${escapeHtml(ticket.total)}</strong></p>`;
  return `${list}\n${footer}`;
}
