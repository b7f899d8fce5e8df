import { ApiClient } from "./api.js";
import { renderMessages } from "./console.js";
import { TabController } from "./controller.js";
import { renderBadges, renderShortages, renderStateSummary } from "./inspector.js";
import { renderTicket } from "./ticket.js";
import { VersionTracker } from "./versions.js";
import type { Role, StatePayload } from "./types.js";

function apiBaseUrl(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  if (override) return override.replace(/\/+$/, "");
  return `${window.location.protocol}//${window.location.hostname}:8000`;
}

const api = new ApiClient(apiBaseUrl());
// One tracker for the whole page: badges never decrease, whichever tab acts.
const versions = new VersionTracker();
const tabs: Record<Role, TabController> = {
  customer: new TabController("customer", api, versions),
  manager: new TabController("manager", api, versions),
};
const opened: Record<Role, boolean> = { customer: false, manager: false };
const ROLES: readonly Role[] = ["customer", "manager"];
let active: Role = "customer";
let latestState: StatePayload | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderAll(): void {
  for (const role of ROLES) {
    const tab = tabs[role];
    const messages = el(`messages-${role}`);
    messages.innerHTML = renderMessages(tab.entries, tab.showTraces);
    messages.scrollTop = messages.scrollHeight;
    el(`panel-${role}`).classList.toggle("hidden", active !== role);
    el(`tab-${role}`).classList.toggle("active", active === role);
  }
  el("badges").innerHTML = renderBadges(versions.kbVersion, versions.stateVersion);
  el("shortages").innerHTML = renderShortages(latestState);
  el("state-summary").innerHTML = renderStateSummary(latestState);
  el("ticket").innerHTML = renderTicket(tabs.customer.ticket);
}

function noteState(role: Role): void {
  if (tabs[role].lastState) latestState = tabs[role].lastState;
}

async function ensureOpen(role: Role): Promise<void> {
  if (opened[role]) return;
  opened[role] = true;
  try {
    await tabs[role].open();
    noteState(role);
  } catch (err) {
    opened[role] = false;
    const reason = err instanceof Error ? err.message : String(err);
    tabs[role].entries.push({ kind: "notice", text: `Could not reach the API: ${reason}` });
  }
  renderAll();
}

function showRetry(role: Role, message: string, visible: boolean): void {
  el(`retry-${role}`).classList.toggle("hidden", !visible);
  el(`retry-text-${role}`).textContent = message;
}

async function submit(role: Role): Promise<void> {
  const input = el<HTMLInputElement>(`input-${role}`);
  const outcome = await tabs[role].send(input.value);
  if (outcome === null) return;
  if (outcome.ok) {
    input.value = "";
    showRetry(role, "", false);
    noteState(role);
  } else if (outcome.retryable) {
    showRetry(role, `Could not send: ${outcome.error ?? "transport failure"}. Your message was kept.`, true);
  } else {
    showRetry(role, "", false);
  }
  renderAll();
}

function wirePanel(role: Role): void {
  el(`composer-${role}`).addEventListener("submit", (event) => {
    event.preventDefault();
    void submit(role);
  });
  el(`retry-btn-${role}`).addEventListener("click", () => {
    void submit(role);
  });
  el<HTMLInputElement>(`traces-${role}`).addEventListener("change", (event) => {
    tabs[role].showTraces = (event.target as HTMLInputElement).checked;
    renderAll();
  });
  el(`close-${role}`).addEventListener("click", () => {
    void (async () => {
      try {
        await tabs[role].close();
        noteState(role);
      } catch {
        // closing twice (or a dropped connection) leaves the view as is
      }
      renderAll();
    })();
  });
  el(`tab-${role}`).addEventListener("click", () => {
    active = role;
    renderAll();
    void ensureOpen(role);
  });
}

for (const role of ROLES) wirePanel(role);
renderAll();
void ensureOpen(active);
