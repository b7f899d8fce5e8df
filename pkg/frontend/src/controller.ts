import { ApiClient, ApiError } from "./api.js";
import type { ConsoleEntry } from "./console.js";
import { VersionTracker } from "./versions.js";
import type { ClosePayload, Role, RoundReply, StatePayload, Ticket } from "./types.js";

/** Result of submitting the composer. */
export interface SendOutcome {
  ok: boolean;
  round?: RoundReply;
  /** What went wrong, for the banner. */
  error?: string;
  /** Transport failures are retryable: keep the composer text. */
  retryable: boolean;
}

function describeError(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}

/**
 * One console tab: a single live session, its message history, and the
 * inspector data refreshed after every reply. Holds no DOM references,
 * so the whole dialogue flow is testable without a browser.
 */
export class TabController {
  readonly entries: ConsoleEntry[] = [];
  showTraces = false;
  sessionId: string | null = null;
  closed = false;
  lastState: StatePayload | null = null;
  ticket: Ticket | null = null;

  constructor(
    readonly role: Role,
    private readonly api: ApiClient,
    readonly versions: VersionTracker = new VersionTracker(),
  ) {}

  /** Opens this tab's session and records the greeting. */
  async open(): Promise<void> {
    const opened = await this.api.openSession(this.role);
    this.sessionId = opened.id;
    this.entries.push({ kind: "greeting", text: opened.greeting });
    this.versions.observe(opened);
    await this.refreshInspector();
  }

  /**
   * Submits one utterance. An empty composer sends nothing. On success
   * the user line and the reply join the history and the inspector is
   * re-polled; on transport failure nothing is appended so the caller
   * can keep the composer text and offer a retry.
   */
  async send(text: string): Promise<SendOutcome | null> {
    const trimmed = text.trim();
    if (trimmed === "") return null;
    if (!this.sessionId || this.closed) {
      return { ok: false, retryable: false, error: "session is closed" };
    }
    let round: RoundReply;
    try {
      round = await this.api.sendMessage(this.sessionId, trimmed);
    } catch (err) {
      if (err instanceof ApiError) {
        this.entries.push({ kind: "notice", text: err.message });
        return { ok: false, retryable: false, error: err.message };
      }
      return { ok: false, retryable: true, error: describeError(err) };
    }
    this.entries.push({ kind: "user", text: trimmed });
    this.entries.push({ kind: "round", round });
    this.versions.observe(round);
    await this.refreshInspector();
    return { ok: true, round, retryable: false };
  }

  /**
   * Re-polls the shared state (and, on the customer tab, the live
   * ticket). Rounds are the only mutation points, so polling after
   * each reply keeps the inspector current without a push channel.
   */
  async refreshInspector(): Promise<void> {
    try {
      const state = await this.api.getState();
      this.lastState = state;
      this.versions.observe(state);
    } catch {
      // best-effort: keep the previous inspector view
    }
    if (this.role === "customer" && this.sessionId) {
      try {
        const payload = await this.api.getTicket(this.sessionId);
        this.ticket = payload.ticket;
        this.versions.observe(payload);
      } catch {
        // manager tickets 409; transport errors keep the previous view
      }
    }
  }

  /** Closes the session; the final ticket (if any) stays displayed. */
  async close(): Promise<ClosePayload | null> {
    if (!this.sessionId || this.closed) return null;
    const result = await this.api.closeSession(this.sessionId);
    this.closed = true;
    if (result.ticket !== undefined && result.ticket !== null) {
      this.ticket = result.ticket;
    }
    this.versions.observe(result);
    this.entries.push({ kind: "notice", text: "Session closed." });
    return result;
  }
}
