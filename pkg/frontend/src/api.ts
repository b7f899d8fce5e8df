import type {
  ClosePayload,
  KbPayload,
  Role,
  RoundReply,
  SessionOpened,
  StatePayload,
  TicketPayload,
  TranscriptPayload,
} from "./types.js";

/** A non-2xx API response, carrying the server's `detail` message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client for the dialogue API. The fetch implementation is
 * injectable so tests can substitute a fake transport.
 */
export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = `${resp.status} ${resp.statusText}`.trim();
      try {
        const data = (await resp.json()) as { detail?: unknown };
        if (data && typeof data.detail === "string") detail = data.detail;
      } catch {
        // error body was not JSON; keep the status line
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  openSession(role: Role): Promise<SessionOpened> {
    return this.request("POST", "/sessions", { role });
  }

  sendMessage(sessionId: string, text: string): Promise<RoundReply> {
    return this.request("POST", `/sessions/${sessionId}/message`, { text });
  }

  getTranscript(sessionId: string): Promise<TranscriptPayload> {
    return this.request("GET", `/sessions/${sessionId}/transcript`);
  }

  getTicket(sessionId: string): Promise<TicketPayload> {
    return this.request("GET", `/sessions/${sessionId}/ticket`);
  }

  closeSession(sessionId: string): Promise<ClosePayload> {
    return this.request("DELETE", `/sessions/${sessionId}`);
  }

  getKb(filter?: { predicate?: string; food?: string }): Promise<KbPayload> {
    const query = new URLSearchParams();
    if (filter?.predicate) query.set("predicate", filter.predicate);
    if (filter?.food) query.set("food", filter.food);
    const qs = query.toString();
    return this.request("GET", qs ? `/kb?${qs}` : "/kb");
  }

  getState(): Promise<StatePayload> {
    return this.request("GET", "/state");
  }
}
