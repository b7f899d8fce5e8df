/** Payload shapes of the duotalk HTTP+JSON API, mirrored field for field. */

export type Role = "manager" | "customer";

/** Every response carries the store's current version pair. */
export interface VersionStamp {
  kb_version: number;
  state_version: number;
}

export interface SessionOpened extends VersionStamp {
  id: string;
  role: Role;
  greeting: string;
}

export interface Timing {
  parse_ms: number;
  reasoning_ms: number;
  generate_ms: number;
  total_ms: number;
}

/** One conversational round: POST /sessions/{id}/message. */
export interface RoundReply extends VersionStamp {
  reply: string;
  frames: string;
  predicates: string;
  timing: Timing;
  round: number;
}

/** Rows of GET /sessions/{id}/transcript; index 0 is the greeting. */
export interface TranscriptRow {
  index: number;
  utterance: string;
  frames: string;
  predicates: string;
  reply: string;
  timing: Timing | null;
  kb_version: number | null;
  state_version: number | null;
}

export interface TranscriptPayload extends VersionStamp {
  transcript: TranscriptRow[];
}

export type TicketRecord =
  | { kind: "update"; op: string; option: string; member?: string }
  | { kind: "specify"; group: string | null; dish: string };

export interface TicketLine {
  food: string;
  instance: number;
  combo: boolean;
  records: TicketRecord[];
}

export interface Ticket {
  lines: TicketLine[];
  total_cents: number;
  total: string;
}

export interface TicketPayload extends VersionStamp {
  ticket: Ticket | null;
}

/** A manager session's menu commit as reported by the API. */
export interface CommitOutcome {
  status: string;
  error: string | null;
  adds: string[];
  removes: string[];
  shortage: { staged: string[] };
}

export interface ClosePayload extends VersionStamp {
  id: string;
  role: Role;
  ticket?: Ticket | null;
  commits?: CommitOutcome[];
}

export interface KbPayload extends VersionStamp {
  facts: string[];
  count: number;
}

/** GET /state: the shared shortage/session view both consoles poll. */
export interface StatePayload extends VersionStamp {
  runout: string[];
  active_sessions: string[];
  pending_commits: CommitOutcome[];
  counters: Record<string, number>;
}
