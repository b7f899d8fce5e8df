import type { VersionStamp } from "./types.js";

/**
 * Tracks the version badges shown in the page header.
 *
 * Responses can arrive out of order (a slow round reply after a fresh
 * state poll), so the tracker keeps the highest value it has seen:
 * badges never decrease during a browser session.
 */
export class VersionTracker {
  private kb = 0;
  private state = 0;

  observe(stamp: Partial<VersionStamp> | null | undefined): void {
    if (!stamp) return;
    if (typeof stamp.kb_version === "number" && stamp.kb_version > this.kb) {
      this.kb = stamp.kb_version;
    }
    if (typeof stamp.state_version === "number" && stamp.state_version > this.state) {
      this.state = stamp.state_version;
    }
  }

  get kbVersion(): number {
    return this.kb;
  }

  get stateVersion(): number {
    return this.state;
  }
}
