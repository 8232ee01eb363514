/**
 * Command throttle: at most one command per tick period (60/s), with the
 * newest command winning while the gate is shut.  Mirrors the node's
 * latest-wins mailboxes so a slider drag never floods the link.
 */

export class CommandThrottle<T> {
  private lastSentAt = -Infinity;
  private pending: T | null = null;
  readonly minIntervalMs: number;

  constructor(maxPerSecond = 60) {
    this.minIntervalMs = 1000 / maxPerSecond;
  }

  /** Offer a command; returns it if it may go out now, else queues it. */
  offer(cmd: T, now: number): T | null {
    if (now - this.lastSentAt >= this.minIntervalMs) {
      this.lastSentAt = now;
      this.pending = null;
      return cmd;
    }
    this.pending = cmd;
    return null;
  }

  /** Poll for a queued command once the gate reopens. */
  drain(now: number): T | null {
    if (this.pending !== null && now - this.lastSentAt >= this.minIntervalMs) {
      const cmd = this.pending;
      this.pending = null;
      this.lastSentAt = now;
      return cmd;
    }
    return null;
  }
}
