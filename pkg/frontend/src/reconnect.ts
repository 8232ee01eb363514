/**
 * Reconnect policy: exponential backoff with a cap, reset on success.
 */

export class Backoff {
  private attempt = 0;

  constructor(readonly baseMs = 250, readonly capMs = 5000) {}

  nextDelay(): number {
    const delay = Math.min(this.capMs, this.baseMs * 2 ** this.attempt);
    this.attempt += 1;
    return delay;
  }

  reset(): void {
    this.attempt = 0;
  }
}
