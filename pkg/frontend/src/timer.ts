/**
 * Session countdown. Default 30 minutes, configurable. Once expired the
 * timer stays expired and the expiry callback has fired exactly once;
 * the UI locks all inputs off that state.
 */

export class SessionTimer {
  private startedAt: number | null = null;
  private expiredFlag = false;

  constructor(
    readonly durationSeconds: number = 30 * 60,
    private readonly onExpire: () => void = () => {},
    private readonly now: () => number = () => Date.now(),
  ) {
    if (durationSeconds <= 0) {
      throw new Error(`duration must be positive, got ${durationSeconds}`);
    }
  }

  start(): void {
    if (this.startedAt === null) {
      this.startedAt = this.now();
    }
  }

  get running(): boolean {
    return this.startedAt !== null && !this.expiredFlag;
  }

  get expired(): boolean {
    return this.expiredFlag;
  }

  elapsedSeconds(): number {
    if (this.startedAt === null) return 0;
    return Math.min((this.now() - this.startedAt) / 1000, this.durationSeconds);
  }

  remainingSeconds(): number {
    return Math.max(this.durationSeconds - this.elapsedSeconds(), 0);
  }

  /** Poll; the UI calls this from an interval. Fires onExpire once. */
  tick(): void {
    if (this.startedAt === null || this.expiredFlag) return;
    if (this.now() - this.startedAt >= this.durationSeconds * 1000) {
      this.expiredFlag = true;
      this.onExpire();
    }
  }
}

export function formatClock(seconds: number): string {
  const whole = Math.ceil(seconds);
  const m = Math.floor(whole / 60);
  const s = whole % 60;
  return `${m}:${String(s).padStart(2, "0")}`;
}
