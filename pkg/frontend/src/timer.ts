/** Per-item stopwatch: starts when an item renders, stops on submit. */

export type Clock = () => number; // milliseconds

export class ItemTimer {
  private startedAt: number | null = null;

  constructor(private readonly now: Clock = () => performance.now()) {}

  start(): void {
    this.startedAt = this.now();
  }

  get running(): boolean {
    return this.startedAt !== null;
  }

  /** Seconds elapsed since start; resets the timer. */
  stop(): number {
    if (this.startedAt === null) {
      return 0;
    }
    const elapsed = (this.now() - this.startedAt) / 1000;
    this.startedAt = null;
    return elapsed;
  }

  /** Seconds elapsed so far without stopping. */
  peek(): number {
    return this.startedAt === null ? 0 : (this.now() - this.startedAt) / 1000;
  }
}
