/** Reviewer session: claim one pair at a time, capture a 0-3 score plus a
 * bad-HS toggle, submit with the measured per-item time.
 *
 * Progress counts server-acknowledged submissions only; a submission that
 * hits a network failure keeps its idempotency key and is replayed by
 * `flushPending()` when connectivity returns, so the server ends up with
 * exactly one logical judgment. Submitted scores cannot be revised.
 */

import { ApiClient, SubmissionQueue, randomKey } from "./api.js";
import { ItemTimer } from "./timer.js";
import type { PairOut, ScorePayload, ScoreResponse } from "./types.js";

export type ReviewerPhase = "idle" | "scoring" | "submitting" | "done";

export interface ReviewerViewState {
  phase: ReviewerPhase;
  pair: PairOut | null;
  selectedScore: 0 | 1 | 2 | 3 | null;
  badHs: boolean;
  acked: number;
  pendingSubmissions: number;
}

export class ReviewerSession {
  private phase: ReviewerPhase = "idle";
  private pair: PairOut | null = null;
  private selectedScore: 0 | 1 | 2 | 3 | null = null;
  private badHs = false;
  private acked = 0;
  private readonly queue = new SubmissionQueue();

  constructor(
    private readonly api: ApiClient,
    readonly annotatorId: string,
    private readonly timer: ItemTimer = new ItemTimer(),
    private readonly keyFor: () => string = randomKey,
    private readonly onChange: (state: ReviewerViewState) => void = () => undefined,
  ) {}

  get state(): ReviewerViewState {
    return {
      phase: this.phase,
      pair: this.pair,
      selectedScore: this.selectedScore,
      badHs: this.badHs,
      acked: this.acked,
      pendingSubmissions: this.queue.size,
    };
  }

  private emit(): void {
    this.onChange(this.state);
  }

  /** Fetch and render the next claimable pair; starts the item timer. */
  async next(): Promise<PairOut | null> {
    if (this.phase === "scoring") {
      throw new Error("an item is already active");
    }
    const pair = await this.api.reviewNext(this.annotatorId);
    this.pair = pair;
    this.selectedScore = null;
    this.badHs = false;
    if (pair === null) {
      this.phase = "done";
    } else {
      this.phase = "scoring";
      this.timer.start();
    }
    this.emit();
    return pair;
  }

  selectScore(value: 0 | 1 | 2 | 3): void {
    if (this.phase !== "scoring") {
      throw new Error("no active item");
    }
    this.selectedScore = value;
    this.emit();
  }

  toggleBadHs(): void {
    if (this.phase !== "scoring") {
      throw new Error("no active item");
    }
    this.badHs = !this.badHs;
    this.emit();
  }

  get canSubmit(): boolean {
    return this.phase === "scoring" && this.selectedScore !== null;
  }

  /** Submit the selected judgment. Returns the ack, or null when queued
   * offline (the item stays claimed server-side; call flushPending later). */
  async submit(): Promise<ScoreResponse | null> {
    if (!this.canSubmit || this.pair === null || this.selectedScore === null) {
      throw new Error("nothing to submit");
    }
    const payload: ScorePayload = {
      pair_id: this.pair.id,
      annotator_id: this.annotatorId,
      score: this.selectedScore,
      bad_hs: this.badHs,
      elapsed: this.timer.stop(),
      idempotency_key: this.keyFor(),
    };
    this.phase = "submitting";
    this.emit();
    const outcome = await this.queue.submit(() => this.api.submitScore(payload));
    if (outcome.queued) {
      this.emit();
      return null;
    }
    this.acked += 1;
    this.pair = null;
    this.phase = "idle";
    this.emit();
    return outcome.acked;
  }

  /** Replay offline submissions; advances progress for each ack. */
  async flushPending(): Promise<number> {
    const flushed = await this.queue.flush();
    if (flushed > 0) {
      this.acked += flushed;
      if (this.queue.size === 0 && this.phase === "submitting") {
        this.pair = null;
        this.phase = "idle";
      }
    }
    this.emit();
    return flushed;
  }
}
