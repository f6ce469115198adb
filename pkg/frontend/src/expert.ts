/** Expert operator session: validate, inline-edit, or discard one assigned
 * pair at a time, with per-item timing.
 *
 * Edit submission stays disabled until the text actually differs from the
 * original (whitespace/case-only changes do not count); validate sends the
 * decision alone, never a copy of the text.
 */

import { ApiClient, SubmissionQueue, randomKey } from "./api.js";
import { ItemTimer } from "./timer.js";
import type { DecisionPayload, DecisionResponse, ExpertItem } from "./types.js";

export type ExpertPhase = "idle" | "deciding" | "submitting" | "done";

export interface ExpertViewState {
  phase: ExpertPhase;
  item: ExpertItem | null;
  editing: boolean;
  editedText: string;
  canSubmitEdit: boolean;
  acked: number;
  pendingSubmissions: number;
}

function normalizeForComparison(text: string): string {
  return text.toLowerCase().replace(/\s+/g, " ").trim();
}

export class ExpertSession {
  private phase: ExpertPhase = "idle";
  private item: ExpertItem | null = null;
  private editing = false;
  private editedText = "";
  private acked = 0;
  private readonly queue = new SubmissionQueue();

  constructor(
    private readonly api: ApiClient,
    readonly operatorId: string,
    private readonly experimentId?: string,
    private readonly timer: ItemTimer = new ItemTimer(),
    private readonly keyFor: () => string = randomKey,
    private readonly onChange: (state: ExpertViewState) => void = () => undefined,
  ) {}

  get state(): ExpertViewState {
    return {
      phase: this.phase,
      item: this.item,
      editing: this.editing,
      editedText: this.editedText,
      canSubmitEdit: this.canSubmitEdit,
      acked: this.acked,
      pendingSubmissions: this.queue.size,
    };
  }

  private emit(): void {
    this.onChange(this.state);
  }

  async next(): Promise<ExpertItem | null> {
    if (this.phase === "deciding") {
      throw new Error("an item is already active");
    }
    const item = await this.api.expertNext(this.operatorId, this.experimentId);
    this.item = item;
    this.editing = false;
    this.editedText = item?.pair.cn ?? "";
    if (item === null) {
      this.phase = "done";
    } else {
      this.phase = "deciding";
      this.timer.start();
    }
    this.emit();
    return item;
  }

  startEdit(): void {
    if (this.phase !== "deciding" || this.item === null) {
      throw new Error("no active item");
    }
    this.editing = true;
    this.editedText = this.item.pair.cn;
    this.emit();
  }

  setEditedText(text: string): void {
    if (!this.editing) {
      throw new Error("not editing");
    }
    this.editedText = text;
    this.emit();
  }

  /** Edit submit gate: text must be non-empty and actually changed. */
  get canSubmitEdit(): boolean {
    if (!this.editing || this.item === null) {
      return false;
    }
    const edited = normalizeForComparison(this.editedText);
    return edited.length > 0 && edited !== normalizeForComparison(this.item.pair.cn);
  }

  validate(): Promise<DecisionResponse | null> {
    return this.decide("validate");
  }

  discard(): Promise<DecisionResponse | null> {
    return this.decide("discard");
  }

  submitEdit(): Promise<DecisionResponse | null> {
    if (!this.canSubmitEdit) {
      throw new Error("edit not submittable: text unchanged or empty");
    }
    return this.decide("edit");
  }

  private async decide(action: "validate" | "edit" | "discard"): Promise<DecisionResponse | null> {
    if (this.phase !== "deciding" || this.item === null) {
      throw new Error("no active item");
    }
    const payload: DecisionPayload = {
      experiment_id: this.item.experiment_id,
      pair_id: this.item.pair.id,
      operator_id: this.operatorId,
      action,
      elapsed: this.timer.stop(),
      idempotency_key: this.keyFor(),
    };
    if (action === "edit") {
      payload.edited_cn = this.editedText;
    }
    this.phase = "submitting";
    this.emit();
    const outcome = await this.queue.submit(() => this.api.submitDecision(payload));
    if (outcome.queued) {
      this.emit();
      return null;
    }
    this.acked += 1;
    this.item = null;
    this.editing = false;
    this.phase = "idle";
    this.emit();
    return outcome.acked;
  }

  async flushPending(): Promise<number> {
    const flushed = await this.queue.flush();
    if (flushed > 0) {
      this.acked += flushed;
      if (this.queue.size === 0 && this.phase === "submitting") {
        this.item = null;
        this.editing = false;
        this.phase = "idle";
      }
    }
    this.emit();
    return flushed;
  }
}
