import { DecisionOutcome, ReviewClient } from "./client.js";
import { PredictionView } from "./wire.js";

export interface SessionStats {
  decisions: number;
  acceptRate: number;
  meanSeconds: number;
  blind: boolean;
}

export interface CurrentItem {
  prediction: PredictionView;
  position: number; // 1-based within the session
  pendingTotal: number;
}

type Clock = () => number;

/**
 * One reviewer's pass over the pending queue.
 *
 * Holds no state beyond the per-item timer and running averages; the
 * service log is the source of truth, so a reload simply refetches.
 */
export class ReviewSession {
  blind: boolean;
  private current: CurrentItem | null = null;
  private itemStarted = 0;
  private submitting = false;
  private seen = 0;
  private decided = 0;
  private accepted = 0;
  private totalMs = 0;

  constructor(
    private client: ReviewClient,
    private reviewer: string,
    opts: { blind?: boolean; clock?: Clock } = {},
  ) {
    this.blind = opts.blind ?? false;
    this.clock = opts.clock ?? (() => Date.now());
  }

  private clock: Clock;

  /** Fetch the lowest-ordered pending prediction and start its timer. */
  async fetchNext(): Promise<CurrentItem | null> {
    const page = await this.client.predictions("pending", 0, 1);
    if (page.items.length === 0) {
      this.current = null;
      return null; // completion screen
    }
    this.seen += 1;
    this.current = {
      prediction: page.items[0],
      position: this.seen,
      pendingTotal: page.total,
    };
    this.itemStarted = this.clock();
    return this.current;
  }

  currentItem(): CurrentItem | null {
    return this.current;
  }

  elapsedMs(): number {
    return this.current ? this.clock() - this.itemStarted : 0;
  }

  /**
   * Record a verdict for the displayed item and advance. Double submits are
   * swallowed while an acknowledgment is outstanding; 409/404 outcomes
   * (another reviewer got there first) skip to the next item.
   */
  async submitVerdict(verdict: "accept" | "reject"): Promise<CurrentItem | null> {
    if (this.current === null) throw new Error("no item displayed");
    if (this.submitting) return this.current;
    this.submitting = true;
    try {
      const elapsed = this.clock() - this.itemStarted;
      const outcome: DecisionOutcome = await this.client.decide(
        this.current.prediction.id,
        verdict,
        this.reviewer,
        elapsed,
      );
      if (outcome === "recorded") {
        this.decided += 1;
        this.totalMs += elapsed;
        if (verdict === "accept") this.accepted += 1;
      }
      // duplicate/conflict/gone: someone else decided; just move on
      return await this.fetchNext();
    } finally {
      this.submitting = false;
    }
  }

  /** Skip without recording anything; the item stays pending for others. */
  async skip(): Promise<CurrentItem | null> {
    if (this.current === null) throw new Error("no item displayed");
    return this.fetchNext();
  }

  stats(): SessionStats {
    return {
      decisions: this.decided,
      acceptRate: this.decided ? this.accepted / this.decided : 0,
      meanSeconds: this.decided ? this.totalMs / this.decided / 1000 : 0,
      blind: this.blind,
    };
  }
}
