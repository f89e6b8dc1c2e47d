/**
 * One reviewer's pass over the pending queue.
 *
 * Holds no state beyond the per-item timer and running averages; the
 * service log is the source of truth, so a reload simply refetches.
 */
export class ReviewSession {
    constructor(client, reviewer, opts = {}) {
        this.client = client;
        this.reviewer = reviewer;
        this.current = null;
        this.itemStarted = 0;
        this.submitting = false;
        this.seen = 0;
        this.decided = 0;
        this.accepted = 0;
        this.totalMs = 0;
        this.blind = opts.blind ?? false;
        this.clock = opts.clock ?? (() => Date.now());
    }
    /** Fetch the lowest-ordered pending prediction and start its timer. */
    async fetchNext() {
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
    currentItem() {
        return this.current;
    }
    elapsedMs() {
        return this.current ? this.clock() - this.itemStarted : 0;
    }
    /**
     * Record a verdict for the displayed item and advance. Double submits are
     * swallowed while an acknowledgment is outstanding; 409/404 outcomes
     * (another reviewer got there first) skip to the next item.
     */
    async submitVerdict(verdict) {
        if (this.current === null)
            throw new Error("no item displayed");
        if (this.submitting)
            return this.current;
        this.submitting = true;
        try {
            const elapsed = this.clock() - this.itemStarted;
            const outcome = await this.client.decide(this.current.prediction.id, verdict, this.reviewer, elapsed);
            if (outcome === "recorded") {
                this.decided += 1;
                this.totalMs += elapsed;
                if (verdict === "accept")
                    this.accepted += 1;
            }
            // duplicate/conflict/gone: someone else decided; just move on
            return await this.fetchNext();
        }
        finally {
            this.submitting = false;
        }
    }
    /** Skip without recording anything; the item stays pending for others. */
    async skip() {
        if (this.current === null)
            throw new Error("no item displayed");
        return this.fetchNext();
    }
    stats() {
        return {
            decisions: this.decided,
            acceptRate: this.decided ? this.accepted / this.decided : 0,
            meanSeconds: this.decided ? this.totalMs / this.decided / 1000 : 0,
            blind: this.blind,
        };
    }
}
