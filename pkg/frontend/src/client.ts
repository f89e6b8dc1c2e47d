import {
  PredictionPage,
  parsePredictionPage,
  parseStats,
  renderDecision,
} from "./wire.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    public status: number,
    body: string,
  ) {
    super(`service returned ${status}: ${body.trim()}`);
  }
}

export type DecisionOutcome = "recorded" | "duplicate" | "conflict" | "gone";

/** Thin typed wrapper over the review service wire API. */
export class ReviewClient {
  constructor(
    private base: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  async predictions(status?: string, page = 0, pageSize = 20): Promise<PredictionPage> {
    const params = new URLSearchParams({ page: String(page), page_size: String(pageSize) });
    if (status) params.set("status", status);
    const resp = await this.fetchImpl(`${this.base}/api/predictions?${params}`);
    const body = await resp.text();
    if (!resp.ok) throw new ServiceError(resp.status, body);
    return parsePredictionPage(body);
  }

  /**
   * Post a verdict. Conflicts (409) and vanished ids (404) are reported as
   * outcomes rather than thrown: the session layer skips over them.
   */
  async decide(
    predictionId: string,
    verdict: "accept" | "reject",
    reviewer: string,
    elapsedMs: number,
  ): Promise<DecisionOutcome> {
    const resp = await this.fetchImpl(`${this.base}/api/decisions`, {
      method: "POST",
      headers: { "content-type": "text/plain; charset=utf-8" },
      body: renderDecision(predictionId, verdict, reviewer, elapsedMs),
    });
    const body = await resp.text();
    if (resp.status === 409) return "conflict";
    if (resp.status === 404) return "gone";
    if (!resp.ok) throw new ServiceError(resp.status, body);
    return body.includes("duplicate") ? "duplicate" : "recorded";
  }

  async exportAccepted(): Promise<string> {
    const resp = await this.fetchImpl(`${this.base}/api/export?format=tsv`);
    const body = await resp.text();
    if (!resp.ok) throw new ServiceError(resp.status, body);
    return body;
  }

  async stats(): Promise<Map<string, string>> {
    const resp = await this.fetchImpl(`${this.base}/api/stats`);
    const body = await resp.text();
    if (!resp.ok) throw new ServiceError(resp.status, body);
    return parseStats(body);
  }
}
