import { describe, expect, it } from "vitest";

import {
  WireError,
  parseKvBlock,
  parsePrediction,
  parsePredictionPage,
  renderDecision,
} from "../src/wire.js";

const BLOCK = [
  "id=abc123",
  "head=item1",
  "relation=suitableFor",
  "tail=MiddleAge",
  "score=0.5",
  "status=pending",
  "source=model",
  "explanation.1.path=(item1, SleeveStyle, Normal)",
  "explanation.1.alpha=0.82",
  "explanation.1.support=30",
  "explanation.2.path=(item1, material, Cotton)",
  "explanation.2.alpha=0.11",
  "explanation.2.support=4",
].join("\n");

describe("parseKvBlock", () => {
  it("splits on the first = only", () => {
    const fields = parseKvBlock("path=(a, rel=weird, b)\nx=1");
    expect(fields.get("path")).toBe("(a, rel=weird, b)");
  });

  it("rejects lines without =", () => {
    expect(() => parseKvBlock("garbage line")).toThrow(WireError);
  });

  it("skips blank lines", () => {
    expect(parseKvBlock("a=1\n\n  \nb=2").size).toBe(2);
  });
});

describe("parsePrediction", () => {
  it("reads the triple and numbered explanations in order", () => {
    const pred = parsePrediction(BLOCK);
    expect(pred.id).toBe("abc123");
    expect(pred.head).toBe("item1");
    expect(pred.score).toBe(0.5);
    expect(pred.explanations).toHaveLength(2);
    expect(pred.explanations[0].alpha).toBe(0.82);
    expect(pred.explanations[1].support).toBe(4);
  });

  it("fails on a missing required field", () => {
    expect(() => parsePrediction("id=x\nhead=a")).toThrow(WireError);
  });
});

describe("parsePredictionPage", () => {
  it("separates the header block from the items", () => {
    const body = `total=7\npage=0\npage_size=2\n\n${BLOCK}\n\n${BLOCK.replace("abc123", "def456")}\n`;
    const page = parsePredictionPage(body);
    expect(page.total).toBe(7);
    expect(page.pageSize).toBe(2);
    expect(page.items.map((p) => p.id)).toEqual(["abc123", "def456"]);
  });

  it("handles an empty queue page", () => {
    const page = parsePredictionPage("total=0\npage=0\npage_size=20\n");
    expect(page.items).toEqual([]);
  });
});

describe("renderDecision", () => {
  it("produces key=value lines the service understands", () => {
    const body = renderDecision("abc123", "accept", "r1", 1234.6);
    expect(body).toBe("prediction_id=abc123\nverdict=accept\nreviewer=r1\nelapsed_ms=1235\n");
  });

  it("rejects negative timers", () => {
    expect(() => renderDecision("x", "reject", "r1", -5)).toThrow(WireError);
  });
});
