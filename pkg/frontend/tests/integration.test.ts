/**
 * Round-trip against a live review service: spawn the real HTTP server,
 * drive the review loop through the client/session layers, and verify
 * export + restart semantics.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ReviewClient } from "../src/client.js";
import { ReviewSession } from "../src/session.js";
import { renderItem } from "../src/render.js";

const PORT = 8765 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

const PREDICTIONS =
  "head\trelation\ttail\tscore\n" +
  Array.from({ length: 10 }, (_, i) => `item${i}\tsuitableFor\tval${i}\t${(i + 1) / 10}`).join("\n") +
  "\n";

const EXPLANATIONS =
  "target\tpath\tlength\talpha\tsupport\n" +
  Array.from(
    { length: 10 },
    (_, i) =>
      `(item${i}, suitableFor, val${i})\t(item${i}, SleeveStyle, Normal)\t1\t0.${50 + i}\t${i + 1}`,
  ).join("\n") +
  "\n";

let dir: string;
let server: ChildProcess | null = null;

function startServer(): ChildProcess {
  const proc = spawn(
    "python3",
    [
      "-c",
      "from xkgat.cli import main; import sys; sys.exit(main(sys.argv[1:]))",
      "serve",
      "--predictions",
      join(dir, "predictions.tsv"),
      "--explanations",
      join(dir, "explanations.tsv"),
      "--log",
      join(dir, "decisions.log"),
      "--port",
      String(PORT),
    ],
    { stdio: "ignore" },
  );
  return proc;
}

async function waitReady(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const resp = await fetch(`${BASE}/api/stats`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("review service did not come up");
}

function stopServer(): Promise<void> {
  return new Promise((resolve) => {
    if (!server) return resolve();
    server.on("exit", () => resolve());
    server.kill("SIGTERM");
    server = null;
  });
}

beforeAll(async () => {
  dir = mkdtempSync(join(tmpdir(), "review-"));
  writeFileSync(join(dir, "predictions.tsv"), PREDICTIONS);
  writeFileSync(join(dir, "explanations.tsv"), EXPLANATIONS);
  server = startServer();
  await waitReady();
}, 30000);

afterAll(async () => {
  await stopServer();
});

describe("review loop round-trip", () => {
  it("accepts 3, rejects 2, exports exactly the accepted triples, survives restart", async () => {
    const client = new ReviewClient(BASE);
    const session = new ReviewSession(client, "integration");

    const first = await session.fetchNext();
    expect(first).not.toBeNull();
    expect(first!.pendingTotal).toBe(10);
    // queue is score-ascending: item0 first
    expect(first!.prediction.head).toBe("item0");
    // normal mode shows the alpha-sorted explanation
    expect(renderItem(first!, false)).toContain("SleeveStyle");
    // blind mode hides it but keeps the triple
    const blindHtml = renderItem(first!, true);
    expect(blindHtml).toContain("item0");
    expect(blindHtml).not.toContain("SleeveStyle");

    await session.submitVerdict("accept"); // item0
    await session.submitVerdict("accept"); // item1
    await session.submitVerdict("reject"); // item2
    await session.submitVerdict("accept"); // item3
    await session.submitVerdict("reject"); // item4

    const stats = session.stats();
    expect(stats.decisions).toBe(5);
    expect(stats.acceptRate).toBeCloseTo(3 / 5);
    expect(stats.meanSeconds).toBeGreaterThan(0);

    const serverStats = await client.stats();
    expect(serverStats.get("accepted")).toBe("3");
    expect(serverStats.get("rejected")).toBe("2");
    expect(serverStats.get("pending")).toBe("5");

    const exported = await client.exportAccepted();
    expect(exported).toBe(
      "item0\tsuitableFor\tval0\nitem1\tsuitableFor\tval1\nitem3\tsuitableFor\tval3\n",
    );

    // a contradictory verdict on a decided item is refused
    const decidedId = first!.prediction.id;
    expect(await client.decide(decidedId, "reject", "integration", 10)).toBe("conflict");
    expect(await client.decide(decidedId, "accept", "integration", 10)).toBe("duplicate");

    // restart: the decision log reproduces every status
    await stopServer();
    server = startServer();
    await waitReady();

    const revived = new ReviewClient(BASE);
    const afterRestart = await revived.stats();
    expect(afterRestart.get("accepted")).toBe("3");
    expect(afterRestart.get("rejected")).toBe("2");
    expect(afterRestart.get("pending")).toBe("5");
    expect(await revived.exportAccepted()).toBe(exported);

    const page = await revived.predictions("pending", 0, 20);
    expect(page.total).toBe(5);
    expect(page.items.map((p) => p.head)).toEqual(["item5", "item6", "item7", "item8", "item9"]);
  }, 60000);
});
