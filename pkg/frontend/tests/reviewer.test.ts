import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ReviewerSession } from "../src/reviewer.js";
import { ItemTimer } from "../src/timer.js";
import { MockServer, makePair } from "./mock_server.js";

function makeSession(server: MockServer, clock?: () => number) {
  let counter = 0;
  const api = new ApiClient("http://mock", server.fetchFn);
  return new ReviewerSession(
    api,
    "ann1",
    new ItemTimer(clock ?? (() => 0)),
    () => `key-${++counter}`,
  );
}

describe("ReviewerSession", () => {
  it("score buttons map exactly to payload values", async () => {
    for (const value of [0, 1, 2, 3] as const) {
      const server = new MockServer();
      server.reviewQueue.push(makePair(1));
      const session = makeSession(server);
      await session.next();
      session.selectScore(value);
      await session.submit();
      expect(server.scores[0]?.score).toBe(value);
    }
  });

  it("bad-HS toggle rides along regardless of score", async () => {
    const server = new MockServer();
    server.reviewQueue.push(makePair(1));
    const session = makeSession(server);
    await session.next();
    session.selectScore(3);
    session.toggleBadHs();
    await session.submit();
    expect(server.scores[0]).toMatchObject({ score: 3, bad_hs: true });
  });

  it("payload carries only user-selected values plus timing", async () => {
    let now = 10_000;
    const server = new MockServer();
    server.reviewQueue.push(makePair(7));
    const session = makeSession(server, () => now);
    await session.next(); // timer starts on render
    now += 21_500;
    session.selectScore(1);
    await session.submit(); // timer stops on submit
    const payload = server.scores[0]!;
    expect(Object.keys(payload).sort()).toEqual([
      "annotator_id", "bad_hs", "elapsed", "idempotency_key", "pair_id", "score",
    ]);
    expect(payload.pair_id).toBe("pair-7");
    expect(payload.annotator_id).toBe("ann1");
    expect(Math.abs(payload.elapsed - 21.5)).toBeLessThanOrEqual(0.5);
  });

  it("cannot submit without a score; cannot revise after submit", async () => {
    const server = new MockServer();
    server.reviewQueue.push(makePair(1));
    const session = makeSession(server);
    await session.next();
    expect(session.canSubmit).toBe(false);
    await expect(session.submit()).rejects.toThrow();
    session.selectScore(2);
    await session.submit();
    expect(() => session.selectScore(3)).toThrow(); // item gone, no revision
    expect(server.scores).toHaveLength(1);
  });

  it("progress counts only server-acknowledged submissions", async () => {
    const server = new MockServer();
    server.reviewQueue.push(makePair(1), makePair(2));
    const session = makeSession(server);
    await session.next();
    session.selectScore(2);
    await session.submit();
    expect(session.state.acked).toBe(1);
    await session.next();
    expect(session.state.acked).toBe(1);
  });

  it("offline submit is retried once connectivity returns, without duplicates", async () => {
    const server = new MockServer();
    server.reviewQueue.push(makePair(1));
    const session = makeSession(server);
    await session.next();
    session.selectScore(2);

    server.offline = true; // request never reaches the server
    const ack = await session.submit();
    expect(ack).toBeNull();
    expect(session.state.pendingSubmissions).toBe(1);
    expect(session.state.acked).toBe(0);
    expect(server.scores).toHaveLength(0);

    server.offline = false; // connectivity returns
    expect(await session.flushPending()).toBe(1);
    expect(session.state.acked).toBe(1);
    expect(session.state.pendingSubmissions).toBe(0);
    expect(server.scores).toHaveLength(1);

    // replaying the flush does nothing further
    expect(await session.flushPending()).toBe(0);
    expect(server.scores).toHaveLength(1);
  });

  it("lost response does not create a duplicate record (same idempotency key)", async () => {
    const server = new MockServer();
    server.reviewQueue.push(makePair(1));
    const session = makeSession(server);
    await session.next();
    session.selectScore(1);

    server.dropResponses = true; // server commits, client never hears back
    const ack = await session.submit();
    expect(ack).toBeNull();
    expect(server.scores).toHaveLength(1); // committed server-side

    server.dropResponses = false;
    await session.flushPending(); // retry reuses the same key
    expect(server.scores).toHaveLength(1); // deduped: one logical record
    const keys = server.requests
      .filter((r) => r.path === "/review/score")
      .map((r) => (r.body as { idempotency_key: string }).idempotency_key);
    expect(keys).toHaveLength(2);
    expect(new Set(keys).size).toBe(1);
  });

  it("reaches done when the queue is exhausted", async () => {
    const server = new MockServer();
    server.reviewQueue.push(makePair(1));
    const session = makeSession(server);
    await session.next();
    session.selectScore(0);
    await session.submit();
    expect(await session.next()).toBeNull();
    expect(session.state.phase).toBe("done");
  });

  it("refuses a second active item", async () => {
    const server = new MockServer();
    server.reviewQueue.push(makePair(1), makePair(2));
    const session = makeSession(server);
    await session.next();
    await expect(session.next()).rejects.toThrow(/already active/);
  });
});
