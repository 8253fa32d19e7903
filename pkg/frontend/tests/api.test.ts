import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { SessionState } from "../src/session.js";
import fixture from "./fixtures/server_fixture.json";

interface Call {
  url: string;
  body?: unknown;
  resolve: (r: Response) => void;
  reject: (e: Error) => void;
}

/** fetch double that parks every request until the test releases it */
function manualFetch() {
  const calls: Call[] = [];
  const fetchFn = (input: RequestInfo | URL, init?: RequestInit) =>
    new Promise<Response>((resolve, reject) => {
      calls.push({
        url: String(input),
        body: init?.body ? JSON.parse(String(init.body)) : undefined,
        resolve,
        reject,
      });
    });
  return { calls, fetchFn };
}

function json(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "content-type": "application/json" },
  });
}

const settle = () => new Promise((r) => setTimeout(r, 0));

describe("evaluate queueing", () => {
  it("keeps at most one request in flight, in commit order", async () => {
    const { calls, fetchFn } = manualFetch();
    const client = new ApiClient("http://srv", "tab1", fetchFn);
    const first = client.evaluate([0.1]);
    const second = client.evaluate([0.2]);
    await settle();
    expect(calls.length).toBe(1);
    expect(calls[0].body).toEqual({ vector: [0.1] });

    calls[0].resolve(json({ fitness: 5, covered: 1, coverage_map: "" }));
    await first;
    await settle();
    expect(calls.length).toBe(2);
    expect(calls[1].body).toEqual({ vector: [0.2] });
    calls[1].resolve(json({ fitness: 4, covered: 2, coverage_map: "" }));
    expect((await second).fitness).toBe(4);
  });

  it("a failure rejects its caller but the queue survives", async () => {
    const { calls, fetchFn } = manualFetch();
    const client = new ApiClient("http://srv", "tab1", fetchFn);
    const state = new SessionState();

    const first = client.evaluate([0.1]).then((d) => state.applyResult(d.fitness));
    const second = client.evaluate([0.2]).then((d) => state.applyResult(d.fitness));
    await settle();
    calls[0].reject(new TypeError("network down"));
    await expect(first).rejects.toThrow("network down");
    expect(state.evaluations).toBe(0); // nothing recorded for the lost commit

    await settle();
    calls[1].resolve(json({ fitness: 7, covered: 3, coverage_map: "" }));
    await second;
    expect(state.evaluations).toBe(1);
    expect(state.bestSoFar).toBe(7);
  });

  it("surfaces server rejections with status and detail", async () => {
    const { calls, fetchFn } = manualFetch();
    const client = new ApiClient("http://srv", "tab1", fetchFn);
    const p = client.evaluate([0.5]);
    await settle();
    calls[0].resolve(json({ detail: "vector entries outside [0, 1]" }, 400));
    const err = await p.catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.message).toMatch(/outside/);
  });
});

describe("round-trip display values", () => {
  it("shows exactly the fitness the server computed", async () => {
    const { calls, fetchFn } = manualFetch();
    const client = new ApiClient("", "fix", fetchFn);
    const state = new SessionState();
    const doc = fixture.evaluations[0];
    const p = client.evaluate(doc.vector).then((d) => {
      state.applyResult(d.fitness);
      return d;
    });
    await settle();
    calls[0].resolve(json({
      fitness: doc.fitness,
      covered: doc.covered,
      coverage_map: doc.coverage_map,
    }));
    expect((await p).fitness).toBe(doc.fitness);
    expect(state.bestSoFar).toBe(doc.fitness);
  });
});

describe("session log export", () => {
  it("returns the server text byte for byte", async () => {
    const { calls, fetchFn } = manualFetch();
    const client = new ApiClient("http://srv", "fix", fetchFn);
    const p = client.sessionLog();
    await settle();
    calls[0].resolve(new Response(fixture.session_log, { status: 200 }));
    expect(await p).toBe(fixture.session_log);
    expect(calls[0].url).toBe("http://srv/session/log?session=fix");
  });
});

describe("url construction", () => {
  it("tags session endpoints and encodes the id", async () => {
    const { calls, fetchFn } = manualFetch();
    const client = new ApiClient("http://srv/", "a+b", fetchFn);
    void client.terrain();
    void client.sessionLog();
    void client.trajectoryCsv("DE");
    await settle();
    expect(calls.map((c) => c.url)).toEqual([
      "http://srv/terrain",
      "http://srv/session/log?session=a%2Bb",
      "http://srv/trajectories/DE.csv",
    ]);
  });

  it("missing trajectory logs turn into ApiError 404", async () => {
    const { calls, fetchFn } = manualFetch();
    const client = new ApiClient("http://srv", "x", fetchFn);
    const p = client.trajectoryCsv("PSO");
    await settle();
    calls[0].resolve(json({ detail: "no logs for ridge3/PSO" }, 404));
    const err = await p.catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
  });
});
