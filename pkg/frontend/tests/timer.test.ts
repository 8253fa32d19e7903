import { describe, expect, it } from "vitest";

import { SessionTimer, formatClock } from "../src/timer.js";

function clock(start = 0) {
  let t = start;
  return {
    now: () => t,
    advance: (seconds: number) => {
      t += seconds * 1000;
    },
  };
}

describe("session timer", () => {
  it("defaults to thirty minutes", () => {
    expect(new SessionTimer().durationSeconds).toBe(1800);
  });

  it("counts down from a configurable duration", () => {
    const c = clock();
    const t = new SessionTimer(300, () => {}, c.now);
    t.start();
    expect(t.remainingSeconds()).toBe(300);
    c.advance(120);
    t.tick();
    expect(t.remainingSeconds()).toBe(180);
    expect(t.expired).toBe(false);
    expect(t.running).toBe(true);
  });

  it("expires once and stays expired", () => {
    const c = clock();
    let fired = 0;
    const t = new SessionTimer(60, () => fired++, c.now);
    t.start();
    c.advance(59.9);
    t.tick();
    expect(t.expired).toBe(false);
    c.advance(0.2);
    t.tick();
    expect(t.expired).toBe(true);
    expect(fired).toBe(1);
    c.advance(1000);
    t.tick();
    expect(fired).toBe(1);
    expect(t.running).toBe(false);
  });

  it("clamps elapsed and remaining at the boundaries", () => {
    const c = clock();
    const t = new SessionTimer(30, () => {}, c.now);
    expect(t.elapsedSeconds()).toBe(0); // not started
    t.start();
    c.advance(500);
    t.tick();
    expect(t.elapsedSeconds()).toBe(30);
    expect(t.remainingSeconds()).toBe(0);
  });

  it("ignores ticks before start", () => {
    const t = new SessionTimer(10, () => {
      throw new Error("must not fire");
    });
    t.tick();
    expect(t.expired).toBe(false);
  });

  it("rejects a non-positive duration", () => {
    expect(() => new SessionTimer(0)).toThrow(/positive/);
  });
});

describe("clock formatting", () => {
  it("renders minutes and zero-padded seconds", () => {
    expect(formatClock(1800)).toBe("30:00");
    expect(formatClock(65)).toBe("1:05");
    expect(formatClock(0)).toBe("0:00");
    expect(formatClock(0.4)).toBe("0:01"); // round up, never show 0 early
  });
});
