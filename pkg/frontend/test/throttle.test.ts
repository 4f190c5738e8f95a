import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { throttle } from "../src/throttle.js";

beforeEach(() => vi.useFakeTimers());
afterEach(() => vi.useRealTimers());

describe("throttle", () => {
  it("caps the call rate and keeps the trailing call", async () => {
    let calls = 0;
    const t = throttle(() => calls++, 100);
    t(); // leading call runs immediately
    expect(calls).toBe(1);
    t();
    t();
    t();
    expect(calls).toBe(1);
    expect(t.pending()).toBe(true);
    await vi.advanceTimersByTimeAsync(100);
    expect(calls).toBe(2); // the burst coalesced into one trailing call
  });

  it("allows one call per window under sustained pressure", async () => {
    let calls = 0;
    const t = throttle(() => calls++, 100);
    for (let k = 0; k < 100; k++) {
      t();
      await vi.advanceTimersByTimeAsync(10);
    }
    expect(calls).toBeGreaterThanOrEqual(10);
    expect(calls).toBeLessThanOrEqual(11);
  });

  it("flush runs the pending call immediately", () => {
    let calls = 0;
    const t = throttle(() => calls++, 1000);
    t();
    t();
    expect(calls).toBe(1);
    t.flush();
    expect(calls).toBe(2);
    t.flush(); // nothing pending: no-op
    expect(calls).toBe(2);
  });

  it("cancel drops the pending call", async () => {
    let calls = 0;
    const t = throttle(() => calls++, 100);
    t();
    t();
    t.cancel();
    await vi.advanceTimersByTimeAsync(500);
    expect(calls).toBe(1);
  });
});
