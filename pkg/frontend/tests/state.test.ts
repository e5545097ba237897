import { describe, expect, it } from "vitest";

import type { UtteranceResult } from "../src/api.js";
import {
  applyConfidences,
  applyServiceError,
  applyUtterance,
  bannerSense,
  barsSumValid,
  canSend,
  initialView,
} from "../src/state.js";

function result(bars: Record<string, number>, turn = 1): UtteranceResult {
  return { turn, confidences: { mouse: bars }, best: {} };
}

describe("bars", () => {
  it("equal the service response exactly, no smoothing", () => {
    let view = initialView("mouse");
    view = applyUtterance(view, "other", "a b", result({ rodent: 0.3, device: 0.7 }));
    expect(view.bars).toEqual({ rodent: 0.3, device: 0.7 });
    // a second response fully replaces the first, no blending with old values
    view = applyUtterance(view, "other", "c", result({ rodent: 0.9, device: 0.1 }, 2));
    expect(view.bars).toEqual({ rodent: 0.9, device: 0.1 });
  });

  it("sum validator accepts 1 within 1e-6 and rejects beyond", () => {
    expect(barsSumValid({ a: 0.5, b: 0.5 })).toBe(true);
    expect(barsSumValid({ a: 0.5, b: 0.5 + 5e-7 })).toBe(true);
    expect(barsSumValid({ a: 0.5, b: 0.51 })).toBe(false);
  });

  it("refresh from GET keeps the transcript untouched", () => {
    let view = applyUtterance(
      initialView("mouse"), "own", "hi", result({ rodent: 1.0 }),
    );
    view = applyConfidences(view, { mouse: { rodent: 0.4, device: 0.6 } });
    expect(view.bars).toEqual({ rodent: 0.4, device: 0.6 });
    expect(view.transcript).toHaveLength(1);
  });
});

describe("new-sense banner", () => {
  it("appears iff a spawned sense exceeds the threshold", () => {
    expect(bannerSense({ rodent: 0.85, "new@4": 0.15 })).toBe("new@4");
    expect(bannerSense({ rodent: 0.95, "new@4": 0.05 })).toBeNull();
    // exactly at threshold does not trigger
    expect(bannerSense({ rodent: 0.9, "new@4": 0.1 })).toBeNull();
    // inventory senses never trigger it, however confident
    expect(bannerSense({ rodent: 0.99, device: 0.01 })).toBeNull();
  });

  it("picks the strongest spawned sense", () => {
    expect(bannerSense({ "new@2": 0.2, "new@7": 0.5, rodent: 0.3 })).toBe("new@7");
  });

  it("is set by applyUtterance from the response bars", () => {
    const view = applyUtterance(
      initialView("mouse"), "other", "x", result({ rodent: 0.6, "new@3": 0.4 }),
    );
    expect(view.newSenseBanner).toBe("new@3");
  });
});

describe("transcript and input gating", () => {
  it("appends entries in order with the engine turn index", () => {
    let view = initialView("mouse");
    view = applyUtterance(view, "other", "first", result({ rodent: 1 }, 1));
    view = applyUtterance(view, "own", "second", result({ rodent: 1 }, 2));
    expect(view.transcript.map((e) => e.text)).toEqual(["first", "second"]);
    expect(view.transcript.map((e) => e.turn)).toEqual([0, 1]);
  });

  it("service errors are surfaced inline", () => {
    const view = applyServiceError(initialView("mouse"), "boom");
    expect(view.transcript).toEqual([{ role: "service", text: "boom", turn: null }]);
  });

  it("send is disabled for empty input or while busy", () => {
    expect(canSend("", false)).toBe(false);
    expect(canSend("   ", false)).toBe(false);
    expect(canSend("hello", true)).toBe(false);
    expect(canSend("hello", false)).toBe(true);
  });
});
