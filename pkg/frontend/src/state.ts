// View-model for the chat panel.  Pure functions only: every DOM write
// goes through bars.ts / scatter.ts, so rendering stays a projection of
// the last service response -- no client-side smoothing of
// probabilities, ever.

import type { Confidences, UtteranceResult } from "./api.js";

export const NEW_SENSE_THRESHOLD = 0.1;
export const BAR_SUM_TOLERANCE = 1e-6;

export interface TranscriptEntry {
  role: "own" | "other" | "service";
  text: string;
  turn: number | null;
}

export interface ViewState {
  focusLabel: string;
  transcript: TranscriptEntry[];
  bars: Record<string, number>;
  newSenseBanner: string | null;
}

export function initialView(focusLabel: string): ViewState {
  return { focusLabel, transcript: [], bars: {}, newSenseBanner: null };
}

export function isSpawnedSense(senseId: string): boolean {
  return senseId.startsWith("new@");
}

/** Banner sense: the strongest spawned sense strictly above threshold. */
export function bannerSense(
  bars: Record<string, number>,
  threshold = NEW_SENSE_THRESHOLD,
): string | null {
  let best: string | null = null;
  let bestConf = threshold;
  for (const [sid, conf] of Object.entries(bars)) {
    if (isSpawnedSense(sid) && conf > bestConf) {
      best = sid;
      bestConf = conf;
    }
  }
  return best;
}

export function barsSumValid(bars: Record<string, number>): boolean {
  const total = Object.values(bars).reduce((a, b) => a + b, 0);
  return Math.abs(total - 1.0) <= BAR_SUM_TOLERANCE;
}

export function applyUtterance(
  state: ViewState,
  role: "own" | "other",
  text: string,
  result: UtteranceResult,
): ViewState {
  const bars = { ...(result.confidences[state.focusLabel] ?? {}) };
  return {
    ...state,
    transcript: [...state.transcript, { role, text, turn: result.turn - 1 }],
    bars,
    newSenseBanner: bannerSense(bars),
  };
}

/** Refresh bars from a GET response without touching the transcript. */
export function applyConfidences(state: ViewState, confidences: Confidences): ViewState {
  const bars = { ...(confidences[state.focusLabel] ?? {}) };
  return { ...state, bars, newSenseBanner: bannerSense(bars) };
}

export function applyServiceError(state: ViewState, message: string): ViewState {
  return {
    ...state,
    transcript: [...state.transcript, { role: "service", text: message, turn: null }],
  };
}

export function canSend(text: string, busy: boolean): boolean {
  return !busy && text.trim().length > 0;
}
