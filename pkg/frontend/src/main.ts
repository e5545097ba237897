// App wiring: one session per tab, requests serialized by disabling the
// send button while a POST is in flight.  After each utterance we poll
// GET /state once to refresh the particle cloud.

import { ApiError, SessionClient } from "./api.js";
import { renderBars } from "./bars.js";
import { markerModel, renderScatter } from "./scatter.js";
import {
  applyServiceError,
  applyUtterance,
  barsSumValid,
  canSend,
  initialView,
  type ViewState,
} from "./state.js";

const $ = <T extends HTMLElement>(id: string) =>
  document.getElementById(id) as T;

const baseInput = $<HTMLInputElement>("base-url");
const targetInput = $<HTMLInputElement>("target-label");
const connectBtn = $<HTMLButtonElement>("connect");
const roleSelect = $<HTMLSelectElement>("role");
const textInput = $<HTMLInputElement>("utterance");
const sendBtn = $<HTMLButtonElement>("send");
const transcriptEl = $<HTMLDivElement>("transcript");
const barsEl = $<HTMLDivElement>("bars");
const bannerEl = $<HTMLDivElement>("banner");
const scatterEl = $<HTMLCanvasElement>("scatter");

let client: SessionClient | null = null;
let view: ViewState = initialView("");
let busy = false;

function render() {
  transcriptEl.innerHTML = view.transcript
    .map((e) => {
      const who = e.role === "own" ? "me" : e.role === "other" ? "them" : "!";
      const cls = e.role === "service" ? "line error" : "line";
      return `<div class="${cls}"><b>${who}:</b> ${e.text}</div>`;
    })
    .join("");
  transcriptEl.scrollTop = transcriptEl.scrollHeight;

  if (!barsSumValid(view.bars) && Object.keys(view.bars).length > 0) {
    // should never happen; make it loud instead of silently rescaling
    console.error("confidence bars do not sum to 1", view.bars);
  }
  renderBars(barsEl, view.bars);

  bannerEl.hidden = view.newSenseBanner === null;
  bannerEl.textContent =
    view.newSenseBanner === null
      ? ""
      : `new interpretation forming: ${view.newSenseBanner}`;

  sendBtn.disabled = !canSend(textInput.value, busy) || client === null;
}

async function refreshScatter() {
  if (!client) return;
  const state = await client.state();
  renderScatter(
    scatterEl,
    markerModel(state.particles_2d, state.snapshot.particles, view.focusLabel),
  );
}

connectBtn.addEventListener("click", async () => {
  const target = targetInput.value.trim();
  if (!target) return;
  client = new SessionClient(baseInput.value.replace(/\/$/, ""));
  view = initialView(target);
  try {
    await client.create([target]);
    const { confidences } = await client.confidences(target);
    view = { ...view, bars: { ...(confidences[target] ?? {}) } };
    await refreshScatter();
  } catch (err) {
    view = applyServiceError(view, String(err));
    client = null;
  }
  render();
});

sendBtn.addEventListener("click", async () => {
  if (!client || !canSend(textInput.value, busy)) return;
  const role = roleSelect.value === "me" ? "own" : "other";
  const text = textInput.value.trim();
  busy = true;
  render();
  try {
    const result = await client.postUtterance(role, text);
    view = applyUtterance(view, role, text, result);
    textInput.value = "";
    await refreshScatter();
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      view = applyServiceError(view, "session gone -- reconnect to continue");
      client = null;
    } else {
      view = applyServiceError(view, String(err));
    }
  } finally {
    busy = false;
    render();
  }
});

textInput.addEventListener("input", render);
textInput.addEventListener("keydown", (e) => {
  if (e.key === "Enter" && !sendBtn.disabled) sendBtn.click();
});

render();
