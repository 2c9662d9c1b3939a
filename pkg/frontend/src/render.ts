import type { Screen } from "./types.js";
import { ratedStimuli, referenceStimulus } from "./types.js";
import type { ScreenState } from "./session.js";

// Raters must not be able to tell the stimuli apart by anything but sound:
// every rated row gets byte-identical markup apart from the stimulus id and
// its positional label. Roles, pair names, and wav paths stay out of the DOM.

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function ratedRow(id: string, position: number, state: ScreenState): string {
  const value = state.sliders[id] ?? 50;
  const played = state.played.has(id);
  const settled = state.settled.has(id);
  const esc = escapeHtml(id);
  return (
    `<div class="stimulus" data-stim="${esc}">` +
    `<button type="button" class="play" data-play="${esc}">Play</button>` +
    `<span class="label">Sound ${position}</span>` +
    `<input type="range" class="slider" min="0" max="100" step="1"` +
    ` value="${value}" data-slider="${esc}">` +
    `<output class="value">${value}</output>` +
    `<button type="button" class="confirm" data-confirm="${esc}">Keep ${value}</button>` +
    `<span class="status">${played ? "heard" : "not played"} / ${
      settled ? "rated" : "unrated"
    }</span>` +
    `</div>`
  );
}

export function renderScreen(
  screen: Screen,
  state: ScreenState,
  index: number,
  total: number,
  complete: boolean,
): string {
  const ref = referenceStimulus(screen);
  const rows = ratedStimuli(screen)
    .map((st, i) => ratedRow(st.id, i + 1, state))
    .join("");
  const nextLabel = index + 1 === total ? "Finish" : "Next screen";
  return (
    `<section class="screen" data-screen="${escapeHtml(screen.screen_id)}">` +
    `<p class="progress">Screen ${index + 1} of ${total}</p>` +
    `<p class="instructions">Evaluate the phonetic accuracy of the synthesis.</p>` +
    `<div class="reference-row">` +
    `<button type="button" class="play reference-play" data-play="${escapeHtml(
      ref.id,
    )}">Play reference</button>` +
    `<span class="label">Reference</span>` +
    `</div>` +
    rows +
    `<button type="button" class="next" data-next` +
    `${complete ? "" : " disabled"}>${nextLabel}</button>` +
    `</section>`
  );
}

export function renderError(message: string): string {
  return (
    `<section class="blocking-error">` +
    `<h1>Cannot start the study</h1>` +
    `<p>${escapeHtml(message)}</p>` +
    `</section>`
  );
}

export function renderSubmit(
  raterId: string,
  nScreens: number,
  submitUrl: string | null,
): string {
  const post = submitUrl
    ? `<button type="button" class="submit" data-submit>Submit scores</button>`
    : "";
  return (
    `<section class="submit-view">` +
    `<h1>All ${nScreens} screens complete</h1>` +
    `<p>Rater: ${escapeHtml(raterId)}</p>` +
    post +
    `<button type="button" class="download" data-download>Download scores JSON</button>` +
    `<p class="submit-status" data-status></p>` +
    `</section>`
  );
}

export function renderUnfinished(unfinished: string[]): string {
  const items = unfinished
    .map((id) => `<li>${escapeHtml(id)}</li>`)
    .join("");
  return (
    `<section class="blocking-error">` +
    `<h1>Session incomplete</h1>` +
    `<p>Finish these screens first:</p><ul>${items}</ul>` +
    `</section>`
  );
}
