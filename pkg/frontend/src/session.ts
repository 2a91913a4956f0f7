// Psychophysics session screen: trial progress, play control, and the five
// rating buttons. Buttons are enabled only while a stimulus is playing;
// a press in the inter-trial gap must not post anything.

import { el } from "./dom.js";
import type { ConsoleViewState } from "./state.js";

export const RATING_LABELS = [
  "No feeling", "Faint feeling", "Moderate feeling", "Slight discomfort", "Pain",
];

export interface SessionHandlers {
  onStart(): void;
  onAdvance(): void;
  onRate(rating: number): void;
}

export function renderSessionPanel(
  doc: Document, state: ConsoleViewState, handlers: SessionHandlers,
): HTMLElement {
  const panel = el(doc, "section", { class: "session-panel" });
  const session = state.snapshot?.session ?? null;
  const connected = state.connection === "connected";

  if (!session) {
    const startBtn = el(doc, "button",
      { class: "session-start", disabled: !connected }, "Start session");
    startBtn.addEventListener("click", () => {
      if (connected) handlers.onStart();
    });
    panel.append(el(doc, "p", {}, "No session running."), startBtn);
    return panel;
  }

  if (session.status === "complete") {
    panel.append(el(doc, "p", { class: "session-complete" },
      `Session complete: ${session.completed} / ${session.total} trials.`));
    return panel;
  }

  const trial = state.pendingTrial;
  const shown = trial ? trial.trial + 1 : session.completed + 1;
  panel.append(el(doc, "p", { class: "progress" },
    `${shown} / ${session.total}`));

  const playBtn = el(doc, "button", {
    class: "advance",
    disabled: !connected || session.status === "playing",
  }, "Play stimulus");
  playBtn.addEventListener("click", () => {
    if (connected && session.status !== "playing") handlers.onAdvance();
  });
  panel.append(playBtn);

  const ratingsEnabled = state.ratingEnabled && connected;
  const row = el(doc, "div", { class: "ratings" });
  RATING_LABELS.forEach((label, index) => {
    const rating = index + 1;
    const btn = el(doc, "button", {
      class: "rating",
      "data-rating": String(rating),
      disabled: !ratingsEnabled,
    }, label);
    btn.addEventListener("click", () => {
      // guard again at dispatch: a click during the gap must be a no-op
      if (state.ratingEnabled && state.connection === "connected") {
        handlers.onRate(rating);
      }
    });
    row.append(btn);
  });
  panel.append(row);
  return panel;
}
