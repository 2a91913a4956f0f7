// Per-channel stimulus controls and the amplitude slider.
//
// Sliders snap to the study grid by default (free entry behind the expert
// toggle), and the amplitude control reads its maximum from the service
// limits: the console cannot even submit a value above the cap, and the
// server would reject it anyway.

import { el } from "./dom.js";
import type { ConsoleViewState } from "./state.js";

export const FREQUENCY_GRID_HZ = [10, 25, 50, 100, 500];
export const DUTY_GRID = [0.02, 0.05, 0.10, 0.25, 0.50];

export function snapFrequency(value: number): number {
  let best = FREQUENCY_GRID_HZ[0];
  for (const f of FREQUENCY_GRID_HZ) {
    if (Math.abs(Math.log(value / f)) < Math.abs(Math.log(value / best))) best = f;
  }
  return best;
}

export function snapDuty(value: number): number {
  let best = DUTY_GRID[0];
  for (const d of DUTY_GRID) {
    if (Math.abs(value - d) < Math.abs(value - best)) best = d;
  }
  return best;
}

export function clampAmplitude(requested: number, maxAmplitudeMa: number): number {
  return Math.min(Math.max(requested, 0), maxAmplitudeMa);
}

export interface ControlHandlers {
  onStartPattern(p: { channel: number; frequency_hz: number; duty: number }): void;
  onStopChannel(channel: number): void;
  onStopAll(): void;
  onSetAmplitude(amplitudeMa: number): void;
}

export function renderControls(
  doc: Document, state: ConsoleViewState, handlers: ControlHandlers,
): HTMLElement {
  const root = el(doc, "section", { class: "controls" });
  const connected = state.connection === "connected";
  const limits = state.snapshot?.limits;
  const maxMa = limits ? limits.max_amplitude_ma : 0;

  const channel = state.selectedChannel;
  const header = channel === null
    ? "Select an electrode on the hand map"
    : `Channel ${channel}`;
  root.append(el(doc, "h3", {}, header));

  const expertToggle = el(doc, "input",
    { class: "expert-mode", type: "checkbox" }) as HTMLInputElement;
  root.append(el(doc, "label", {}, expertToggle, " expert (free entry)"));

  const freqInput = el(doc, "input", {
    class: "frequency", type: "range", min: "0",
    max: String(FREQUENCY_GRID_HZ.length - 1), step: "1", value: "2",
    disabled: !connected || channel === null,
  }) as HTMLInputElement;
  const freqFree = el(doc, "input", {
    class: "frequency-free", type: "number", min: "1", max: "10000",
    value: "50", hidden: true,
  }) as HTMLInputElement;
  const dutyInput = el(doc, "input", {
    class: "duty", type: "range", min: "0",
    max: String(DUTY_GRID.length - 1), step: "1", value: "2",
    disabled: !connected || channel === null,
  }) as HTMLInputElement;
  const dutyFree = el(doc, "input", {
    class: "duty-free", type: "number", min: "0.001", max: "0.999",
    step: "0.001", value: "0.1", hidden: true,
  }) as HTMLInputElement;
  expertToggle.addEventListener("change", () => {
    freqFree.hidden = !expertToggle.checked;
    dutyFree.hidden = !expertToggle.checked;
    freqInput.hidden = expertToggle.checked;
    dutyInput.hidden = expertToggle.checked;
  });
  root.append(
    el(doc, "label", {}, "frequency ", freqInput, freqFree),
    el(doc, "label", {}, "duty ", dutyInput, dutyFree),
  );

  const startBtn = el(doc, "button", {
    class: "start-pattern", disabled: !connected || channel === null,
  }, "Start");
  startBtn.addEventListener("click", () => {
    if (!connected || channel === null) return;
    const frequency = expertToggle.checked
      ? Number(freqFree.value)
      : FREQUENCY_GRID_HZ[Number(freqInput.value)];
    const duty = expertToggle.checked
      ? Number(dutyFree.value)
      : DUTY_GRID[Number(dutyInput.value)];
    handlers.onStartPattern({ channel, frequency_hz: frequency, duty });
  });
  const stopBtn = el(doc, "button", {
    class: "stop-channel", disabled: !connected || channel === null,
  }, "Stop");
  stopBtn.addEventListener("click", () => {
    if (connected && channel !== null) handlers.onStopChannel(channel);
  });
  const stopAllBtn = el(doc, "button",
    { class: "stop-all", disabled: !connected }, "Stop all");
  stopAllBtn.addEventListener("click", () => {
    if (connected) handlers.onStopAll();
  });
  root.append(startBtn, stopBtn, stopAllBtn);

  // amplitude: slider maximum mirrors the service limit
  const ampInput = el(doc, "input", {
    class: "amplitude", type: "range", min: "0.1",
    max: String(maxMa), step: "0.1",
    value: String(state.snapshot?.calibrated_amplitude_ma ?? 1.0),
    disabled: !connected || !limits,
  }) as HTMLInputElement;
  const ampBtn = el(doc, "button",
    { class: "apply-amplitude", disabled: !connected || !limits }, "Set amplitude");
  ampBtn.addEventListener("click", () => {
    if (!connected || !limits) return;
    handlers.onSetAmplitude(clampAmplitude(Number(ampInput.value), maxMa));
  });
  root.append(el(doc, "label", {}, "amplitude (mA) ", ampInput), ampBtn);
  return root;
}
