// Console view state and its reducer. All updates flow through reduce()
// so the two safety invariants live in one place: the rendered revision
// never goes backwards, and nothing is interactable while disconnected.
// Channel activity is only ever taken from server snapshots (no optimistic
// UI for safety-relevant controls).

import type { DeviceSnapshot, TrialPrompt } from "./api.js";

export type Connection = "connecting" | "connected" | "disconnected";

export interface ConsoleViewState {
  connection: Connection;
  revision: number;
  snapshot: DeviceSnapshot | null;
  selectedChannel: number | null;
  pendingTrial: TrialPrompt | null;
  ratingEnabled: boolean;
}

export type ConsoleAction =
  | { kind: "connected" }
  | { kind: "disconnected" }
  | { kind: "snapshot"; snapshot: DeviceSnapshot }
  | { kind: "trial"; prompt: TrialPrompt | null }
  | { kind: "select-channel"; channel: number | null }
  | { kind: "rating-submitted" };

export function initialState(): ConsoleViewState {
  return {
    connection: "connecting",
    revision: -1,
    snapshot: null,
    selectedChannel: null,
    pendingTrial: null,
    ratingEnabled: false,
  };
}

export function controlsEnabled(state: ConsoleViewState): boolean {
  return state.connection === "connected";
}

export function activeChannels(state: ConsoleViewState): Set<number> {
  const active = new Set<number>();
  if (state.snapshot) {
    for (const key of Object.keys(state.snapshot.plan.patterns)) {
      active.add(Number(key));
    }
  }
  return active;
}

export function reduce(state: ConsoleViewState, action: ConsoleAction): ConsoleViewState {
  switch (action.kind) {
    case "connected":
      return { ...state, connection: "connected" };
    case "disconnected":
      // stale interactivity is worse than a frozen screen
      return { ...state, connection: "disconnected", ratingEnabled: false };
    case "snapshot": {
      if (action.snapshot.revision < state.revision) {
        return state; // rendered revision never decreases
      }
      return { ...state, snapshot: action.snapshot, revision: action.snapshot.revision };
    }
    case "trial": {
      const prompt = action.prompt;
      return {
        ...state,
        pendingTrial: prompt,
        ratingEnabled: state.connection === "connected" &&
          prompt !== null && prompt.status === "playing",
      };
    }
    case "select-channel":
      return { ...state, selectedChannel: action.channel };
    case "rating-submitted":
      return { ...state, ratingEnabled: false };
    default:
      return state;
  }
}
