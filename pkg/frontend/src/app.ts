// Console controller: owns the view state, talks to the service through
// the typed client, and re-renders the three panels. The console is
// read-mostly and stateless across reloads; every truth lives in the
// service and a refresh resumes from the snapshot.

import { ServiceClient, ServiceError, type FetchLike, type TrialPrompt } from "./api.js";
import { clampAmplitude, renderControls } from "./controls.js";
import { clear, el } from "./dom.js";
import { renderHandMap } from "./handmap.js";
import { renderSessionPanel } from "./session.js";
import {
  activeChannels, ConsoleViewState, controlsEnabled, initialState, reduce,
  type ConsoleAction,
} from "./state.js";
import { subscribeEvents } from "./stream.js";

export interface AppRoots {
  map: Element;
  session: Element;
  controls: Element;
  status: Element;
}

export class ConsoleApp {
  state: ConsoleViewState = initialState();
  readonly client: ServiceClient;
  private layout: unknown = null;
  private layoutError: string | null = null;

  constructor(
    private readonly doc: Document,
    private readonly roots: AppRoots,
    baseUrl: string,
    private readonly fetchImpl?: FetchLike,
  ) {
    this.client = new ServiceClient(baseUrl, fetchImpl);
  }

  dispatch(action: ConsoleAction): void {
    this.state = reduce(this.state, action);
    this.render();
  }

  async connect(): Promise<void> {
    try {
      this.layout = await this.client.getLayout();
      this.layoutError = null;
    } catch (err) {
      this.layout = null;
      this.layoutError = err instanceof ServiceError ? err.message : String(err);
    }
    await this.refresh();
    this.dispatch({ kind: "connected" });
    const session = this.state.snapshot?.session;
    if (session?.prompt) {
      this.dispatch({ kind: "trial", prompt: session.prompt });
    }
  }

  async refresh(): Promise<void> {
    const snapshot = await this.client.getState();
    this.dispatch({ kind: "snapshot", snapshot });
  }

  /** Run the single event-stream subscription until the signal aborts. */
  async runStream(signal?: AbortSignal): Promise<void> {
    try {
      await subscribeEvents(
        this.client.baseUrl + "/api/stream",
        this.fetchImpl ?? ((url, init) => fetch(url, init)),
        (event) => {
          if (event.type === "state" || event.type === "trial") {
            void this.refresh();
          }
          if (event.type === "trial") {
            this.dispatch({
              kind: "trial",
              prompt: (event.data.prompt ?? null) as TrialPrompt | null,
            });
          }
        },
        signal,
      );
    } finally {
      this.dispatch({ kind: "disconnected" });
    }
  }

  // -- user intents (all confirmed by a server round-trip before any
  //    "active" styling changes) -------------------------------------------

  async clickElectrode(id: number): Promise<void> {
    this.dispatch({ kind: "select-channel", channel: id });
    const active = activeChannels(this.state).has(id);
    await this.client.submitEvent({
      schema: "contact/1",
      electrode: id,
      level: 3,
      kind: active ? "end" : "begin",
      timestamp_ms: Date.now() % 1e9,
    });
    await this.refresh();
  }

  async startPattern(p: { channel: number; frequency_hz: number; duty: number }):
      Promise<void> {
    await this.client.startPattern(p);
    await this.refresh();
  }

  async stopChannel(channel: number): Promise<void> {
    await this.client.stopChannel(channel);
    await this.refresh();
  }

  async stopAll(): Promise<void> {
    await this.client.stopAll();
    await this.refresh();
  }

  async setAmplitude(requestedMa: number): Promise<void> {
    const limit = this.state.snapshot?.limits.max_amplitude_ma;
    if (limit === undefined) return;
    // UI-level guard: never submit above the service limit
    await this.client.setAmplitude(clampAmplitude(requestedMa, limit));
    await this.refresh();
  }

  async startSession(config: Record<string, unknown> = {}): Promise<void> {
    const { prompt } = await this.client.sessionStart(config);
    await this.refresh();
    this.dispatch({ kind: "trial", prompt });
  }

  async advanceTrial(): Promise<void> {
    const { prompt } = await this.client.sessionAdvance();
    await this.refresh();
    this.dispatch({ kind: "trial", prompt });
  }

  async rate(rating: number): Promise<void> {
    const trial = this.state.pendingTrial;
    if (!trial || !this.state.ratingEnabled) return;
    this.dispatch({ kind: "rating-submitted" });
    try {
      const { prompt } = await this.client.sessionRate(trial.trial, rating);
      await this.refresh();
      this.dispatch({ kind: "trial", prompt });
    } catch (err) {
      if (err instanceof ServiceError && err.errorName === "OutOfOrder") {
        await this.refresh();  // resync; the banner shows the server truth
        this.showStatus(`Rating rejected: ${err.message}`);
        return;
      }
      throw err;
    }
  }

  private showStatus(text: string): void {
    clear(this.roots.status);
    this.roots.status.append(el(this.doc, "p", { class: "status-line" }, text));
  }

  render(): void {
    const enabled = controlsEnabled(this.state);
    clear(this.roots.status);
    this.roots.status.append(el(this.doc, "p", { class: "connection" },
      `${this.state.connection} (revision ${Math.max(this.state.revision, 0)})`));

    clear(this.roots.map);
    if (this.layoutError !== null) {
      this.roots.map.append(el(this.doc, "div", { class: "error-banner" },
        `Layout unavailable: ${this.layoutError}`));
    } else {
      this.roots.map.append(renderHandMap(
        this.doc, this.layout, activeChannels(this.state),
        { onElectrodeClick: (id) => void this.clickElectrode(id) }, enabled));
    }

    clear(this.roots.session);
    this.roots.session.append(renderSessionPanel(this.doc, this.state, {
      onStart: () => void this.startSession({}),
      onAdvance: () => void this.advanceTrial(),
      onRate: (rating) => void this.rate(rating),
    }));

    clear(this.roots.controls);
    this.roots.controls.append(renderControls(this.doc, this.state, {
      onStartPattern: (p) => void this.startPattern(p),
      onStopChannel: (channel) => void this.stopChannel(channel),
      onStopAll: () => void this.stopAll(),
      onSetAmplitude: (ma) => void this.setAmplitude(ma),
    }));
  }
}
