// Typed client for the haptiforge service. Every request funnels through
// one fetch implementation so tests can interpose a recording proxy, and
// the console never talks to anything but these documented endpoints.

export interface PatternDoc {
  channel: number;
  frequency_hz: number;
  duty: number;
  amplitude_ma: number;
  duration_ms: number;
}

export interface SafetyLimitsDoc {
  max_amplitude_ma: number;
  supply_voltage_v: number;
  dead_time_us: number;
}

export interface TrialPrompt {
  trial: number;
  total: number;
  frequency_hz: number;
  duty: number;
  status: "ready" | "playing" | "complete";
}

export interface SessionDoc {
  participant_id: string;
  status: "ready" | "playing" | "complete";
  completed: number;
  total: number;
  prompt: TrialPrompt | null;
}

export interface DeviceSnapshot {
  revision: number;
  link: string;
  limits: SafetyLimitsDoc;
  calibrated_amplitude_ma: number;
  calibrating: boolean;
  plan: { revision: number; patterns: Record<string, PatternDoc> };
  schedule: Record<string, { requested_duty: number; realized_duty: number }>;
  session: SessionDoc | null;
}

export interface ContactEventDoc {
  schema: "contact/1";
  electrode: number;
  level: number;
  kind: "begin" | "update" | "end";
  timestamp_ms: number;
  frequency_hint_hz?: number;
}

export interface StaircaseStateDoc {
  level: number;
  reversals: number;
  result: number | null;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(public errorName: string, public status: number, detail: string) {
    super(`${errorName}: ${detail}`);
  }
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      let name = `HTTP${resp.status}`;
      let detail = resp.statusText;
      try {
        const doc = (await resp.json()) as { error?: string; detail?: string };
        name = doc.error ?? name;
        detail = doc.detail ?? detail;
      } catch {
        // non-JSON error body: keep the HTTP status text
      }
      throw new ServiceError(name, resp.status, detail);
    }
    const text = await resp.text();
    return text ? JSON.parse(text) : null;
  }

  getState(): Promise<DeviceSnapshot> {
    return this.request("GET", "/api/state") as Promise<DeviceSnapshot>;
  }

  getLayout(): Promise<unknown> {
    return this.request("GET", "/api/layout");
  }

  getSurface(): Promise<unknown> {
    return this.request("GET", "/api/surface");
  }

  getWaveform(durationMs: number): Promise<unknown> {
    return this.request("GET", `/api/waveform?duration_ms=${durationMs}`);
  }

  submitEvent(event: ContactEventDoc): Promise<{ revision: number }> {
    return this.request("POST", "/api/events", event) as Promise<{ revision: number }>;
  }

  startPattern(p: {
    channel: number; frequency_hz: number; duty: number;
    amplitude_ma?: number; duration_ms?: number;
  }): Promise<{ revision: number }> {
    return this.request("POST", "/api/patterns", p) as Promise<{ revision: number }>;
  }

  stopChannel(channel: number): Promise<{ revision: number }> {
    return this.request("POST", "/api/stop", { channel }) as Promise<{ revision: number }>;
  }

  stopAll(): Promise<{ revision: number }> {
    return this.request("POST", "/api/stop_all") as Promise<{ revision: number }>;
  }

  setAmplitude(amplitudeMa: number): Promise<{ revision: number }> {
    return this.request("POST", "/api/amplitude", { amplitude_ma: amplitudeMa }) as
      Promise<{ revision: number }>;
  }

  calibrationStart(): Promise<StaircaseStateDoc> {
    return this.request("POST", "/api/calibration/start") as Promise<StaircaseStateDoc>;
  }

  calibrationRespond(response: "comfortable" | "too-strong" | "imperceptible"):
      Promise<StaircaseStateDoc> {
    return this.request("POST", "/api/calibration/respond", { response }) as
      Promise<StaircaseStateDoc>;
  }

  sessionStart(config: Record<string, unknown>): Promise<{ prompt: TrialPrompt }> {
    return this.request("POST", "/api/session/start", { config }) as
      Promise<{ prompt: TrialPrompt }>;
  }

  sessionAdvance(): Promise<{ prompt: TrialPrompt }> {
    return this.request("POST", "/api/session/advance") as Promise<{ prompt: TrialPrompt }>;
  }

  sessionRate(trial: number, rating: number): Promise<{ prompt: TrialPrompt | null }> {
    return this.request("POST", "/api/session/rating", { trial, rating }) as
      Promise<{ prompt: TrialPrompt | null }>;
  }

  async sessionCsv(): Promise<string> {
    const resp = await this.fetchImpl(this.baseUrl + "/api/session/export.csv", {});
    if (!resp.ok) {
      throw new ServiceError(`HTTP${resp.status}`, resp.status, "csv export failed");
    }
    return resp.text();
  }
}
