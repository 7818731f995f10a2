/** Thin REST/SSE client for the planning service.  All UI data comes
 * through this module; nothing is recomputed client-side. */

import type { StrokeDocument } from "./strokes.js";

export type Stage =
  | "queued"
  | "planning"
  | "planned"
  | "simulating"
  | "done"
  | "failed";

export interface JobState {
  id: string;
  stage: Stage;
  baseline_planning: boolean;
  max_speed: number | null;
  artifacts: string[];
  error: { kind: string; [k: string]: unknown } | null;
}

export interface StreamEvent {
  t: number;
  tip: [number, number, number];
  F_true: number;
  F_hat: number;
  pen_width: number;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; text(): Promise<string> }>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`service error ${status}: ${JSON.stringify(detail)}`);
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...a) => fetch(...(a as [string])),
  ) {}

  private async request(path: string, init?: Parameters<FetchLike>[1]): Promise<string> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const text = await res.text();
    if (!res.ok) {
      let detail: unknown = text;
      try {
        detail = (JSON.parse(text) as { detail?: unknown }).detail ?? text;
      } catch {
        /* non-JSON error body */
      }
      throw new ServiceError(res.status, detail);
    }
    return text;
  }

  private async json<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    return JSON.parse(await this.request(path, init)) as T;
  }

  async createJob(
    doc: StrokeDocument,
    opts: { baselinePlanning?: boolean; maxSpeed?: number } = {},
  ): Promise<string> {
    const q = new URLSearchParams();
    if (opts.baselinePlanning) q.set("baseline_planning", "true");
    if (opts.maxSpeed !== undefined) q.set("max_speed", String(opts.maxSpeed));
    const qs = q.toString();
    const res = await this.json<{ id: string }>(`/api/jobs${qs ? "?" + qs : ""}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    return res.id;
  }

  getJob(id: string): Promise<JobState> {
    return this.json(`/api/jobs/${id}`);
  }

  listJobs(): Promise<JobState[]> {
    return this.json("/api/jobs");
  }

  async simulate(
    id: string,
    opts: { seed?: number; noContactCompensation?: boolean } = {},
  ): Promise<void> {
    await this.request(`/api/jobs/${id}/simulate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        seed: opts.seed ?? null,
        no_contact_compensation: opts.noContactCompensation ?? false,
      }),
    });
  }

  /** Raw metrics body; kept as the exact service string so the display
   * is verbatim (invariant: no client-side recomputation). */
  metricsText(id: string): Promise<string> {
    return this.request(`/api/jobs/${id}/metrics`);
  }

  trajectoryText(id: string): Promise<string> {
    return this.request(`/api/jobs/${id}/trajectory`);
  }

  renderUrl(id: string): string {
    return `${this.baseUrl}/api/jobs/${id}/render.png`;
  }

  streamUrl(id: string): string {
    return `${this.baseUrl}/api/jobs/${id}/stream`;
  }

  /** Poll until the job reaches one of `stages` (or fails). */
  async waitFor(
    id: string,
    stages: Stage[],
    opts: { intervalMs?: number; timeoutMs?: number } = {},
  ): Promise<JobState> {
    const interval = opts.intervalMs ?? 500;
    const deadline = Date.now() + (opts.timeoutMs ?? 300_000);
    for (;;) {
      const state = await this.getJob(id);
      if (stages.includes(state.stage)) return state;
      if (state.stage === "failed") return state;
      if (Date.now() > deadline) throw new Error(`timeout waiting for ${stages}`);
      await new Promise((r) => setTimeout(r, interval));
    }
  }
}

/** Minimal EventSource-shaped interface so tests can inject a fake. */
export interface EventSourceLike {
  addEventListener(type: string, cb: (ev: { data: string }) => void): void;
  close(): void;
}

/** Subscribe to a job's live stream; returns an unsubscribe function.
 * Exactly one subscription per job is the intended usage. */
export function subscribeStream(
  source: EventSourceLike,
  onEvent: (ev: StreamEvent) => void,
  onDone: () => void,
): () => void {
  source.addEventListener("message", (ev) => {
    onEvent(JSON.parse(ev.data) as StreamEvent);
  });
  source.addEventListener("done", () => {
    source.close();
    onDone();
  });
  return () => source.close();
}
