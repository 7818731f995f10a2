/** UI state machine mirroring the job lifecycle, plus the side-by-side
 * comparison table for the max-speed study. */

import type { JobState, Stage } from "./api.js";

export type UiPhase =
  | "drawing"
  | "submitting"
  | Stage; // queued/planning/planned/simulating/done/failed

const ORDER: Record<Stage, number> = {
  queued: 0,
  planning: 1,
  planned: 2,
  simulating: 3,
  done: 4,
  failed: 4,
};

export class UiStateMachine {
  phase: UiPhase = "drawing";
  jobId: string | null = null;
  error: string | null = null;

  submit(): void {
    if (this.phase !== "drawing" && this.phase !== "failed") {
      throw new Error(`cannot submit while ${this.phase}`);
    }
    this.phase = "submitting";
    this.error = null;
  }

  jobCreated(id: string): void {
    this.jobId = id;
    this.phase = "queued";
  }

  /** Apply a polled job state; stages never move backwards. */
  update(state: JobState): void {
    if (state.id !== this.jobId) return;
    if (state.stage === "failed") {
      this.phase = "failed";
      this.error = state.error ? JSON.stringify(state.error) : "unknown error";
      return;
    }
    const cur = ORDER[this.phase as Stage];
    if (cur === undefined || ORDER[state.stage] >= cur) {
      this.phase = state.stage;
    }
  }

  /** Failure keeps the canvas content: back to drawing for editing. */
  editAgain(): void {
    this.phase = "drawing";
    this.jobId = null;
  }
}

export interface ComparisonRow {
  label: string;
  maxSpeed: number | null;
  metricsText: string; // verbatim service payload
}

/** Accumulates runs for the side-by-side speed comparison. */
export class ComparisonTable {
  readonly rows: ComparisonRow[] = [];

  add(label: string, maxSpeed: number | null, metricsText: string): void {
    this.rows.push({ label, maxSpeed, metricsText });
  }

  clear(): void {
    this.rows.length = 0;
  }
}
