/**
 * Training monitor: polls one job until it reaches a terminal state.
 *
 * Each successful poll replaces the loss curve with the server's trace
 * (the trace only grows, so this is append-like without trusting client
 * state).  Lost polls mark the view stale and back off exponentially;
 * the next success resets the interval.  Failed jobs expose the epoch
 * the divergence was detected in, parsed from the server's error text.
 */

import type { JobRecord, JobStatus } from "../api/types.js";

export interface MonitorView {
  status: JobStatus | "unknown";
  losses: number[];
  finalLoss: number | null;
  stale: boolean;
  stopped: boolean;
  divergedEpoch: number | null;
  error: string | null;
  nextPollMs: number;
}

export interface MonitorOptions {
  intervalMs?: number;
  maxBackoffMs?: number;
}

const DIVERGED_RE = /diverged during epoch (\d+)/;

export function divergenceEpoch(error: string | null): number | null {
  if (error === null) return null;
  const match = DIVERGED_RE.exec(error);
  return match ? Number(match[1]) : null;
}

export class TrainingMonitor {
  private readonly fetchJob: () => Promise<JobRecord>;
  private readonly intervalMs: number;
  private readonly maxBackoffMs: number;
  private view: MonitorView;

  constructor(fetchJob: () => Promise<JobRecord>, options: MonitorOptions = {}) {
    this.fetchJob = fetchJob;
    this.intervalMs = options.intervalMs ?? 1000;
    this.maxBackoffMs = options.maxBackoffMs ?? 8000;
    this.view = {
      status: "unknown",
      losses: [],
      finalLoss: null,
      stale: false,
      stopped: false,
      divergedEpoch: null,
      error: null,
      nextPollMs: this.intervalMs,
    };
  }

  get current(): MonitorView {
    return this.view;
  }

  /** One poll step; returns the updated view. */
  async tick(): Promise<MonitorView> {
    if (this.view.stopped) return this.view;
    let job: JobRecord;
    try {
      job = await this.fetchJob();
    } catch (err) {
      this.view = {
        ...this.view,
        stale: true,
        nextPollMs: Math.min(this.view.nextPollMs * 2, this.maxBackoffMs),
        error: err instanceof Error ? err.message : String(err),
      };
      return this.view;
    }
    const terminal = job.status === "done" || job.status === "failed";
    this.view = {
      status: job.status,
      losses: [...job.trace],
      finalLoss: job.trace.length > 0 ? job.trace[job.trace.length - 1]! : null,
      stale: false,
      stopped: terminal,
      divergedEpoch: job.status === "failed" ? divergenceEpoch(job.error) : null,
      error: job.error,
      nextPollMs: this.intervalMs,
    };
    return this.view;
  }
}
