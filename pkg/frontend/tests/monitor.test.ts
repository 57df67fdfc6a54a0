import { describe, expect, it } from "vitest";

import type { JobRecord } from "../src/api/types.js";
import { divergenceEpoch, TrainingMonitor } from "../src/viewmodel/monitor.js";
import { fixture } from "./helpers.js";

const jobDone = fixture<JobRecord>("job_done.json");
const jobFailed = fixture<JobRecord>("job_failed.json");

function runningAt(epoch: number): JobRecord {
  return {
    ...jobDone,
    status: "running",
    trace: jobDone.trace.slice(0, epoch),
    model_id: null,
    default_threshold: null,
  };
}

function sequenceFetcher(records: (JobRecord | Error)[]): () => Promise<JobRecord> {
  let i = 0;
  return async () => {
    const next = records[Math.min(i, records.length - 1)]!;
    i += 1;
    if (next instanceof Error) throw next;
    return next;
  };
}

describe("TrainingMonitor", () => {
  it("appends trace entries as the recorded job progresses", async () => {
    const monitor = new TrainingMonitor(
      sequenceFetcher([runningAt(1), runningAt(3), jobDone]),
    );
    let view = await monitor.tick();
    expect(view.losses).toEqual(jobDone.trace.slice(0, 1));
    expect(view.stopped).toBe(false);
    view = await monitor.tick();
    expect(view.losses).toEqual(jobDone.trace.slice(0, 3));
    view = await monitor.tick();
    expect(view.losses).toEqual(jobDone.trace);
    expect(view.status).toBe("done");
    expect(view.stopped).toBe(true);
    expect(view.finalLoss).toBe(jobDone.trace[jobDone.trace.length - 1]);
  });

  it("stops polling once the job is terminal", async () => {
    let fetches = 0;
    const monitor = new TrainingMonitor(async () => {
      fetches += 1;
      return jobDone;
    });
    await monitor.tick();
    expect(monitor.current.stopped).toBe(true);
    await monitor.tick();
    await monitor.tick();
    expect(fetches).toBe(1);
  });

  it("loss curve values come verbatim from the job record", async () => {
    const monitor = new TrainingMonitor(sequenceFetcher([jobDone]));
    const view = await monitor.tick();
    expect(view.losses).toEqual(jobDone.trace);
    expect(view.losses).not.toBe(jobDone.trace);
  });

  it("marks the view stale and backs off on lost connections", async () => {
    const boom = new Error("connection refused");
    const monitor = new TrainingMonitor(
      sequenceFetcher([runningAt(2), boom, boom, boom, boom, jobDone]),
      { intervalMs: 1000, maxBackoffMs: 8000 },
    );
    let view = await monitor.tick();
    expect(view.stale).toBe(false);
    expect(view.nextPollMs).toBe(1000);

    view = await monitor.tick();
    expect(view.stale).toBe(true);
    expect(view.nextPollMs).toBe(2000);
    // Stale retains the last good trace instead of fabricating values.
    expect(view.losses).toEqual(jobDone.trace.slice(0, 2));

    view = await monitor.tick();
    expect(view.nextPollMs).toBe(4000);
    view = await monitor.tick();
    expect(view.nextPollMs).toBe(8000);
    view = await monitor.tick();
    expect(view.nextPollMs).toBe(8000);

    view = await monitor.tick();
    expect(view.stale).toBe(false);
    expect(view.nextPollMs).toBe(1000);
    expect(view.stopped).toBe(true);
  });

  it("reports the divergence epoch for the recorded failed job", async () => {
    const monitor = new TrainingMonitor(sequenceFetcher([jobFailed]));
    const view = await monitor.tick();
    expect(view.status).toBe("failed");
    expect(view.stopped).toBe(true);
    expect(view.error).toBe(jobFailed.error);
    expect(view.divergedEpoch).not.toBeNull();
    expect(view.divergedEpoch).toBe(divergenceEpoch(jobFailed.error!));
  });
});

describe("divergenceEpoch", () => {
  it("parses the epoch out of the recorded failure message", () => {
    const epoch = divergenceEpoch(jobFailed.error!);
    expect(epoch).not.toBeNull();
    expect(Number.isInteger(epoch)).toBe(true);
    expect(epoch!).toBeGreaterThanOrEqual(0);
    expect(jobFailed.error).toContain(`epoch ${epoch}`);
  });

  it("returns null for other errors", () => {
    expect(divergenceEpoch("dataset has no windows")).toBeNull();
    expect(divergenceEpoch(null)).toBeNull();
  });
});
