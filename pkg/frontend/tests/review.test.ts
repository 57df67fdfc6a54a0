import { describe, expect, it, vi } from "vitest";

import type { AnalysisDone, WindowInfo, WindowReport } from "../src/api/types.js";
import { debounce, flaggedCount, reviewRows, windowRange } from "../src/viewmodel/review.js";
import { fixture } from "./helpers.js";

interface SweepEntry {
  threshold: number;
  response: AnalysisDone;
}

const sweep = fixture<SweepEntry[]>("threshold_sweep.json");
const windows = fixture<WindowInfo[]>("windows_all.json");

describe("threshold slider contract", () => {
  it("records an increasing threshold sweep", () => {
    for (let i = 1; i < sweep.length; i++) {
      expect(sweep[i]!.threshold).toBeGreaterThan(sweep[i - 1]!.threshold);
    }
    expect(sweep.length).toBeGreaterThanOrEqual(4);
  });

  it("never increases the flagged count as the threshold rises", () => {
    const counts = sweep.map((entry) => flaggedCount(entry.response.reports));
    for (let i = 1; i < counts.length; i++) {
      expect(counts[i]!).toBeLessThanOrEqual(counts[i - 1]!);
    }
    // The recorded sweep actually exercises the slider: the count drops.
    expect(counts[counts.length - 1]!).toBeLessThan(counts[0]!);
  });

  it("flags every window at threshold zero", () => {
    const zero = sweep.find((entry) => entry.threshold === 0);
    expect(zero).toBeDefined();
    expect(flaggedCount(zero!.response.reports)).toBe(zero!.response.reports.length);
    for (const report of zero!.response.reports) {
      expect(report.flagged).toBe(true);
    }
  });

  it("marks a window flagged exactly when its peak exceeds the threshold", () => {
    for (const entry of sweep) {
      expect(entry.response.threshold).toBe(entry.threshold);
      for (const report of entry.response.reports) {
        expect(report.threshold).toBe(entry.threshold);
        expect(report.flagged).toBe(report.peak_residual > entry.threshold);
      }
    }
  });

  it("keeps the report set stable across thresholds", () => {
    const ids = sweep.map((entry) =>
      entry.response.reports.map((r) => r.window_id).sort(),
    );
    for (let i = 1; i < ids.length; i++) {
      expect(ids[i]).toEqual(ids[0]);
    }
  });
});

describe("reviewRows", () => {
  const analysis = sweep[2]!.response;

  it("sorts flagged windows first, then by peak residual", () => {
    const rows = reviewRows(analysis);
    expect(rows.length).toBe(analysis.reports.length);
    const firstUnflagged = rows.findIndex((row) => !row.flagged);
    if (firstUnflagged >= 0) {
      for (const row of rows.slice(firstUnflagged)) expect(row.flagged).toBe(false);
    }
    for (let i = 1; i < rows.length; i++) {
      if (rows[i]!.flagged === rows[i - 1]!.flagged) {
        expect(rows[i]!.peakResidual).toBeLessThanOrEqual(rows[i - 1]!.peakResidual);
      }
    }
  });

  it("never fabricates values: every row field traces to the API response", () => {
    for (const row of reviewRows(analysis)) {
      const report = analysis.reports.find((r) => r.window_id === row.windowId);
      expect(report).toBeDefined();
      expect(row.peakResidual).toBe(report!.peak_residual);
      expect(row.flagged).toBe(report!.flagged);
    }
  });
});

describe("windowRange", () => {
  it("maps a report onto its recorded window extent", () => {
    const report = sweep[0]!.response.reports[0]!;
    const info = windows.find((w) => w.window_id === report.window_id);
    expect(info).toBeDefined();
    const range = windowRange(report, windows);
    expect(range).not.toBeNull();
    expect(range!.from).toBe(info!.t0);
    const dtNs = Math.round(info!.dt * 1e9);
    expect(range!.to).toBe(info!.t0 + (info!.sample_count - 1) * dtNs);
    expect(range!.to).toBeGreaterThan(range!.from);
  });

  it("returns null for a window the dataset does not know", () => {
    const report: WindowReport = {
      window_id: "nowhere:0",
      residual_series: [],
      peak_residual: 0,
      threshold: 0,
      flagged: false,
    };
    expect(windowRange(report, windows)).toBeNull();
  });
});

describe("debounce", () => {
  it("fires once on the trailing edge with the last arguments", () => {
    vi.useFakeTimers();
    try {
      const calls: number[] = [];
      const run = debounce((value: number) => calls.push(value), 250);
      run(1);
      run(2);
      run(3);
      expect(calls).toEqual([]);
      vi.advanceTimersByTime(249);
      expect(calls).toEqual([]);
      vi.advanceTimersByTime(1);
      expect(calls).toEqual([3]);
      run(4);
      vi.advanceTimersByTime(250);
      expect(calls).toEqual([3, 4]);
    } finally {
      vi.useRealTimers();
    }
  });

  it("cancel suppresses a pending call", () => {
    vi.useFakeTimers();
    try {
      const calls: number[] = [];
      const run = debounce((value: number) => calls.push(value), 100);
      run(1);
      run.cancel();
      vi.advanceTimersByTime(500);
      expect(calls).toEqual([]);
    } finally {
      vi.useRealTimers();
    }
  });
});
