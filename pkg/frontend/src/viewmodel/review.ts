/**
 * Prediction review: flagged-window table rows and the threshold slider.
 *
 * The flagged state always comes from the server's analysis response —
 * moving the slider re-requests /analyze (debounced) rather than
 * re-deriving flags locally, so every shown value traces to the API.
 */

import type { AnalysisDone, WindowInfo, WindowReport } from "../api/types.js";
import type { TimeRange } from "./explorer.js";

export interface ReviewRow {
  windowId: string;
  peakResidual: number;
  flagged: boolean;
}

/** Table rows, flagged first, then by peak residual descending. */
export function reviewRows(analysis: AnalysisDone): ReviewRow[] {
  return analysis.reports
    .map((r) => ({ windowId: r.window_id, peakResidual: r.peak_residual, flagged: r.flagged }))
    .sort((a, b) => {
      if (a.flagged !== b.flagged) return a.flagged ? -1 : 1;
      return b.peakResidual - a.peakResidual;
    });
}

export function flaggedCount(reports: WindowReport[]): number {
  return reports.filter((r) => r.flagged).length;
}

/**
 * The explorer range for a report's window, so a table row can jump the
 * signal plot to the exact samples that were scored.
 */
export function windowRange(report: WindowReport, windows: WindowInfo[]): TimeRange | null {
  const info = windows.find((w) => w.window_id === report.window_id);
  if (info === undefined) return null;
  const dtNs = Math.round(info.dt * 1e9);
  return { from: info.t0, to: info.t0 + (info.sample_count - 1) * dtNs };
}

export type Debounced<A extends unknown[]> = {
  (...args: A): void;
  cancel(): void;
};

/**
 * Trailing-edge debounce for slider input; timer functions injectable
 * for tests.
 */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
  timers: {
    set: (cb: () => void, ms: number) => ReturnType<typeof setTimeout>;
    clear: (id: ReturnType<typeof setTimeout>) => void;
  } = { set: (cb, ms) => setTimeout(cb, ms), clear: (id) => clearTimeout(id) },
): Debounced<A> {
  let pending: ReturnType<typeof setTimeout> | null = null;
  const wrapped = (...args: A): void => {
    if (pending !== null) timers.clear(pending);
    pending = timers.set(() => {
      pending = null;
      fn(...args);
    }, waitMs);
  };
  wrapped.cancel = () => {
    if (pending !== null) {
      timers.clear(pending);
      pending = null;
    }
  };
  return wrapped;
}
