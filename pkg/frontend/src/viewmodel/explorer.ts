/**
 * Signal explorer view state: which series is shown, the visible time
 * range, and how pan/zoom turn into the next /v1/series request.
 *
 * Re-fetch requests are deduplicated by key so a burst of identical
 * viewport changes issues one request.
 */

import type { DatasetSummary } from "../api/types.js";
import { chooseDecimation } from "./plotting.js";

export interface TimeRange {
  from: number;
  to: number;
}

export interface ExplorerState {
  seriesId: string | null;
  /** null means the full series span. */
  range: TimeRange | null;
  viewportWidth: number;
}

export const INITIAL_EXPLORER: ExplorerState = {
  seriesId: null,
  range: null,
  viewportWidth: 800,
};

export interface FetchPlan {
  seriesId: string;
  query: { from?: number; to?: number; decimate?: number };
  key: string;
}

/**
 * The request matching the current viewport.  `totalRows` is the row
 * count of the visible range when known (falling back to the whole
 * series) and sets the decimation factor.
 */
export function fetchPlan(state: ExplorerState, totalRows: number): FetchPlan | null {
  if (state.seriesId === null) return null;
  const query: FetchPlan["query"] = {};
  if (state.range !== null) {
    query.from = state.range.from;
    query.to = state.range.to;
  }
  const decimate = chooseDecimation(totalRows, state.viewportWidth);
  if (decimate > 1) query.decimate = decimate;
  const key = `${state.seriesId}|${query.from ?? ""}|${query.to ?? ""}|${query.decimate ?? ""}`;
  return { seriesId: state.seriesId, query, key };
}

export function clampRange(range: TimeRange, bounds: TimeRange): TimeRange {
  const span = range.to - range.from;
  let from = range.from;
  let to = range.to;
  if (from < bounds.from) {
    from = bounds.from;
    to = Math.min(bounds.to, from + span);
  }
  if (to > bounds.to) {
    to = bounds.to;
    from = Math.max(bounds.from, to - span);
  }
  return { from, to };
}

/** Zoom by `factor` (>1 zooms in) around `center`, staying inside bounds. */
export function zoom(
  current: TimeRange,
  bounds: TimeRange,
  factor: number,
  center?: number,
): TimeRange {
  const span = current.to - current.from;
  const newSpan = Math.max(1, Math.round(span / factor));
  const pivot = center ?? current.from + span / 2;
  const fraction = span > 0 ? (pivot - current.from) / span : 0.5;
  const from = Math.round(pivot - fraction * newSpan);
  const next = clampRange({ from, to: from + newSpan }, bounds);
  // Epoch-nanosecond timestamps exceed 2^53, so a small span can vanish
  // when rounded to the nearest representable double.  Zooming past that
  // resolution keeps the current range instead of collapsing to nothing.
  if (next.to <= next.from) return current;
  return next;
}

/** Shift the window by a fraction of its span (negative pans left). */
export function pan(current: TimeRange, bounds: TimeRange, fraction: number): TimeRange {
  const span = current.to - current.from;
  const shift = Math.round(span * fraction);
  return clampRange({ from: current.from + shift, to: current.to + shift }, bounds);
}

export function isEmptyDataset(dataset: DatasetSummary): boolean {
  return dataset.series_ids.length === 0;
}

export function emptyStateMessage(dataset: DatasetSummary): string | null {
  if (!isEmptyDataset(dataset)) return null;
  return `Dataset ${dataset.dataset_id} has no series to plot.`;
}

/** Rows of the full series that fall inside the visible range. */
export function rowsInRange(
  totalRows: number,
  t0: number,
  dtNs: number,
  range: TimeRange | null,
): number {
  if (range === null) return totalRows;
  const first = Math.max(0, Math.ceil((range.from - t0) / dtNs));
  const last = Math.min(totalRows - 1, Math.floor((range.to - t0) / dtNs));
  return Math.max(0, last - first + 1);
}
