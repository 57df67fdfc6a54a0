import { describe, expect, it } from "vitest";

import type { DatasetSummary, SeriesResponse } from "../src/api/types.js";
import {
  clampRange,
  emptyStateMessage,
  fetchPlan,
  INITIAL_EXPLORER,
  isEmptyDataset,
  pan,
  rowsInRange,
  zoom,
} from "../src/viewmodel/explorer.js";
import { fixture } from "./helpers.js";

const full = fixture<SeriesResponse>("series_full.json");
const dataset = fixture<DatasetSummary & { created: boolean }>("dataset_create.json");

const bounds = {
  from: full.points[0]![0],
  to: full.points[full.points.length - 1]![0],
};

describe("fetchPlan", () => {
  it("returns null until a series is chosen", () => {
    expect(fetchPlan(INITIAL_EXPLORER, 1000)).toBeNull();
  });

  it("requests the full series without a range and skips decimate when not needed", () => {
    const plan = fetchPlan(
      { seriesId: full.series_id, range: null, viewportWidth: 800 },
      full.total_rows,
    );
    expect(plan).not.toBeNull();
    expect(plan!.seriesId).toBe(full.series_id);
    expect(plan!.query.from).toBeUndefined();
    expect(plan!.query.to).toBeUndefined();
    expect(plan!.query.decimate).toBeUndefined();
  });

  it("asks for decimation when rows exceed the viewport budget", () => {
    const plan = fetchPlan(
      { seriesId: full.series_id, range: null, viewportWidth: 100 },
      100_000,
    );
    expect(plan!.query.decimate).toBeGreaterThan(1);
  });

  it("narrowing the range drops the decimation again", () => {
    const wide = fetchPlan(
      { seriesId: full.series_id, range: null, viewportWidth: 100 },
      100_000,
    );
    const narrow = fetchPlan(
      { seriesId: full.series_id, range: { from: 0, to: 50 }, viewportWidth: 100 },
      40,
    );
    expect(wide!.query.decimate).toBeGreaterThan(1);
    expect(narrow!.query.decimate).toBeUndefined();
    expect(narrow!.query.from).toBe(0);
    expect(narrow!.query.to).toBe(50);
  });

  it("builds a dedup key that distinguishes range and decimation", () => {
    const a = fetchPlan({ seriesId: "s", range: null, viewportWidth: 800 }, 100);
    const b = fetchPlan({ seriesId: "s", range: { from: 0, to: 9 }, viewportWidth: 800 }, 100);
    const c = fetchPlan({ seriesId: "s", range: { from: 0, to: 9 }, viewportWidth: 800 }, 100);
    expect(a!.key).not.toBe(b!.key);
    expect(b!.key).toBe(c!.key);
  });
});

describe("zoom and pan", () => {
  const range = { from: bounds.from, to: bounds.to };

  it("zooming in halves the span around the center", () => {
    const zoomed = zoom(range, bounds, 2);
    const span = range.to - range.from;
    const newSpan = zoomed.to - zoomed.from;
    expect(newSpan).toBeLessThan(span);
    expect(Math.abs(newSpan - span / 2)).toBeLessThanOrEqual(1);
    expect(zoomed.from).toBeGreaterThanOrEqual(bounds.from);
    expect(zoomed.to).toBeLessThanOrEqual(bounds.to);
  });

  it("zooming out from the full extent stays clamped to the data", () => {
    const zoomed = zoom(range, bounds, 0.5);
    expect(zoomed.from).toBe(bounds.from);
    expect(zoomed.to).toBe(bounds.to);
  });

  it("zoom keeps an interior pivot inside the new range", () => {
    const pivot = bounds.from + Math.round((bounds.to - bounds.from) * 0.25);
    const zoomed = zoom(range, bounds, 4, pivot);
    expect(zoomed.from).toBeLessThanOrEqual(pivot);
    expect(zoomed.to).toBeGreaterThanOrEqual(pivot);
  });

  it("panning right then left returns to the start inside bounds", () => {
    const third = zoom(range, bounds, 3);
    const right = pan(third, bounds, 0.25);
    const back = pan(right, bounds, -0.25);
    expect(back.from).toBe(third.from);
    expect(back.to).toBe(third.to);
  });

  it("panning past the edge clamps and preserves the span", () => {
    const third = zoom(range, bounds, 3);
    const span = third.to - third.from;
    const far = pan(pan(pan(third, bounds, 1), bounds, 1), bounds, 1);
    expect(far.to).toBe(bounds.to);
    expect(far.to - far.from).toBe(span);
  });

  it("clampRange never exceeds the data extent", () => {
    const wild = clampRange({ from: bounds.from - 500, to: bounds.to + 500 }, bounds);
    expect(wild.from).toBeGreaterThanOrEqual(bounds.from);
    expect(wild.to).toBeLessThanOrEqual(bounds.to);
  });

  it("zoom never collapses to an empty range", () => {
    // Timestamps are epoch nanoseconds beyond 2^53; repeated zooming must
    // stall at the number resolution instead of producing from >= to.
    let current = { from: bounds.from, to: bounds.to };
    for (let i = 0; i < 60; i++) {
      current = zoom(current, bounds, 2);
      expect(current.to).toBeGreaterThan(current.from);
    }
  });

  it("zoom respects the one-tick floor at small magnitudes", () => {
    const smallBounds = { from: 0, to: 1000 };
    let current = { ...smallBounds };
    for (let i = 0; i < 30; i++) current = zoom(current, smallBounds, 2);
    expect(current.to - current.from).toBeGreaterThanOrEqual(1);
    expect(current.to - current.from).toBeLessThanOrEqual(2);
  });
});

describe("rowsInRange", () => {
  const dtNs = Math.round(full.dt * 1e9);

  it("counts every row when the range is null", () => {
    expect(rowsInRange(full.total_rows, bounds.from, dtNs, null)).toBe(full.total_rows);
  });

  it("matches the recorded full series row count over its own extent", () => {
    expect(rowsInRange(full.total_rows, bounds.from, dtNs, bounds)).toBe(full.total_rows);
  });

  it("counts a half-extent range proportionally", () => {
    const half = { from: bounds.from, to: bounds.from + Math.floor((bounds.to - bounds.from) / 2) };
    const count = rowsInRange(full.total_rows, bounds.from, dtNs, half);
    expect(count).toBeGreaterThan(0);
    expect(Math.abs(count - full.total_rows / 2)).toBeLessThanOrEqual(1);
  });

  it("returns zero for a range before the data starts", () => {
    // Offsets are whole samples so the shifted range stays representable
    // even at epoch-nanosecond magnitudes.
    const before = { from: bounds.from - 100 * dtNs, to: bounds.from - 50 * dtNs };
    expect(before.to).toBeLessThan(bounds.from);
    expect(rowsInRange(full.total_rows, bounds.from, dtNs, before)).toBe(0);
  });
});

describe("empty dataset state", () => {
  it("the recorded dataset is not empty", () => {
    expect(isEmptyDataset(dataset)).toBe(false);
    expect(emptyStateMessage(dataset)).toBeNull();
  });

  it("an empty dataset yields an explanatory message, not a blank plot", () => {
    const empty: DatasetSummary = { ...dataset, series_ids: [], series_count: 0 };
    expect(isEmptyDataset(empty)).toBe(true);
    expect(emptyStateMessage(empty)).toContain(empty.dataset_id);
  });
});
