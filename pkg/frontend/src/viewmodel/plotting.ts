/**
 * Plot-side decimation arithmetic and coordinate mapping.
 *
 * The server decimates per fixed-size bucket and keeps each bucket's
 * minimum and maximum, so a bucket contributes at most 2 points.  The
 * helpers here mirror that arithmetic to pick a decimation factor for
 * the current viewport and to predict the point budget; the plotted
 * values themselves always come from the API response untouched.
 */

import type { SeriesPoint } from "../api/types.js";

/** Upper bound on points the server returns for `rows` at factor `every`. */
export function pointBudget(rows: number, every: number): number {
  if (rows <= 0) return 0;
  return 2 * Math.ceil(rows / every);
}

/**
 * Smallest decimation factor that keeps the response within roughly one
 * point per horizontal pixel (each bucket yields up to 2 points, so the
 * bucket count is half the width).
 */
export function chooseDecimation(totalRows: number, viewportWidth: number): number {
  const buckets = Math.max(1, Math.floor(viewportWidth / 2));
  if (totalRows <= buckets) return 1;
  return Math.ceil(totalRows / buckets);
}

export interface PlotBox {
  width: number;
  height: number;
}

export interface PlotScale {
  tMin: number;
  tMax: number;
  vMin: number;
  vMax: number;
}

/** Value range padded so flat series still get a visible band. */
export function scaleFor(points: SeriesPoint[], box: PlotBox): PlotScale {
  let tMin = Infinity;
  let tMax = -Infinity;
  let vMin = Infinity;
  let vMax = -Infinity;
  for (const [t, v] of points) {
    if (t < tMin) tMin = t;
    if (t > tMax) tMax = t;
    if (v < vMin) vMin = v;
    if (v > vMax) vMax = v;
  }
  if (points.length === 0) {
    return { tMin: 0, tMax: 1, vMin: 0, vMax: 1 };
  }
  if (tMax === tMin) tMax = tMin + 1;
  if (vMax === vMin) {
    const pad = Math.max(1e-9, Math.abs(vMin) * 0.1);
    vMin -= pad;
    vMax += pad;
  }
  void box;
  return { tMin, tMax, vMin, vMax };
}

export function toPixel(
  point: SeriesPoint,
  scale: PlotScale,
  box: PlotBox,
): [number, number] {
  const [t, v] = point;
  const x = ((t - scale.tMin) / (scale.tMax - scale.tMin)) * box.width;
  const y = box.height - ((v - scale.vMin) / (scale.vMax - scale.vMin)) * box.height;
  return [x, y];
}

/** Polyline coordinates ready for a canvas or SVG path. */
export function toPolyline(
  points: SeriesPoint[],
  scale: PlotScale,
  box: PlotBox,
): Array<[number, number]> {
  return points.map((p) => toPixel(p, scale, box));
}

/** Pixel x positions for event markers that fall inside the scale. */
export function markerPositions(
  eventTimes: number[],
  scale: PlotScale,
  box: PlotBox,
): number[] {
  return eventTimes
    .filter((t) => t >= scale.tMin && t <= scale.tMax)
    .map((t) => ((t - scale.tMin) / (scale.tMax - scale.tMin)) * box.width);
}
