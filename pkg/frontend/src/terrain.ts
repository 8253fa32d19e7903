/**
 * Elevation heatmap helpers: row-major altitude lookup and a fixed
 * dark-green to white color ramp over the grid's own min/max.
 */

import type { TerrainDoc } from "./api.js";
import { GRID } from "./bitset.js";

export function altitudeAt(doc: TerrainDoc, ix: number, iy: number): number {
  return doc.altitudes[iy * doc.width + ix];
}

export function altitudeRange(doc: TerrainDoc): { min: number; max: number } {
  let min = Infinity;
  let max = -Infinity;
  for (const a of doc.altitudes) {
    if (a < min) min = a;
    if (a > max) max = a;
  }
  return { min, max };
}

const RAMP: Array<[number, [number, number, number]]> = [
  [0.0, [30, 84, 44]],
  [0.35, [116, 142, 63]],
  [0.7, [158, 123, 86]],
  [1.0, [245, 245, 245]],
];

/** Color for one altitude given the grid's min/max; constant grids map low. */
export function colorFor(value: number, min: number, max: number): string {
  const t = max > min ? (value - min) / (max - min) : 0;
  for (let i = 1; i < RAMP.length; i++) {
    const [t1, c1] = RAMP[i];
    if (t <= t1) {
      const [t0, c0] = RAMP[i - 1];
      const f = (t - t0) / (t1 - t0);
      const mix = c0.map((a, k) => Math.round(a + (c1[k] - a) * f));
      return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
    }
  }
  const last = RAMP[RAMP.length - 1][1];
  return `rgb(${last[0]},${last[1]},${last[2]})`;
}

export function cellCount(doc: TerrainDoc): number {
  return doc.width * doc.height;
}

/** Grid coordinates of a pointer position inside the canvas, or null. */
export function cellAtPixel(
  px: number,
  py: number,
  cellPx: number,
): { ix: number; iy: number } | null {
  const ix = Math.floor(px / cellPx);
  const iy = Math.floor(py / cellPx);
  if (ix < 0 || iy < 0 || ix >= GRID || iy >= GRID) return null;
  return { ix, iy };
}
