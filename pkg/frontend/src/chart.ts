/**
 * Data shaping for the comparison chart: best-so-far step curves of the
 * session and of benchmarked algorithms, on a shared evaluation-count axis
 * (never wallclock, so human and machine trajectories stay comparable).
 */

import type { ImprovementPoint } from "./session.js";

export interface SeriesPoint {
  evaluation: number;
  value: number;
}

/** Parse the server's median-trajectory CSV ("evaluation,value" header). */
export function parseTrajectoryCsv(text: string): SeriesPoint[] {
  const lines = text.trim().split("\n");
  if (lines[0] !== "evaluation,value") {
    throw new Error(`unexpected trajectory header: ${lines[0]}`);
  }
  const points: SeriesPoint[] = [];
  for (const line of lines.slice(1)) {
    const [ev, val] = line.split(",");
    const evaluation = Number(ev);
    const value = Number(val);
    if (!Number.isInteger(evaluation) || Number.isNaN(value)) {
      throw new Error(`bad trajectory row: ${line}`);
    }
    points.push({ evaluation, value });
  }
  return points;
}

export function historySeries(history: ImprovementPoint[]): SeriesPoint[] {
  return history.map((p) => ({ evaluation: p.evaluation, value: p.fitness }));
}

/**
 * Expand improvement points into polyline vertices of the step function,
 * extended flat to maxEval. [(1,10),(5,6)] at maxEval 8 becomes
 * (1,10) (5,10) (5,6) (8,6).
 */
export function toStepSeries(points: SeriesPoint[], maxEval: number): SeriesPoint[] {
  const out: SeriesPoint[] = [];
  for (let i = 0; i < points.length; i++) {
    const p = points[i];
    if (i > 0) {
      out.push({ evaluation: p.evaluation, value: points[i - 1].value });
    }
    out.push({ evaluation: p.evaluation, value: p.value });
  }
  const last = points[points.length - 1];
  if (last !== undefined && maxEval > last.evaluation) {
    out.push({ evaluation: maxEval, value: last.value });
  }
  return out;
}

/** SVG path string for a step series inside a width x height viewport. */
export function stepPath(
  steps: SeriesPoint[],
  width: number,
  height: number,
  maxEval: number,
  minValue: number,
  maxValue: number,
): string {
  if (steps.length === 0) return "";
  const spanY = maxValue - minValue || 1;
  const sx = (e: number) => (e / maxEval) * width;
  const sy = (v: number) => height - ((v - minValue) / spanY) * height;
  return steps
    .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.evaluation).toFixed(1)},${sy(p.value).toFixed(1)}`)
    .join(" ");
}
