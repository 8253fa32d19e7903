/**
 * Client-side mirror of one interactive session.
 *
 * Fitness values always come from the server; this module only keeps the
 * running count, the improvement history, and the current search vector.
 */

export const VECTOR_DIM = 15;

export interface RadarSlot {
  kind: "rotating" | "staring";
  /** vector indices of this radar's parameters */
  ix: number;
  iy: number;
  itilt: number;
  iangle?: number;
}

/** One rotating radar (x, y, tilt) then three staring (x, y, tilt, angle). */
export const RADAR_SLOTS: readonly RadarSlot[] = [
  { kind: "rotating", ix: 0, iy: 1, itilt: 2 },
  { kind: "staring", ix: 3, iy: 4, itilt: 5, iangle: 6 },
  { kind: "staring", ix: 7, iy: 8, itilt: 9, iangle: 10 },
  { kind: "staring", ix: 11, iy: 12, itilt: 13, iangle: 14 },
];

export interface ImprovementPoint {
  evaluation: number;
  fitness: number;
}

export class SessionState {
  vector: number[];
  evaluations = 0;
  history: ImprovementPoint[] = [];
  elapsed = 0;

  constructor(initial?: number[]) {
    if (initial !== undefined && initial.length !== VECTOR_DIM) {
      throw new Error(`vector must have ${VECTOR_DIM} entries`);
    }
    this.vector = initial ? [...initial] : new Array(VECTOR_DIM).fill(0.5);
  }

  /** Minimum of the recorded history; Infinity before the first result. */
  get bestSoFar(): number {
    let best = Infinity;
    for (const p of this.history) {
      if (p.fitness < best) best = p.fitness;
    }
    return best;
  }

  /**
   * Account for one server-confirmed evaluation. Records an improvement
   * point for the first evaluation and for every strictly better fitness;
   * returns whether this one improved.
   */
  applyResult(fitness: number): boolean {
    const improved = this.evaluations === 0 || fitness < this.bestSoFar;
    this.evaluations += 1;
    if (improved) {
      this.history.push({ evaluation: this.evaluations, fitness });
    }
    return improved;
  }

  setParam(index: number, value: number): void {
    if (index < 0 || index >= VECTOR_DIM) {
      throw new Error(`parameter index out of range: ${index}`);
    }
    this.vector[index] = Math.min(1, Math.max(0, value));
  }
}
