/**
 * Decoder for the coverage bitset returned by POST /evaluate.
 *
 * The server packs all 27,000 voxels into 3,375 bytes: voxel
 * k = itheta*900 + iy*30 + ix sits at bit (k % 8) of byte (k / 8),
 * least significant bit first. The whole thing arrives base64-encoded.
 */

export const GRID = 30;
export const THETA_BINS = 30;
export const TOTAL_VOXELS = GRID * GRID * THETA_BINS;
export const BITSET_BYTES = TOTAL_VOXELS / 8;

export class CoverageMap {
  readonly bytes: Uint8Array;

  constructor(bytes: Uint8Array) {
    if (bytes.length !== BITSET_BYTES) {
      throw new Error(`coverage bitset must be ${BITSET_BYTES} bytes, got ${bytes.length}`);
    }
    this.bytes = bytes;
  }

  static fromBase64(b64: string): CoverageMap {
    const raw = atob(b64);
    const bytes = new Uint8Array(raw.length);
    for (let i = 0; i < raw.length; i++) {
      bytes[i] = raw.charCodeAt(i);
    }
    return new CoverageMap(bytes);
  }

  covered(itheta: number, iy: number, ix: number): boolean {
    const k = itheta * GRID * GRID + iy * GRID + ix;
    return ((this.bytes[k >> 3] >> (k & 7)) & 1) === 1;
  }

  /** Total covered voxels; must equal the "covered" field of the response. */
  popcount(): number {
    let n = 0;
    for (const byte of this.bytes) {
      let b = byte;
      while (b) {
        b &= b - 1;
        n++;
      }
    }
    return n;
  }

  /**
   * Heading-aggregated view for the 2-D overlay: how many of the 30 theta
   * bins are covered above each ground cell. Indexed iy*30 + ix, 0..30.
   */
  columnCounts(): Uint16Array {
    const counts = new Uint16Array(GRID * GRID);
    for (let itheta = 0; itheta < THETA_BINS; itheta++) {
      for (let cell = 0; cell < GRID * GRID; cell++) {
        const k = itheta * GRID * GRID + cell;
        counts[cell] += (this.bytes[k >> 3] >> (k & 7)) & 1;
      }
    }
    return counts;
  }

  /** One heading bin as a flat 900-cell mask (debug view). */
  thetaSlice(itheta: number): Uint8Array {
    const slice = new Uint8Array(GRID * GRID);
    for (let cell = 0; cell < GRID * GRID; cell++) {
      const k = itheta * GRID * GRID + cell;
      slice[cell] = (this.bytes[k >> 3] >> (k & 7)) & 1;
    }
    return slice;
  }
}
