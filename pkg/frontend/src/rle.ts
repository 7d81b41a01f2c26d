/** Text run-length mask decoding, mirroring the service's format:
 * "<height> <width>" then alternating run lengths over the row-major scan,
 * starting with the count of zeros. */

export interface Mask {
  height: number;
  width: number;
  /** row-major, 0 or 1 per pixel */
  data: Uint8Array;
}

export function decodeRle(text: string): Mask {
  const parts = text.trim().split(/\s+/);
  if (parts.length < 2) {
    throw new Error(`RLE too short: ${JSON.stringify(text)}`);
  }
  const nums = parts.map((p) => {
    const n = Number(p);
    if (!Number.isInteger(n) || n < 0) {
      throw new Error(`bad RLE token ${JSON.stringify(p)}`);
    }
    return n;
  });
  const height = nums[0]!;
  const width = nums[1]!;
  const runs = nums.slice(2);
  const total = runs.reduce((a, b) => a + b, 0);
  if (total !== height * width) {
    throw new Error(`RLE runs sum to ${total}, expected ${height * width}`);
  }
  const data = new Uint8Array(height * width);
  let pos = 0;
  let value = 0;
  for (const run of runs) {
    if (value === 1) data.fill(1, pos, pos + run);
    pos += run;
    value = 1 - value;
  }
  return { height, width, data };
}

export function maskArea(mask: Mask): number {
  let n = 0;
  for (let i = 0; i < mask.data.length; i++) n += mask.data[i]!;
  return n;
}

/** Tight bounding box of the set pixels as (x0, y0, x1, y1), half-open;
 * null for an empty mask. */
export function maskBounds(mask: Mask): [number, number, number, number] | null {
  let minX = mask.width;
  let minY = mask.height;
  let maxX = -1;
  let maxY = -1;
  for (let y = 0; y < mask.height; y++) {
    const row = y * mask.width;
    for (let x = 0; x < mask.width; x++) {
      if (mask.data[row + x]) {
        if (x < minX) minX = x;
        if (x > maxX) maxX = x;
        if (y < minY) minY = y;
        if (y > maxY) maxY = y;
      }
    }
  }
  if (maxX < 0) return null;
  return [minX, minY, maxX + 1, maxY + 1];
}

/** True when any set pixel of `a` is set in `b` (shapes must match). */
export function masksIntersect(a: Mask, b: Mask): boolean {
  if (a.width !== b.width || a.height !== b.height) {
    throw new Error('mask shape mismatch');
  }
  for (let i = 0; i < a.data.length; i++) {
    if (a.data[i] && b.data[i]) return true;
  }
  return false;
}
