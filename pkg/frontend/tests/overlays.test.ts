import { describe, expect, it } from 'vitest';
import {
  CANDIDATE_COLORS,
  maskToRgba,
  normalizeScore,
  pngDataUrl,
  scoreTable,
  stageOverlays,
} from '../src/overlays.js';
import { decodeRle } from '../src/rle.js';
import type { RunResponse, TraceJson } from '../src/types.js';

function sampleTrace(): TraceJson {
  return {
    image_id: 'img',
    mode: 'saa_plus',
    ablation_drops: [],
    prompts: ['anomaly'],
    stages: {
      generated: [
        { phrase: 'a', score: 0.9, box: [0, 0, 10, 10] },
        { phrase: 'b', score: 0.5, box: [5, 5, 20, 20] },
      ],
      refined: [
        { phrase: 'a', score: 0.9, mask_rle: '4 4 0 2 14' },
        { phrase: 'b', score: 0.5, mask_rle: '4 4 2 2 12' },
      ],
      filtered: [{ phrase: 'a', score: 0.9, mask_rle: '4 4 0 2 14' }],
      rescored: [{ phrase: 'a', score: 1.4, mask_rle: '4 4 0 2 14' }],
      selected: [{ phrase: 'a', score: 1.4, mask_rle: '4 4 0 2 14' }],
    },
    object_mask_rle: '4 4 0 16',
    saliency_grid: null,
  };
}

describe('pngDataUrl', () => {
  it('is a pure passthrough of the payload bytes', () => {
    const payload = 'aGVsbG8gcG5n';
    expect(pngDataUrl(payload)).toBe(`data:image/png;base64,${payload}`);
  });
});

describe('stageOverlays', () => {
  it('produces boxes for the generated stage', () => {
    const overlays = stageOverlays(sampleTrace(), 'generated');
    expect(overlays).toHaveLength(2);
    expect(overlays[0]).toMatchObject({ kind: 'box', box: [0, 0, 10, 10], label: 'a' });
  });

  it('produces decoded masks for mask stages', () => {
    const overlays = stageOverlays(sampleTrace(), 'refined');
    expect(overlays).toHaveLength(2);
    const first = overlays[0]!;
    if (first.kind !== 'mask') throw new Error('expected mask overlay');
    expect(first.mask.data[0]).toBe(1);
    expect(first.score).toBe(0.9);
  });

  it('cycles candidate colors deterministically', () => {
    const overlays = stageOverlays(sampleTrace(), 'refined');
    expect(overlays[0]!.color).toEqual(CANDIDATE_COLORS[0]);
    expect(overlays[1]!.color).toEqual(CANDIDATE_COLORS[1]);
  });
});

describe('maskToRgba', () => {
  it('writes color and alpha only on set pixels', () => {
    const mask = decodeRle('2 2 1 1 2'); // only pixel index 1 set
    const rgba = maskToRgba(mask, [10, 20, 30], 0.5);
    expect(Array.from(rgba.slice(0, 4))).toEqual([0, 0, 0, 0]);
    expect(Array.from(rgba.slice(4, 8))).toEqual([10, 20, 30, 128]);
    expect(rgba.length).toBe(2 * 2 * 4);
  });
});

describe('normalizeScore', () => {
  it('maps the bounds to [0, 1] and clamps', () => {
    expect(normalizeScore(0.5, 0, 1)).toBe(0.5);
    expect(normalizeScore(2, 0, 1)).toBe(1);
    expect(normalizeScore(-1, 0, 1)).toBe(0);
    expect(normalizeScore(3, 1, 1)).toBe(1); // degenerate bounds
  });
});

describe('scoreTable', () => {
  it('sorts rows by score in either direction', () => {
    const run = { trace: sampleTrace() } as unknown as RunResponse;
    const desc = scoreTable(run, 'refined');
    expect(desc.map((r) => r.score)).toEqual([0.9, 0.5]);
    const asc = scoreTable(run, 'refined', false);
    expect(asc.map((r) => r.score)).toEqual([0.5, 0.9]);
  });
});
