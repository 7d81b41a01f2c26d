import { describe, expect, it } from 'vitest';
import { compareRuns } from '../src/compare.js';
import type { RunResponse, TraceJson } from '../src/types.js';

function makeRun(imageId: string, mode: string, stages: Partial<TraceJson['stages']>): RunResponse {
  const empty: TraceJson['stages'] = {
    generated: [],
    refined: [],
    filtered: [],
    rescored: [],
    selected: [],
  };
  return {
    image_id: imageId,
    mode,
    map_max: 1,
    stage_counts: {},
    trace: {
      image_id: imageId,
      mode,
      ablation_drops: [],
      prompts: [],
      stages: { ...empty, ...stages },
      object_mask_rle: null,
      saliency_grid: null,
    },
    anomaly_map_raw: '',
    anomaly_map_png: '',
    saliency_png: null,
    saliency_raw: null,
  };
}

const region = (phrase: string, score = 0.5) => ({ phrase, score, mask_rle: '2 2 0 4' });

describe('compareRuns', () => {
  it('reports per-stage deltas and removed candidates', () => {
    const saa = makeRun('img', 'saa', {
      refined: [region('wick'), region('wick'), region('defect')],
      selected: [region('wick'), region('wick'), region('defect')],
    });
    const plus = makeRun('img', 'saa_plus', {
      refined: [region('wick'), region('wick'), region('defect')],
      selected: [region('defect')],
    });
    const cmp = compareRuns(saa, plus);
    expect(cmp.identical).toBe(false);
    const selected = cmp.stages.find((s) => s.stage === 'selected')!;
    expect(selected.countA).toBe(3);
    expect(selected.countB).toBe(1);
    expect(selected.delta).toBe(-2);
    expect(selected.removed).toEqual(['wick', 'wick']);
    expect(selected.added).toEqual([]);
    const refined = cmp.stages.find((s) => s.stage === 'refined')!;
    expect(refined.delta).toBe(0);
    expect(refined.removed).toEqual([]);
  });

  it('identical runs produce zero deltas', () => {
    const a = makeRun('img', 'saa_plus', { selected: [region('defect')] });
    const b = makeRun('img', 'saa_plus', { selected: [region('defect')] });
    const cmp = compareRuns(a, b);
    expect(cmp.identical).toBe(true);
    expect(cmp.stages.every((s) => s.delta === 0)).toBe(true);
  });

  it('rejects comparisons across different images', () => {
    const a = makeRun('img1', 'saa', {});
    const b = makeRun('img2', 'saa', {});
    expect(() => compareRuns(a, b)).toThrow(/same image/);
  });
});
