/** Pure overlay construction: the UI never recomputes pipeline math, it
 * only renders service payloads. Stage overlays are plain data (boxes and
 * mask pixel buffers) that main.ts blits onto canvases. */

import { decodeRle, type Mask } from './rle.js';
import type { RegionEntry, RunResponse, StageName, TraceJson } from './types.js';

export type Rgb = [number, number, number];

/** Distinct colors cycled over candidates within one stage. */
export const CANDIDATE_COLORS: Rgb[] = [
  [230, 80, 60],
  [60, 140, 230],
  [70, 190, 110],
  [235, 170, 40],
  [170, 90, 220],
  [50, 200, 200],
];

export interface BoxOverlay {
  kind: 'box';
  box: [number, number, number, number];
  color: Rgb;
  label: string;
  score: number;
}

export interface MaskOverlay {
  kind: 'mask';
  mask: Mask;
  color: Rgb;
  label: string;
  score: number;
}

export type Overlay = BoxOverlay | MaskOverlay;

/** The fused/saliency images are rendered from the exact payload bytes. */
export function pngDataUrl(base64Png: string): string {
  return `data:image/png;base64,${base64Png}`;
}

export function stageOverlays(trace: TraceJson, stage: StageName): Overlay[] {
  if (stage === 'generated') {
    return trace.stages.generated.map((b, i) => ({
      kind: 'box',
      box: b.box,
      color: CANDIDATE_COLORS[i % CANDIDATE_COLORS.length]!,
      label: b.phrase,
      score: b.score,
    }));
  }
  const entries: RegionEntry[] = trace.stages[stage];
  return entries.map((e, i) => ({
    kind: 'mask',
    mask: decodeRle(e.mask_rle),
    color: CANDIDATE_COLORS[i % CANDIDATE_COLORS.length]!,
    label: e.phrase,
    score: e.score,
  }));
}

export function objectMaskOverlay(trace: TraceJson): MaskOverlay | null {
  if (!trace.object_mask_rle) return null;
  return {
    kind: 'mask',
    mask: decodeRle(trace.object_mask_rle),
    color: [255, 255, 255],
    label: 'object',
    score: 1,
  };
}

/** RGBA pixel buffer for a mask overlay (alpha on set pixels only). */
export function maskToRgba(mask: Mask, color: Rgb, alpha: number): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(mask.width * mask.height * 4);
  const a = Math.round(Math.max(0, Math.min(1, alpha)) * 255);
  for (let i = 0; i < mask.data.length; i++) {
    if (mask.data[i]) {
      const o = i * 4;
      out[o] = color[0];
      out[o + 1] = color[1];
      out[o + 2] = color[2];
      out[o + 3] = a;
    }
  }
  return out;
}

/** Map a candidate score into [0, 1] against user-adjustable bounds. */
export function normalizeScore(score: number, min: number, max: number): number {
  if (!(max > min)) return score > min ? 1 : 0;
  return Math.max(0, Math.min(1, (score - min) / (max - min)));
}

/** Candidate rows for the sortable score table. */
export interface ScoreRow {
  stage: StageName;
  phrase: string;
  score: number;
}

export function scoreTable(run: RunResponse, stage: StageName, descending = true): ScoreRow[] {
  const rows: ScoreRow[] =
    stage === 'generated'
      ? run.trace.stages.generated.map((b) => ({ stage, phrase: b.phrase, score: b.score }))
      : run.trace.stages[stage].map((e) => ({ stage, phrase: e.phrase, score: e.score }));
  rows.sort((x, y) => (descending ? y.score - x.score : x.score - y.score));
  return rows;
}
