/** Side-by-side run comparison: per-stage candidate-count deltas and the
 * phrases present in one run but not the other. */

import type { RunResponse, StageName, TraceJson } from './types.js';

export const STAGES: StageName[] = ['generated', 'refined', 'filtered', 'rescored', 'selected'];

export interface StageDelta {
  stage: StageName;
  countA: number;
  countB: number;
  delta: number;
  /** phrases in run A's stage that run B's stage lost (with multiplicity) */
  removed: string[];
  added: string[];
}

export interface RunComparison {
  imageId: string;
  modeA: string;
  modeB: string;
  stages: StageDelta[];
  identical: boolean;
}

function stagePhrases(trace: TraceJson, stage: StageName): string[] {
  return stage === 'generated'
    ? trace.stages.generated.map((b) => b.phrase)
    : trace.stages[stage].map((e) => e.phrase);
}

function multisetDiff(a: string[], b: string[]): string[] {
  const counts = new Map<string, number>();
  for (const p of b) counts.set(p, (counts.get(p) ?? 0) + 1);
  const out: string[] = [];
  for (const p of a) {
    const left = counts.get(p) ?? 0;
    if (left > 0) counts.set(p, left - 1);
    else out.push(p);
  }
  return out;
}

export function compareRuns(a: RunResponse, b: RunResponse): RunComparison {
  if (a.image_id !== b.image_id) {
    throw new Error(
      `runs compare only on the same image: ${a.image_id} vs ${b.image_id}`,
    );
  }
  const stages: StageDelta[] = STAGES.map((stage) => {
    const pa = stagePhrases(a.trace, stage);
    const pb = stagePhrases(b.trace, stage);
    return {
      stage,
      countA: pa.length,
      countB: pb.length,
      delta: pb.length - pa.length,
      removed: multisetDiff(pa, pb),
      added: multisetDiff(pb, pa),
    };
  });
  const identical = stages.every(
    (s) => s.delta === 0 && s.removed.length === 0 && s.added.length === 0,
  );
  return { imageId: a.image_id, modeA: a.mode, modeB: b.mode, stages, identical };
}
