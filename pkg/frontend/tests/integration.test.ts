/** Integration against the real HTTP service (spawned `saaplus serve` with
 * oracle backends on the desk benchmark). Covers the workbench acceptance
 * criteria: profile save/reload round-trip, fused-map PNG passthrough, and
 * the naive->regularized toggle removing every distractor overlay. */

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { compareRuns } from '../src/compare.js';
import { pngDataUrl, stageOverlays } from '../src/overlays.js';
import { decodeRle, masksIntersect } from '../src/rle.js';
import type { ProfileDocument } from '../src/types.js';

const repoRoot = join(dirname(fileURLToPath(import.meta.url)), '..', '..');
const PORT = 8750 + (process.pid % 997);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
const api = new ApiClient(BASE);

async function waitForHealth(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const health = await api.health();
      if (health.status === 'ok') return;
    } catch (err) {
      lastError = err;
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error(`service did not come up on ${BASE}: ${String(lastError)}`);
}

beforeAll(async () => {
  const profilesDir = mkdtempSync(join(tmpdir(), 'wb-profiles-'));
  server = spawn(
    'python3',
    [
      '-m', 'saaplus.cli', 'serve',
      '--port', String(PORT),
      '--manifest', join(repoRoot, 'data', 'desk', 'manifest.json'),
      '--profiles', profilesDir,
    ],
    { cwd: repoRoot, stdio: 'ignore' },
  );
  await waitForHealth();
}, 60000);

afterAll(() => {
  server?.kill('SIGTERM');
});

async function deskProfileDocument(): Promise<ProfileDocument> {
  const { readFile } = await import('node:fs/promises');
  const text = await readFile(join(repoRoot, 'data', 'desk', 'profile.json'), 'utf-8');
  return JSON.parse(text) as ProfileDocument;
}

describe('service integration', () => {
  it('lists the desk images', async () => {
    const images = await api.listImages();
    expect(images.length).toBe(15);
    expect(images.some((i) => i.id === 'candle/000')).toBe(true);
  });

  it('profile edit -> save -> reload preserves every field', async () => {
    const doc = await deskProfileDocument();
    const edited: ProfileDocument = {
      ...doc,
      id: 'workbench-roundtrip',
      display_name: 'Edited in workbench',
      version: 1,
      profile: {
        ...doc.profile,
        class_specific_prompts: [...doc.profile.class_specific_prompts, 'hairline fracture'],
        theta_iou: 0.35,
        theta_area: 0.45,
        k_top: 2,
        ablation_drops: ['confidence'],
      },
    };
    const stored = await api.putProfile(edited);
    expect(stored).toEqual(edited);
    const reloaded = await api.getProfile('workbench-roundtrip');
    expect(reloaded).toEqual(edited); // every field survives the round trip

    // stale write (same version again) is rejected with 409
    await expect(api.putProfile(edited)).rejects.toMatchObject({ status: 409 });
    // next version is accepted
    const bumped = { ...edited, version: 2 };
    await api.putProfile(bumped);
    expect((await api.getProfile('workbench-roundtrip')).version).toBe(2);
  });

  it('fused-map rendering is a pure passthrough of the service PNG bytes', async () => {
    const doc = await deskProfileDocument();
    const run = await api.run('candle/000', doc, 'saa+');
    const url = pngDataUrl(run.anomaly_map_png);
    expect(url).toBe(`data:image/png;base64,${run.anomaly_map_png}`);
    const bytes = Buffer.from(url.slice('data:image/png;base64,'.length), 'base64');
    expect(bytes.equals(Buffer.from(run.anomaly_map_png, 'base64'))).toBe(true);
    expect(bytes.subarray(0, 8)).toEqual(
      Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    );
    expect(run.saliency_png).not.toBeNull();
  });

  it('saa -> saa+ toggle removes every distractor overlay', async () => {
    const doc = await deskProfileDocument();
    const naive = await api.run('candle/000', doc, 'saa');
    const regularized = await api.run('candle/000', doc, 'saa+');

    // the naive run overlays distractor regions (generic-prompt hits)
    const naiveOverlays = stageOverlays(naive.trace, 'selected');
    const naivePhrases = naiveOverlays.map((o) => o.label);
    expect(naivePhrases.filter((p) => p === 'anomaly').length).toBeGreaterThanOrEqual(2);

    // the regularized run keeps only the class-specific defect overlay
    const plusOverlays = stageOverlays(regularized.trace, 'selected');
    expect(plusOverlays.map((o) => o.label)).toEqual(['overlong wick']);
    expect(plusOverlays.every((o) => o.label !== 'anomaly')).toBe(true);

    // no surviving overlay touches any naive distractor region
    const defectMask = plusOverlays[0]!;
    if (defectMask.kind !== 'mask') throw new Error('expected mask overlay');
    const objectRle = regularized.trace.object_mask_rle;
    expect(objectRle).not.toBeNull();
    for (const distractor of naive.trace.stages.selected) {
      const dMask = decodeRle(distractor.mask_rle);
      const sameRegion = masksIntersect(defectMask.mask, dMask);
      // the oversized distractor covers the whole object (and so the defect);
      // every other distractor must be disjoint from the kept overlay
      const area = dMask.data.reduce((a: number, b) => a + b, 0);
      const objArea = decodeRle(objectRle!).data.reduce((a: number, b) => a + b, 0);
      if (area < objArea) expect(sameRegion).toBe(false);
    }

    // the comparison panel reports the removals per stage
    const cmp = compareRuns(naive, regularized);
    const selected = cmp.stages.find((s) => s.stage === 'selected')!;
    expect(selected.removed).toContain('anomaly');
    expect(selected.added).toContain('overlong wick');
  });

  it('run responses expose stage counts for the trace view', async () => {
    const doc = await deskProfileDocument();
    const run = await api.run('candle/000', doc, 'saa+');
    expect(run.stage_counts).toMatchObject({
      generated: 6,
      refined: 6,
      filtered: 4,
      rescored: 4,
      selected: 1,
    });
    expect(run.trace.saliency_grid?.gh).toBe(20);
  });
}, 60000);
