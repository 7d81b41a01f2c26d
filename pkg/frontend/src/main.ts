/** Browser wiring: thin view layer over session/api/overlays. All pipeline
 * math happens on the server; this file only renders payloads. */

import { ApiClient, BackendDownError, StaleProfileError } from './api.js';
import { compareRuns, type RunComparison } from './compare.js';
import { maskToRgba, objectMaskOverlay, pngDataUrl, scoreTable, stageOverlays } from './overlays.js';
import { DirtyProfileError, WorkbenchSession } from './session.js';
import type { ImageInfo, ProfileDocument, ProfileFields, StageName } from './types.js';
import { defaultProfileFields } from './types.js';
import { parsePromptLines } from './validation.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const apiBaseInput = $<HTMLInputElement>('api-base');
const statusEl = $<HTMLSpanElement>('health-status');
const imageListEl = $<HTMLUListElement>('image-list');
const profileSelect = $<HTMLSelectElement>('profile-select');
const displayNameInput = $<HTMLInputElement>('display-name');
const dirtyBadge = $<HTMLSpanElement>('dirty-badge');
const errorsEl = $<HTMLDivElement>('profile-errors');
const banner = $<HTMLDivElement>('backend-banner');
const bannerRetry = $<HTMLButtonElement>('banner-retry');
const runButton = $<HTMLButtonElement>('run-button');
const saveButton = $<HTMLButtonElement>('save-button');
const revertButton = $<HTMLButtonElement>('revert-button');
const pendingEl = $<HTMLSpanElement>('run-pending');
const modeSelect = $<HTMLSelectElement>('mode-select');
const stageSelect = $<HTMLSelectElement>('stage-select');
const opacitySlider = $<HTMLInputElement>('opacity');
const cmapMaxInput = $<HTMLInputElement>('cmap-max');
const baseImage = $<HTMLImageElement>('base-image');
const overlayCanvas = $<HTMLCanvasElement>('overlay-canvas');
const payloadImage = $<HTMLImageElement>('payload-image');
const countsEl = $<HTMLDivElement>('stage-counts');
const tableEl = $<HTMLTableElement>('score-table');
const compareEl = $<HTMLDivElement>('compare-panel');

let api = new ApiClient(apiBaseInput.value);
let session = new WorkbenchSession(freshDocument());
let images: ImageInfo[] = [];
let scoreDescending = true;

function freshDocument(): ProfileDocument {
  return {
    schema_version: 1,
    id: 'workbench',
    display_name: 'Workbench profile',
    version: 1,
    profile: defaultProfileFields(),
  };
}

// ---------------------------------------------------------------- bootstrap

async function bootstrap(): Promise<void> {
  api = new ApiClient(apiBaseInput.value.replace(/\/$/, ''));
  try {
    const health = await api.health();
    statusEl.textContent = `connected: ${health.dataset} (${health.images} images)`;
    statusEl.className = 'ok';
  } catch (err) {
    statusEl.textContent = `not connected (${(err as Error).message})`;
    statusEl.className = 'bad';
    return;
  }
  images = await api.listImages();
  renderImageList();
  await refreshProfileList();
  renderProfileForm();
  renderRunControls();
}

async function refreshProfileList(): Promise<void> {
  const profiles = await api.listProfiles();
  profileSelect.innerHTML = '';
  const fresh = document.createElement('option');
  fresh.value = '';
  fresh.textContent = '(new profile)';
  profileSelect.appendChild(fresh);
  for (const p of profiles) {
    const opt = document.createElement('option');
    opt.value = p.id;
    opt.textContent = `${p.display_name} (v${p.version})`;
    profileSelect.appendChild(opt);
  }
  profileSelect.value = session.document.id !== 'workbench' ? session.document.id : '';
}

// ---------------------------------------------------------------- image list

function renderImageList(): void {
  imageListEl.innerHTML = '';
  for (const info of images) {
    const li = document.createElement('li');
    li.textContent = `${info.id}${info.is_normal ? ' (normal)' : ''}`;
    li.className = info.id === session.selectedImageId ? 'selected' : '';
    li.onclick = () => {
      session.selectImage(info.id);
      baseImage.src = api.imagePngUrl(info.id);
      renderImageList();
      renderRunControls();
    };
    imageListEl.appendChild(li);
  }
}

// ---------------------------------------------------------------- profile form

const numericFields: (keyof ProfileFields)[] = [
  'theta_iou', 'theta_area', 'k_top', 'n_neighbors',
  'working_resolution', 'box_score_floor', 'text_score_floor',
];

function renderProfileForm(): void {
  const p = session.document.profile;
  displayNameInput.value = session.document.display_name;
  (document.getElementById('class-agnostic') as HTMLTextAreaElement).value =
    p.class_agnostic_prompts.join('\n');
  (document.getElementById('class-specific') as HTMLTextAreaElement).value =
    p.class_specific_prompts.join('\n');
  (document.getElementById('object-prompt') as HTMLInputElement).value = p.object_prompt;
  for (const field of numericFields) {
    (document.getElementById(field.replace(/_/g, '-')) as HTMLInputElement).value = String(p[field]);
  }
  (document.getElementById('overlap-measure') as HTMLSelectElement).value = p.overlap_measure;
  for (const drop of ['language', 'property', 'saliency', 'confidence']) {
    (document.getElementById(`drop-${drop}`) as HTMLInputElement).checked =
      p.ablation_drops.includes(drop as ProfileFields['ablation_drops'][number]);
  }
  renderValidation();
}

function readProfileForm(): void {
  const changes: Partial<ProfileFields> = {
    class_agnostic_prompts: parsePromptLines(
      (document.getElementById('class-agnostic') as HTMLTextAreaElement).value),
    class_specific_prompts: parsePromptLines(
      (document.getElementById('class-specific') as HTMLTextAreaElement).value),
    object_prompt: (document.getElementById('object-prompt') as HTMLInputElement).value.trim(),
    overlap_measure: (document.getElementById('overlap-measure') as HTMLSelectElement)
      .value as ProfileFields['overlap_measure'],
    ablation_drops: (['language', 'property', 'saliency', 'confidence'] as const).filter(
      (d) => (document.getElementById(`drop-${d}`) as HTMLInputElement).checked,
    ),
  };
  for (const field of numericFields) {
    const raw = (document.getElementById(field.replace(/_/g, '-')) as HTMLInputElement).value;
    (changes as Record<string, unknown>)[field] = Number(raw);
  }
  session.editProfile(changes);
  session.renameProfile(displayNameInput.value);
  renderValidation();
  renderRunControls();
}

function renderValidation(): void {
  const errors = session.validationErrors;
  errorsEl.innerHTML = '';
  document.querySelectorAll('.field-error').forEach((el) => el.classList.remove('field-error'));
  for (const [field, message] of Object.entries(errors)) {
    const row = document.createElement('div');
    row.textContent = `${field}: ${message}`;
    errorsEl.appendChild(row);
    const input = document.getElementById(field.replace(/_/g, '-'));
    if (input) input.classList.add('field-error');
  }
  dirtyBadge.style.display = session.dirty ? 'inline' : 'none';
}

function renderRunControls(): void {
  runButton.disabled = !session.canRun;
  saveButton.disabled = Object.keys(session.validationErrors).length > 0;
  pendingEl.style.display = session.runPending ? 'inline' : 'none';
}

// ---------------------------------------------------------------- running

async function executeRun(): Promise<void> {
  if (!session.canRun || !session.selectedImageId) return;
  banner.style.display = 'none';
  const seq = session.startRun();
  renderRunControls();
  try {
    const mode = modeSelect.value as 'saa' | 'saa+';
    const response = await api.run(session.selectedImageId, session.document, mode);
    if (session.applyRunResult(seq, response)) {
      cmapMaxInput.value = String(session.overlay.colormapMax.toFixed(4));
      renderRun();
    }
  } catch (err) {
    session.failRun(seq);
    if (err instanceof BackendDownError) {
      banner.style.display = 'block';
    } else {
      alert((err as Error).message);
    }
  } finally {
    renderRunControls();
  }
}

function renderRun(): void {
  const run = session.lastRun;
  if (!run) return;
  const stage = stageSelect.value;
  session.overlay = { ...session.overlay, stage: stage as typeof session.overlay.stage };
  const opacity = Number(opacitySlider.value) / 100;

  const ctx = overlayCanvas.getContext('2d');
  if (!ctx) return;
  ctx.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
  payloadImage.style.display = 'none';

  if (stage === 'fused') {
    payloadImage.src = pngDataUrl(run.anomaly_map_png);
    payloadImage.style.display = 'block';
    payloadImage.style.opacity = String(opacity);
  } else if (stage === 'saliency') {
    if (run.saliency_png) {
      payloadImage.src = pngDataUrl(run.saliency_png);
      payloadImage.style.display = 'block';
      payloadImage.style.opacity = String(opacity);
    }
  } else {
    const objectOverlay = objectMaskOverlay(run.trace);
    if (objectOverlay && stage === 'filtered') {
      drawMask(ctx, objectOverlay.mask.width, objectOverlay.mask.height,
        maskToRgba(objectOverlay.mask, objectOverlay.color, opacity * 0.25));
    }
    for (const overlay of stageOverlays(run.trace, stage as StageName)) {
      if (overlay.kind === 'box') {
        ctx.strokeStyle = `rgb(${overlay.color.join(',')})`;
        ctx.lineWidth = 2;
        ctx.globalAlpha = Math.max(opacity, 0.8);
        const [x0, y0, x1, y1] = overlay.box;
        ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
        ctx.globalAlpha = 1;
        ctx.fillStyle = `rgb(${overlay.color.join(',')})`;
        ctx.font = '11px sans-serif';
        ctx.fillText(`${overlay.label} ${overlay.score.toFixed(2)}`, x0 + 2, Math.max(10, y0 - 3));
      } else {
        drawMask(ctx, overlay.mask.width, overlay.mask.height,
          maskToRgba(overlay.mask, overlay.color, opacity));
      }
    }
  }
  renderCounts(run.stage_counts);
  renderScoreTable();
  renderCompare();
}

function drawMask(ctx: CanvasRenderingContext2D, width: number, height: number,
                  rgba: Uint8ClampedArray<ArrayBuffer>): void {
  const tmp = document.createElement('canvas');
  tmp.width = width;
  tmp.height = height;
  const tctx = tmp.getContext('2d');
  if (!tctx) return;
  tctx.putImageData(new ImageData(rgba, width, height), 0, 0);
  ctx.drawImage(tmp, 0, 0, overlayCanvas.width, overlayCanvas.height);
}

function renderCounts(counts: Record<string, number>): void {
  countsEl.textContent = Object.entries(counts)
    .map(([stage, n]) => `${stage}: ${n}`)
    .join('  ·  ');
}

function renderScoreTable(): void {
  const run = session.lastRun;
  if (!run) return;
  const stage = (stageSelect.value === 'fused' || stageSelect.value === 'saliency'
    ? 'selected'
    : stageSelect.value) as StageName;
  const rows = scoreTable(run, stage, scoreDescending);
  tableEl.innerHTML =
    `<thead><tr><th>phrase</th><th id="score-header">score ${scoreDescending ? '▼' : '▲'}</th></tr></thead>` +
    '<tbody>' +
    rows.map((r) => `<tr><td>${r.phrase}</td><td>${r.score.toFixed(4)}</td></tr>`).join('') +
    '</tbody>';
  const header = document.getElementById('score-header');
  if (header) {
    header.onclick = () => {
      scoreDescending = !scoreDescending;
      renderScoreTable();
    };
  }
}

function renderCompare(): void {
  compareEl.innerHTML = '';
  if (!session.lastRun || !session.previousRun) {
    compareEl.textContent = 'Run twice on the same image to compare.';
    return;
  }
  let cmp: RunComparison;
  try {
    cmp = compareRuns(session.previousRun, session.lastRun);
  } catch (err) {
    compareEl.textContent = (err as Error).message;
    return;
  }
  const title = document.createElement('div');
  title.textContent = `previous (${cmp.modeA}) → current (${cmp.modeB})` +
    (cmp.identical ? ' — identical' : '');
  compareEl.appendChild(title);
  for (const s of cmp.stages) {
    const row = document.createElement('div');
    const delta = s.delta === 0 ? '±0' : s.delta > 0 ? `+${s.delta}` : String(s.delta);
    row.textContent = `${s.stage}: ${s.countA} → ${s.countB} (${delta})` +
      (s.removed.length ? `  removed: ${s.removed.join(', ')}` : '') +
      (s.added.length ? `  added: ${s.added.join(', ')}` : '');
    compareEl.appendChild(row);
  }
}

// ---------------------------------------------------------------- profile IO

async function saveProfile(): Promise<void> {
  try {
    const stored = await api.putProfile(session.saveCandidate());
    session.markSaved(stored);
    await refreshProfileList();
    renderValidation();
  } catch (err) {
    if (err instanceof StaleProfileError) {
      alert(`Save conflict: ${err.message}. Reload the profile and reapply your edits.`);
    } else {
      alert((err as Error).message);
    }
  }
}

async function loadSelectedProfile(): Promise<void> {
  const id = profileSelect.value;
  try {
    const doc = id ? await api.getProfile(id) : freshDocument();
    session.loadProfile(doc);
    renderProfileForm();
    renderRunControls();
  } catch (err) {
    if (err instanceof DirtyProfileError) {
      if (confirm('Discard unsaved profile edits?')) {
        const doc = id ? await api.getProfile(id) : freshDocument();
        session.loadProfile(doc, { force: true });
        renderProfileForm();
        renderRunControls();
      } else {
        profileSelect.value = session.document.id;
      }
    } else {
      alert((err as Error).message);
    }
  }
}

// ---------------------------------------------------------------- events

$<HTMLButtonElement>('connect-button').onclick = () => void bootstrap();
runButton.onclick = () => void executeRun();
saveButton.onclick = () => void saveProfile();
revertButton.onclick = () => {
  session.revert();
  renderProfileForm();
  renderRunControls();
};
bannerRetry.onclick = () => void executeRun();
profileSelect.onchange = () => void loadSelectedProfile();
stageSelect.onchange = () => renderRun();
opacitySlider.oninput = () => renderRun();
cmapMaxInput.onchange = () => {
  session.overlay = { ...session.overlay, colormapMax: Number(cmapMaxInput.value) || 1 };
  renderRun();
};
for (const el of document.querySelectorAll('#profile-form input, #profile-form textarea, #profile-form select')) {
  (el as HTMLElement).addEventListener('input', readProfileForm);
}

void bootstrap();
