/** Workbench session state: the working profile with its dirty flag, the
 * current image, overlay settings, and run-sequence bookkeeping.
 *
 * Pure state machine, no DOM and no network: `main.ts` wires it to both.
 * A dirty profile is never silently discarded: loading another profile
 * requires an explicit save or revert first (or force). At most one run is
 * considered in flight; a run started later supersedes an earlier one and
 * the stale response is discarded by sequence number.
 */

import type { ProfileDocument, RunResponse, StageName } from './types.js';
import { cloneProfileDocument, type ProfileFields } from './types.js';
import { validateProfile, type ValidationErrors } from './validation.js';

export class DirtyProfileError extends Error {
  constructor() {
    super('working profile has unsaved edits: save or revert first');
    this.name = 'DirtyProfileError';
  }
}

export interface OverlaySettings {
  stage: StageName | 'saliency' | 'fused';
  opacity: number; // 0..1
  colormapMin: number;
  colormapMax: number; // defaults to the run's map_max
}

export class WorkbenchSession {
  selectedImageId: string | null = null;
  lastRun: RunResponse | null = null;
  /** previous completed run kept for side-by-side comparison */
  previousRun: RunResponse | null = null;
  overlay: OverlaySettings = { stage: 'fused', opacity: 0.6, colormapMin: 0, colormapMax: 1 };

  private working: ProfileDocument;
  private saved: ProfileDocument;
  private runSeq = 0;
  private pendingSeq: number | null = null;

  constructor(document: ProfileDocument) {
    this.working = cloneProfileDocument(document);
    this.saved = cloneProfileDocument(document);
  }

  get document(): ProfileDocument {
    return this.working;
  }

  get dirty(): boolean {
    return JSON.stringify(this.working) !== JSON.stringify(this.saved);
  }

  get validationErrors(): ValidationErrors {
    return validateProfile(this.working.profile);
  }

  /** Run/Save are enabled only on a valid profile. */
  get canRun(): boolean {
    return (
      this.selectedImageId !== null &&
      Object.keys(this.validationErrors).length === 0 &&
      !this.runPending
    );
  }

  get runPending(): boolean {
    return this.pendingSeq !== null;
  }

  selectImage(imageId: string): void {
    this.selectedImageId = imageId;
  }

  editProfile(changes: Partial<ProfileFields>): ValidationErrors {
    this.working = {
      ...this.working,
      profile: { ...this.working.profile, ...changes },
    };
    return this.validationErrors;
  }

  renameProfile(displayName: string): void {
    this.working = { ...this.working, display_name: displayName };
  }

  /** Load a different document; refuses to drop unsaved edits unless forced. */
  loadProfile(doc: ProfileDocument, opts: { force?: boolean } = {}): void {
    if (this.dirty && !opts.force) throw new DirtyProfileError();
    this.working = cloneProfileDocument(doc);
    this.saved = cloneProfileDocument(doc);
  }

  /** The document to send in a save: version bumped past the saved one. */
  saveCandidate(): ProfileDocument {
    return { ...cloneProfileDocument(this.working), version: this.saved.version + 1 };
  }

  /** Record a successful save (the document the server stored). */
  markSaved(doc: ProfileDocument): void {
    this.working = cloneProfileDocument(doc);
    this.saved = cloneProfileDocument(doc);
  }

  revert(): void {
    this.working = cloneProfileDocument(this.saved);
  }

  /** Claim the next run slot; a later startRun supersedes this one. */
  startRun(): number {
    this.runSeq += 1;
    this.pendingSeq = this.runSeq;
    return this.runSeq;
  }

  /** Apply a completed run; returns false when the response is stale. */
  applyRunResult(seq: number, response: RunResponse): boolean {
    if (seq !== this.runSeq) return false; // superseded by a newer run
    if (this.pendingSeq === seq) this.pendingSeq = null;
    if (this.lastRun && this.lastRun.image_id === response.image_id) {
      this.previousRun = this.lastRun;
    } else {
      this.previousRun = null;
    }
    this.lastRun = response;
    this.overlay = { ...this.overlay, colormapMin: 0, colormapMax: response.map_max || 1 };
    return true;
  }

  /** Clear pending state after a failed run (only for the current seq). */
  failRun(seq: number): boolean {
    if (seq !== this.runSeq) return false;
    this.pendingSeq = null;
    return true;
  }
}
