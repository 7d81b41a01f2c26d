/** Client-side profile validation, mirroring the server's invariants so the
 * Run/Save buttons can be gated before any request is made. */

import type { ProfileFields } from './types.js';
import { ABLATION_DROPS } from './types.js';

export type ValidationErrors = Partial<Record<keyof ProfileFields, string>>;

export function validateProfile(fields: ProfileFields): ValidationErrors {
  const errors: ValidationErrors = {};

  if (!(fields.theta_iou >= 0 && fields.theta_iou <= 1)) {
    errors.theta_iou = 'theta_iou must lie in [0, 1]';
  }
  if (!(fields.theta_area > 0 && fields.theta_area <= 1)) {
    errors.theta_area = 'theta_area must lie in (0, 1]';
  }
  if (!Number.isInteger(fields.k_top) || fields.k_top < 1) {
    errors.k_top = 'k_top must be an integer >= 1';
  }
  if (!Number.isInteger(fields.n_neighbors) || fields.n_neighbors < 1) {
    errors.n_neighbors = 'n_neighbors must be an integer >= 1';
  }
  if (!Number.isInteger(fields.working_resolution) || fields.working_resolution < 1) {
    errors.working_resolution = 'working_resolution must be an integer >= 1';
  }
  if (!(fields.box_score_floor >= 0 && fields.box_score_floor <= 1)) {
    errors.box_score_floor = 'box_score_floor must lie in [0, 1]';
  }
  if (!(fields.text_score_floor >= 0 && fields.text_score_floor <= 1)) {
    errors.text_score_floor = 'text_score_floor must lie in [0, 1]';
  }
  if (fields.overlap_measure !== 'iou' && fields.overlap_measure !== 'containment') {
    errors.overlap_measure = 'overlap_measure must be iou or containment';
  }
  if (fields.mode !== 'saa' && fields.mode !== 'saa_plus') {
    errors.mode = 'mode must be saa or saa_plus';
  }
  const unknownDrops = fields.ablation_drops.filter(
    (d) => !(ABLATION_DROPS as string[]).includes(d),
  );
  if (unknownDrops.length > 0) {
    errors.ablation_drops = `unknown ablation drops: ${unknownDrops.join(', ')}`;
  }
  const languageDropped = fields.ablation_drops.includes('language');
  const promptCount =
    cleanPrompts(fields.class_agnostic_prompts).length +
    cleanPrompts(fields.class_specific_prompts).length;
  if (!languageDropped && fields.mode === 'saa_plus' && promptCount === 0) {
    errors.class_agnostic_prompts = 'at least one prompt is required unless language is dropped';
  }
  return errors;
}

export function isValid(fields: ProfileFields): boolean {
  return Object.keys(validateProfile(fields)).length === 0;
}

/** Trim entries and drop empties; used before sending prompt lists. */
export function cleanPrompts(prompts: string[]): string[] {
  return prompts.map((p) => p.trim()).filter((p) => p.length > 0);
}

/** Parse a textarea's one-prompt-per-line content. */
export function parsePromptLines(text: string): string[] {
  return cleanPrompts(text.split('\n'));
}
