/** Wire types mirrored from the HTTP API. */

export type OverlapMeasure = 'iou' | 'containment';
export type PipelineMode = 'saa' | 'saa_plus';
export type AblationDrop = 'language' | 'property' | 'saliency' | 'confidence';

export const ABLATION_DROPS: AblationDrop[] = ['language', 'property', 'saliency', 'confidence'];

export interface ProfileFields {
  class_agnostic_prompts: string[];
  class_specific_prompts: string[];
  object_prompt: string;
  theta_iou: number;
  theta_area: number;
  overlap_measure: OverlapMeasure;
  k_top: number;
  n_neighbors: number;
  working_resolution: number;
  box_score_floor: number;
  text_score_floor: number;
  mode: PipelineMode;
  ablation_drops: AblationDrop[];
}

export interface ProfileDocument {
  schema_version: number;
  id: string;
  display_name: string;
  version: number;
  profile: ProfileFields;
}

export interface ImageInfo {
  id: string;
  category: string;
  split: string;
  is_normal: boolean;
}

export interface GeneratedBox {
  phrase: string;
  score: number;
  box: [number, number, number, number];
}

export interface RegionEntry {
  phrase: string;
  score: number;
  mask_rle: string;
}

export type MaskStage = 'refined' | 'filtered' | 'rescored' | 'selected';
export type StageName = 'generated' | MaskStage;

export interface TraceJson {
  image_id: string;
  mode: string;
  ablation_drops: string[];
  prompts: string[];
  stages: {
    generated: GeneratedBox[];
    refined: RegionEntry[];
    filtered: RegionEntry[];
    rescored: RegionEntry[];
    selected: RegionEntry[];
  };
  object_mask_rle: string | null;
  saliency_grid: { gh: number; gw: number; values: number[][] } | null;
}

export interface RunResponse {
  image_id: string;
  mode: string;
  map_max: number;
  stage_counts: Record<string, number>;
  trace: TraceJson;
  /** base64 of the raw float map payload ("SAA+MAP1 h w\n" + float32) */
  anomaly_map_raw: string;
  /** base64 PNG, 16-bit grayscale */
  anomaly_map_png: string;
  saliency_png: string | null;
  saliency_raw: string | null;
}

export function defaultProfileFields(): ProfileFields {
  return {
    class_agnostic_prompts: ['anomaly', 'defect'],
    class_specific_prompts: [],
    object_prompt: '',
    theta_iou: 0.5,
    theta_area: 0.5,
    overlap_measure: 'containment',
    k_top: 5,
    n_neighbors: 400,
    working_resolution: 400,
    box_score_floor: 0.25,
    text_score_floor: 0.25,
    mode: 'saa_plus',
    ablation_drops: [],
  };
}

export function cloneProfileDocument(doc: ProfileDocument): ProfileDocument {
  return JSON.parse(JSON.stringify(doc)) as ProfileDocument;
}
