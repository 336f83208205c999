/** Shared types for the text-prompt segmentation adapter. */

export type Method = "GDINO-SAM" | "CLIP-SAM" | "CLPS-SAM" | "SAM-CLIP" | "SAM-CLPS";

export const PROMPT_TRIGGERED: readonly Method[] = ["GDINO-SAM", "CLIP-SAM", "CLPS-SAM"];
export const PROMPT_FILTERED: readonly Method[] = ["SAM-CLIP", "SAM-CLPS"];
export const ALL_METHODS: readonly Method[] = [...PROMPT_TRIGGERED, ...PROMPT_FILTERED];

/** Best-performing defaults from the configuration sweep. */
export const DEFAULT_PROMPT = "The door in the front of the house";
export const DEFAULT_METHOD: Method = "GDINO-SAM";

export interface VlmConfig {
  method: Method;
  prompt: string;
  /** Detector confidence cut for box-prompted runs, in [0, 1]. */
  boxThreshold: number;
  /** Text/image similarity cut for mask filtering, in [0, 1]. */
  simThreshold: number;
  /** Identifier recorded in emitted bundles. */
  modelId: string;
  /** Directory holding model checkpoints; absent files raise CheckpointMissing. */
  checkpointDir?: string;
}

export function makeConfig(partial: Partial<VlmConfig> = {}): VlmConfig {
  const cfg: VlmConfig = {
    method: DEFAULT_METHOD,
    prompt: DEFAULT_PROMPT,
    boxThreshold: 0.3,
    simThreshold: 0.5,
    modelId: "heuristic-v1",
    ...partial,
  };
  if (!ALL_METHODS.includes(cfg.method)) {
    throw new Error(`unknown method ${cfg.method}; expected one of ${ALL_METHODS.join(", ")}`);
  }
  for (const key of ["boxThreshold", "simThreshold"] as const) {
    const v = cfg[key];
    if (!(v >= 0 && v <= 1)) throw new Error(`${key} ${v} outside [0, 1]`);
  }
  return cfg;
}

/** Raised when a checkpoint-backed stage cannot find its weights. */
export class CheckpointMissing extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CheckpointMissing";
  }
}

/** Row-major RGB image. */
export interface RgbImage {
  width: number;
  height: number;
  /** length = width * height * 3 */
  data: Uint8Array;
}

/** Row-major binary mask over the full crop image. */
export interface BinaryMask {
  width: number;
  height: number;
  /** length = width * height, values 0 | 1 */
  data: Uint8Array;
}

export interface ScoredMask {
  mask: BinaryMask;
  score: number;
}

export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/** Detector output of the grounding path. */
export interface DetectionSet {
  boxes: Box[];
  logits: number[];
  classes: string[];
}

/** Similarity output of the contrastive path. */
export interface SimilarityMap {
  width: number;
  height: number;
  /** per-pixel similarity in [0, 1], length = width * height */
  data: Float32Array;
}

export interface PointPrompt {
  x: number;
  y: number;
  /** 1 = foreground, 0 = background */
  label: 0 | 1;
}

export function maskArea(mask: BinaryMask): number {
  let n = 0;
  for (const v of mask.data) n += v;
  return n;
}
