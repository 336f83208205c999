/** Prompt-filtered integration: the segmenter proposes every region
 * first, then a language stage keeps the masks matching the text.
 */

import type { Backend } from "./backends.js";
import {
  cosineSimilarity,
  imageEncoder,
  sentenceTemplate,
  subtractRedundant,
  textEncoder,
} from "./features.js";
import type { RgbImage, ScoredMask, VlmConfig } from "./types.js";
import { PROMPT_FILTERED } from "./types.js";

/** Similarity of a proposed mask's content against the text prompt, in [0, 1]. */
export function maskSimilarity(
  image: RgbImage,
  mask: ScoredMask["mask"],
  textFeatures: Float32Array,
): number {
  const cropFeatures = imageEncoder(image, mask);
  return Math.max(0, Math.min(1, (cosineSimilarity(cropFeatures, textFeatures) + 1) / 2));
}

/**
 * Segment everything, then keep masks whose image content scores above
 * the similarity threshold for the prompt. The keep-set shrinks
 * monotonically as the threshold rises.
 */
export function segmentPromptFiltered(
  image: RgbImage,
  cfg: VlmConfig,
  backend: Backend,
): ScoredMask[] {
  if (!PROMPT_FILTERED.includes(cfg.method)) {
    throw new Error(`${cfg.method} is not a prompt-filtered method`);
  }
  let features = textEncoder(sentenceTemplate(cfg.prompt));
  if (cfg.method === "SAM-CLPS") {
    features = subtractRedundant(features);
  }
  const proposals = backend.everything.generate(image);
  const kept: ScoredMask[] = [];
  for (const mask of proposals) {
    const sim = maskSimilarity(image, mask, features);
    if (sim > cfg.simThreshold) {
      kept.push({ mask, score: sim });
    }
  }
  return kept;
}
