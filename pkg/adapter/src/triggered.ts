/** Prompt-triggered integration: a language stage runs first and turns
 * the text prompt into box or point prompts that drive the segmenter.
 */

import type { Backend } from "./backends.js";
import {
  imageEncoder,
  sentenceTemplate,
  similarityMap,
  subtractRedundant,
  textEncoder,
} from "./features.js";
import type { PointPrompt, RgbImage, ScoredMask, SimilarityMap, VlmConfig } from "./types.js";
import { PROMPT_TRIGGERED, maskArea } from "./types.js";

/** Foreground points at the similarity peaks, background at the valleys. */
export function mapToPoints(map: SimilarityMap, nForeground = 3, nBackground = 2): PointPrompt[] {
  const order = Array.from(map.data.keys()).sort((a, b) => map.data[b] - map.data[a]);
  const points: PointPrompt[] = [];
  const taken: Array<[number, number]> = [];
  const minGap = Math.max(4, Math.floor(Math.min(map.width, map.height) / 12));
  const farEnough = (x: number, y: number) =>
    taken.every(([tx, ty]) => Math.abs(tx - x) + Math.abs(ty - y) >= minGap);
  for (const p of order) {
    if (points.filter((pt) => pt.label === 1).length >= nForeground) break;
    const x = p % map.width;
    const y = Math.floor(p / map.width);
    if (!farEnough(x, y)) continue;
    points.push({ x, y, label: 1 });
    taken.push([x, y]);
  }
  for (let i = order.length - 1; i >= 0; i--) {
    if (points.filter((pt) => pt.label === 0).length >= nBackground) break;
    const p = order[i];
    const x = p % map.width;
    const y = Math.floor(p / map.width);
    if (!farEnough(x, y)) continue;
    points.push({ x, y, label: 0 });
    taken.push([x, y]);
  }
  return points;
}

/**
 * Segment regions matching the prompt by triggering the segmenter with
 * converted prompts. An empty detection set yields an empty mask list.
 */
export function segmentPromptTriggered(
  image: RgbImage,
  cfg: VlmConfig,
  backend: Backend,
): ScoredMask[] {
  if (!PROMPT_TRIGGERED.includes(cfg.method)) {
    throw new Error(`${cfg.method} is not a prompt-triggered method`);
  }
  if (cfg.method === "GDINO-SAM") {
    const detections = backend.detector.detect(image, cfg.prompt);
    const masks: ScoredMask[] = [];
    for (let i = 0; i < detections.boxes.length; i++) {
      if (detections.classes[i] !== "door") continue;
      if (detections.logits[i] < cfg.boxThreshold) continue;
      const mask = backend.segmenter.segmentBox(image, detections.boxes[i]);
      if (maskArea(mask) === 0) continue;
      masks.push({ mask, score: detections.logits[i] });
    }
    return masks;
  }

  // Contrastive paths: text features -> similarity map -> point prompts.
  let features = textEncoder(sentenceTemplate(cfg.prompt));
  if (cfg.method === "CLPS-SAM") {
    features = subtractRedundant(features);
  }
  const map = similarityMap(image, features);
  const points = mapToPoints(map);
  if (points.every((p) => p.label === 0)) return [];
  const mask = backend.segmenter.segmentPoints(image, points);
  if (maskArea(mask) === 0) return [];
  // Score the mask content against the text, like the filter path does.
  const sim = Math.max(0, Math.min(1, (cosine(image, mask, features) + 1) / 2));
  return [{ mask, score: sim }];
}

function cosine(image: RgbImage, mask: ScoredMask["mask"], features: Float32Array): number {
  const masked = imageEncoder(image, mask);
  let dot = 0;
  for (let i = 0; i < features.length; i++) dot += masked[i] * features[i];
  return dot;
}
