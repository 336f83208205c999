/** Deterministic feature encoders used by the offline backend.
 *
 * These stand in for the contrastive text/image encoder pair: they map
 * strings and images into one shared vector space so the two
 * integration styles (triggering and filtering) exercise their real
 * control flow offline. Checkpoint-backed encoders plug in behind the
 * same signatures.
 */

import type { BinaryMask, RgbImage, SimilarityMap } from "./types.js";

export const FEATURE_DIM = 16;

/** FNV-1a, decorrelated per dimension with a lane index. */
function hashLane(text: string, lane: number): number {
  let h = 0x811c9dc5 ^ (lane * 0x9e3779b9);
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return ((h >>> 0) / 4294967296) * 2 - 1;
}

export function normalize(v: Float32Array): Float32Array {
  let norm = 0;
  for (const x of v) norm += x * x;
  norm = Math.sqrt(norm) || 1;
  return v.map((x) => x / norm) as Float32Array;
}

export function cosineSimilarity(a: Float32Array, b: Float32Array): number {
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const denom = Math.sqrt(na * nb);
  return denom > 0 ? dot / denom : 0;
}

/** Wrap a bare prompt in the sentence form the text encoder expects. */
export function sentenceTemplate(prompt: string): string[] {
  return [`a photo of ${prompt}.`];
}

export function textEncoder(sentences: string[]): Float32Array {
  const v = new Float32Array(FEATURE_DIM);
  for (const s of sentences) {
    for (let d = 0; d < FEATURE_DIM; d++) v[d] += hashLane(s.toLowerCase(), d);
  }
  // Door-language anchor lanes: deterministic but meaningful for the
  // heuristic image features below (lane 0 = darkness, lane 1 = tall
  // aspect, lane 2 = saturation).
  const t = sentences.join(" ").toLowerCase();
  if (t.includes("door")) {
    v[0] += 4.0;
    v[1] += 3.0;
  }
  if (t.includes("window")) v[2] += 4.0;
  return normalize(v);
}

/**
 * Redundant-feature subtraction: encode the empty string and remove it,
 * sharpening the remaining signal (the surgery variant of the encoder).
 */
export function subtractRedundant(features: Float32Array): Float32Array {
  const redundant = textEncoder([""]);
  const out = new Float32Array(FEATURE_DIM);
  for (let i = 0; i < FEATURE_DIM; i++) out[i] = features[i] - redundant[i];
  return normalize(out);
}

function luminance(data: Uint8Array, k: number): number {
  return 0.299 * data[k] + 0.587 * data[k + 1] + 0.114 * data[k + 2];
}

/** Image statistics projected into the shared feature space. */
export function imageEncoder(image: RgbImage, mask?: BinaryMask): Float32Array {
  const v = new Float32Array(FEATURE_DIM);
  let n = 0;
  let sumLum = 0;
  let sumSat = 0;
  let minX = image.width;
  let maxX = -1;
  let minY = image.height;
  let maxY = -1;
  const hist = new Float32Array(8);
  for (let y = 0; y < image.height; y++) {
    for (let x = 0; x < image.width; x++) {
      const p = y * image.width + x;
      if (mask && !mask.data[p]) continue;
      const k = p * 3;
      const lum = luminance(image.data, k);
      const r = image.data[k];
      const g = image.data[k + 1];
      const b = image.data[k + 2];
      sumLum += lum;
      sumSat += Math.max(r, g, b) - Math.min(r, g, b);
      hist[Math.min(7, Math.floor(lum / 32))] += 1;
      n += 1;
      if (x < minX) minX = x;
      if (x > maxX) maxX = x;
      if (y < minY) minY = y;
      if (y > maxY) maxY = y;
    }
  }
  if (n === 0) return v;
  const w = Math.max(1, maxX - minX + 1);
  const h = Math.max(1, maxY - minY + 1);
  v[0] = 1 - sumLum / n / 255; // darkness
  v[1] = Math.min(2, h / w) / 2; // tall aspect
  v[2] = sumSat / n / 255; // saturation
  for (let i = 0; i < 8; i++) v[3 + i] = hist[i] / n;
  v[11] = Math.min(1, n / (image.width * image.height));
  return normalize(v);
}

/**
 * Per-pixel similarity between image content and encoded text: local
 * window statistics scored against the text vector.
 */
export function similarityMap(image: RgbImage, textFeatures: Float32Array): SimilarityMap {
  const { width, height } = image;
  const out = new Float32Array(width * height);
  const win = Math.max(4, Math.floor(Math.min(width, height) / 24));
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      let sumLum = 0;
      let sumSat = 0;
      let n = 0;
      for (let dy = -win; dy <= win; dy += win) {
        for (let dx = -win; dx <= win; dx += win) {
          const yy = y + dy;
          const xx = x + dx;
          if (yy < 0 || yy >= height || xx < 0 || xx >= width) continue;
          const k = (yy * width + xx) * 3;
          sumLum += luminance(image.data, k);
          sumSat += Math.max(image.data[k], image.data[k + 1], image.data[k + 2]) -
            Math.min(image.data[k], image.data[k + 1], image.data[k + 2]);
          n += 1;
        }
      }
      const local = new Float32Array(FEATURE_DIM);
      local[0] = 1 - sumLum / n / 255;
      local[1] = 0.5;
      local[2] = sumSat / n / 255;
      const sim = cosineSimilarity(normalize(local), textFeatures);
      out[y * width + x] = Math.max(0, Math.min(1, (sim + 1) / 2));
    }
  }
  return { width, height, data: out };
}
