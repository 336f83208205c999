/** Model-stage interfaces and their offline implementations.
 *
 * Every inference stage sits behind an interface so checkpoint-backed
 * models and the deterministic heuristic fallback are interchangeable.
 * The heuristic backend runs anywhere (no weights, no GPU) and keeps
 * the two integration pipelines exercisable end to end.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import type {
  BinaryMask,
  Box,
  DetectionSet,
  PointPrompt,
  RgbImage,
  ScoredMask,
} from "./types.js";
import { CheckpointMissing } from "./types.js";

export interface OpenVocabDetector {
  /** Boxes + confidences for regions matching the text prompt. */
  detect(image: RgbImage, prompt: string): DetectionSet;
}

export interface PromptableSegmenter {
  segmentBox(image: RgbImage, box: Box): BinaryMask;
  segmentPoints(image: RgbImage, points: PointPrompt[]): BinaryMask;
}

export interface EverythingSegmenter {
  /** Segment all regions of the image, SAM-everything style. */
  generate(image: RgbImage): BinaryMask[];
}

export interface Backend {
  detector: OpenVocabDetector;
  segmenter: PromptableSegmenter;
  everything: EverythingSegmenter;
}

/* -------------------------- heuristic backend -------------------------- */

interface Component {
  box: Box;
  pixels: number;
  mask: BinaryMask;
  meanLum: number;
}

function componentsByColor(image: RgbImage, shift: number, minPixels: number): Component[] {
  const { width, height, data } = image;
  const labels = new Int32Array(width * height).fill(-1);
  const comps: Component[] = [];
  const stackX = new Int32Array(width * height);
  const stackY = new Int32Array(width * height);
  const key = (k: number) =>
    ((data[k] >> shift) << 10) | ((data[k + 1] >> shift) << 5) | (data[k + 2] >> shift);
  for (let sy = 0; sy < height; sy++) {
    for (let sx = 0; sx < width; sx++) {
      const start = sy * width + sx;
      if (labels[start] >= 0) continue;
      const label = comps.length;
      const want = key(start * 3);
      let top = 0;
      stackX[top] = sx;
      stackY[top] = sy;
      top++;
      labels[start] = label;
      const mask: BinaryMask = { width, height, data: new Uint8Array(width * height) };
      let pixels = 0;
      let lumSum = 0;
      let x0 = sx;
      let x1 = sx;
      let y0 = sy;
      let y1 = sy;
      while (top > 0) {
        top--;
        const x = stackX[top];
        const y = stackY[top];
        const p = y * width + x;
        mask.data[p] = 1;
        pixels++;
        const k = p * 3;
        lumSum += 0.299 * data[k] + 0.587 * data[k + 1] + 0.114 * data[k + 2];
        if (x < x0) x0 = x;
        if (x > x1) x1 = x;
        if (y < y0) y0 = y;
        if (y > y1) y1 = y;
        const neighbors = [
          [x - 1, y],
          [x + 1, y],
          [x, y - 1],
          [x, y + 1],
        ] as const;
        for (const [nx, ny] of neighbors) {
          if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
          const np = ny * width + nx;
          if (labels[np] >= 0 || key(np * 3) !== want) continue;
          labels[np] = label;
          stackX[top] = nx;
          stackY[top] = ny;
          top++;
        }
      }
      if (pixels >= minPixels) {
        comps.push({
          box: { x0, y0, x1: x1 + 1, y1: y1 + 1 },
          pixels,
          mask,
          meanLum: lumSum / pixels,
        });
      }
    }
  }
  return comps;
}

/** Door finder: dark, tall, solidly filled components score high. */
export class HeuristicDetector implements OpenVocabDetector {
  detect(image: RgbImage, prompt: string): DetectionSet {
    const comps = componentsByColor(image, 5, 64);
    const boxes: Box[] = [];
    const logits: number[] = [];
    const classes: string[] = [];
    const total = image.width * image.height;
    for (const c of comps) {
      const w = c.box.x1 - c.box.x0;
      const h = c.box.y1 - c.box.y0;
      if (c.pixels > total * 0.4) continue; // background sheets
      const fill = c.pixels / (w * h);
      const darkness = 1 - c.meanLum / 255;
      const aspect = Math.min(2, h / Math.max(1, w)) / 2;
      const score = Math.max(0, Math.min(1, fill * (0.55 * darkness + 0.45 * aspect)));
      boxes.push(c.box);
      logits.push(score);
      classes.push(prompt.toLowerCase().includes("door") ? "door" : "object");
    }
    return { boxes, logits, classes };
  }
}

function colorDistance(data: Uint8Array, k: number, ref: [number, number, number]): number {
  return (
    Math.abs(data[k] - ref[0]) + Math.abs(data[k + 1] - ref[1]) + Math.abs(data[k + 2] - ref[2])
  );
}

export class HeuristicSegmenter implements PromptableSegmenter {
  segmentBox(image: RgbImage, box: Box): BinaryMask {
    const { width, height, data } = image;
    const mask: BinaryMask = { width, height, data: new Uint8Array(width * height) };
    const cx = Math.min(width - 1, Math.max(0, Math.floor((box.x0 + box.x1) / 2)));
    const cy = Math.min(height - 1, Math.max(0, Math.floor((box.y0 + box.y1) / 2)));
    const ck = (cy * width + cx) * 3;
    const ref: [number, number, number] = [data[ck], data[ck + 1], data[ck + 2]];
    for (let y = Math.max(0, box.y0); y < Math.min(height, box.y1); y++) {
      for (let x = Math.max(0, box.x0); x < Math.min(width, box.x1); x++) {
        const p = y * width + x;
        if (colorDistance(data, p * 3, ref) < 90) mask.data[p] = 1;
      }
    }
    return mask;
  }

  segmentPoints(image: RgbImage, points: PointPrompt[]): BinaryMask {
    const { width, height, data } = image;
    const mask: BinaryMask = { width, height, data: new Uint8Array(width * height) };
    const visited = new Uint8Array(width * height);
    const queueX: number[] = [];
    const queueY: number[] = [];
    for (const pt of points) {
      if (pt.label !== 1) continue;
      const x = Math.min(width - 1, Math.max(0, Math.round(pt.x)));
      const y = Math.min(height - 1, Math.max(0, Math.round(pt.y)));
      const k = (y * width + x) * 3;
      const ref: [number, number, number] = [data[k], data[k + 1], data[k + 2]];
      queueX.length = 0;
      queueY.length = 0;
      queueX.push(x);
      queueY.push(y);
      while (queueX.length) {
        const qx = queueX.pop()!;
        const qy = queueY.pop()!;
        const p = qy * width + qx;
        if (visited[p]) continue;
        visited[p] = 1;
        if (colorDistance(data, p * 3, ref) >= 75) continue;
        mask.data[p] = 1;
        if (qx > 0) { queueX.push(qx - 1); queueY.push(qy); }
        if (qx < width - 1) { queueX.push(qx + 1); queueY.push(qy); }
        if (qy > 0) { queueX.push(qx); queueY.push(qy - 1); }
        if (qy < height - 1) { queueX.push(qx); queueY.push(qy + 1); }
      }
    }
    // Background points veto their regions.
    for (const pt of points) {
      if (pt.label !== 0) continue;
      const x = Math.min(width - 1, Math.max(0, Math.round(pt.x)));
      const y = Math.min(height - 1, Math.max(0, Math.round(pt.y)));
      const k = (y * width + x) * 3;
      const ref: [number, number, number] = [data[k], data[k + 1], data[k + 2]];
      for (let p = 0; p < mask.data.length; p++) {
        if (mask.data[p] && colorDistance(data, p * 3, ref) < 40) mask.data[p] = 0;
      }
    }
    return mask;
  }
}

export class HeuristicEverything implements EverythingSegmenter {
  generate(image: RgbImage): BinaryMask[] {
    const comps = componentsByColor(image, 6, 120);
    return comps.map((c) => c.mask);
  }
}

export function heuristicBackend(): Backend {
  return {
    detector: new HeuristicDetector(),
    segmenter: new HeuristicSegmenter(),
    everything: new HeuristicEverything(),
  };
}

/* ------------------------- checkpoint backend -------------------------- */

const CHECKPOINT_FILES: Record<string, string> = {
  detector: "grounding_detector.onnx",
  segmenter: "promptable_segmenter.onnx",
  textEncoder: "text_encoder.onnx",
};

/**
 * Resolve the weights a checkpoint-backed run needs, failing fast with
 * CheckpointMissing when any file is absent. Actual runtime inference
 * is wired in deployments that ship the weights; this build targets the
 * offline heuristic backend.
 */
export function checkpointBackend(checkpointDir: string | undefined): Backend {
  const dir = checkpointDir ?? "";
  const missing = Object.values(CHECKPOINT_FILES).filter(
    (f) => !dir || !fs.existsSync(path.join(dir, f)),
  );
  if (missing.length > 0) {
    throw new CheckpointMissing(
      `checkpoint files not found under ${dir || "(unset)"}: ${missing.join(", ")}`,
    );
  }
  throw new CheckpointMissing(
    "checkpoint runtime is not bundled with this build; use the heuristic backend",
  );
}
