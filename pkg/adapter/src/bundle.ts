/** Mask bundle emission in the exchange format the estimation pipeline
 * reads: one manifest.json plus one strict binary PGM per mask.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { readPgm, writePgm } from "./pgm.js";
import type { ScoredMask, VlmConfig } from "./types.js";

export interface MaskEntry {
  property_id: string;
  file: string;
  crop_origin_x: number;
  crop_origin_y: number;
  crop_w: number;
  crop_h: number;
  score: number;
  prompt: string;
  model_id: string;
}

export interface Manifest {
  panorama_id: string;
  masks: MaskEntry[];
}

export interface CropContext {
  panoramaId: string;
  propertyId: string;
  cropOriginX: number;
  cropOriginY: number;
}

/**
 * Write masks for one panorama as a bundle directory. Masks cover the
 * whole crop image, so crop_w/crop_h come from the mask dimensions and
 * the origin from the crop context. Returns the manifest path.
 */
export function emitBundle(
  masks: ScoredMask[],
  crop: CropContext,
  cfg: VlmConfig,
  outDir: string,
): string {
  fs.mkdirSync(outDir, { recursive: true });
  const entries: MaskEntry[] = [];
  masks.forEach((scored, i) => {
    const safe = crop.propertyId.replace(/[^A-Za-z0-9_-]/g, "_");
    const file = `${String(i).padStart(4, "0")}_${safe}.pgm`;
    writePgm(path.join(outDir, file), scored.mask);
    entries.push({
      property_id: crop.propertyId,
      file,
      crop_origin_x: crop.cropOriginX,
      crop_origin_y: crop.cropOriginY,
      crop_w: scored.mask.width,
      crop_h: scored.mask.height,
      score: scored.score,
      prompt: cfg.prompt,
      model_id: cfg.modelId,
    });
  });
  const manifest: Manifest = { panorama_id: crop.panoramaId, masks: entries };
  const manifestPath = path.join(outDir, "manifest.json");
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n");
  return manifestPath;
}

/** Read a bundle back (validation and round-trip checks). */
export function readBundle(dir: string): Manifest & { bitmaps: Array<ReturnType<typeof readPgm>> } {
  const manifestPath = path.join(dir, "manifest.json");
  if (!fs.existsSync(manifestPath)) throw new Error(`no manifest.json in ${dir}`);
  const manifest = JSON.parse(fs.readFileSync(manifestPath, "utf-8")) as Manifest;
  const bitmaps = manifest.masks.map((entry) => {
    const bitmap = readPgm(path.join(dir, entry.file));
    if (bitmap.width !== entry.crop_w || bitmap.height !== entry.crop_h) {
      throw new Error(
        `${entry.file}: bitmap ${bitmap.width}x${bitmap.height} vs manifest ${entry.crop_w}x${entry.crop_h}`,
      );
    }
    return bitmap;
  });
  return { ...manifest, bitmaps };
}
