#!/usr/bin/env node
/** adapter: segment door regions in crop images and emit mask bundles.
 *
 * Usage:
 *   adapter --images DIR --out DIR [--prompt STR] [--method NAME]
 *           [--box-threshold F] [--sim-threshold F]
 *           [--backend heuristic|checkpoint] [--checkpoints DIR]
 *
 * Input images are binary PPM (P6) crops. An optional sidecar
 * {name}.json per image supplies {"panorama_id", "property_id",
 * "crop_origin_x", "crop_origin_y"}; without one, the file stem is used
 * as both ids with origin (0, 0). Output bundles land in
 * {out}/{panorama_id}/ in the mask exchange format.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { checkpointBackend, heuristicBackend, type Backend } from "./backends.js";
import { emitBundle, type CropContext } from "./bundle.js";
import { segmentPromptFiltered } from "./filtered.js";
import { readPpm } from "./image.js";
import { segmentPromptTriggered } from "./triggered.js";
import {
  CheckpointMissing,
  PROMPT_TRIGGERED,
  makeConfig,
  type ScoredMask,
  type VlmConfig,
} from "./types.js";

interface CliArgs {
  images: string;
  out: string;
  prompt?: string;
  method?: string;
  boxThreshold?: number;
  simThreshold?: number;
  backend: "heuristic" | "checkpoint";
  checkpoints?: string;
}

function parseArgs(argv: string[]): CliArgs {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near ${flag}`);
    }
    args[flag.slice(2)] = value;
  }
  for (const required of ["images", "out"]) {
    if (!(required in args)) throw new Error(`--${required} is required`);
  }
  const backend = (args["backend"] ?? "heuristic") as CliArgs["backend"];
  if (backend !== "heuristic" && backend !== "checkpoint") {
    throw new Error(`--backend must be heuristic or checkpoint, got ${backend}`);
  }
  return {
    images: args["images"],
    out: args["out"],
    prompt: args["prompt"],
    method: args["method"],
    boxThreshold: args["box-threshold"] !== undefined ? Number(args["box-threshold"]) : undefined,
    simThreshold: args["sim-threshold"] !== undefined ? Number(args["sim-threshold"]) : undefined,
    backend,
    checkpoints: args["checkpoints"],
  };
}

function cropContext(imagePath: string): CropContext {
  const stem = path.basename(imagePath).replace(/\.ppm$/i, "");
  const sidecar = imagePath.replace(/\.ppm$/i, ".json");
  let meta: Record<string, unknown> = {};
  if (fs.existsSync(sidecar)) {
    meta = JSON.parse(fs.readFileSync(sidecar, "utf-8"));
  }
  return {
    panoramaId: String(meta["panorama_id"] ?? stem),
    propertyId: String(meta["property_id"] ?? stem),
    cropOriginX: Number(meta["crop_origin_x"] ?? 0),
    cropOriginY: Number(meta["crop_origin_y"] ?? 0),
  };
}

export function segment(imagePath: string, cfg: VlmConfig, backend: Backend): ScoredMask[] {
  const image = readPpm(imagePath);
  return PROMPT_TRIGGERED.includes(cfg.method)
    ? segmentPromptTriggered(image, cfg, backend)
    : segmentPromptFiltered(image, cfg, backend);
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const cfg = makeConfig({
      ...(args.method !== undefined ? { method: args.method as VlmConfig["method"] } : {}),
      ...(args.prompt !== undefined ? { prompt: args.prompt } : {}),
      ...(args.boxThreshold !== undefined ? { boxThreshold: args.boxThreshold } : {}),
      ...(args.simThreshold !== undefined ? { simThreshold: args.simThreshold } : {}),
      ...(args.checkpoints !== undefined ? { checkpointDir: args.checkpoints } : {}),
      modelId: args.backend === "heuristic" ? `heuristic/${args.method ?? "GDINO-SAM"}` : "checkpoint",
    });
    const backend = args.backend === "heuristic" ? heuristicBackend() : checkpointBackend(cfg.checkpointDir);
    const images = fs
      .readdirSync(args.images)
      .filter((f) => f.toLowerCase().endsWith(".ppm"))
      .sort();
    if (images.length === 0) {
      console.error(`error: no .ppm images in ${args.images}`);
      return 1;
    }
    let total = 0;
    for (const name of images) {
      const imagePath = path.join(args.images, name);
      const crop = cropContext(imagePath);
      const masks = segment(imagePath, cfg, backend);
      const outDir = path.join(args.out, crop.panoramaId);
      emitBundle(masks, crop, cfg, outDir);
      total += masks.length;
      console.log(`${name}: ${masks.length} mask(s) -> ${outDir}`);
    }
    console.log(`emitted ${total} mask(s) for ${images.length} image(s) [${cfg.method}]`);
    return 0;
  } catch (err) {
    if (err instanceof CheckpointMissing) {
      console.error(`error: ${err.message}`);
      return 3;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  (process.argv[1].endsWith("cli.ts") || process.argv[1].endsWith("cli.js"));
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
