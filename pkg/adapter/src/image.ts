/** Binary PPM (P6) image IO and a deterministic house-photo generator.
 *
 * PPM keeps the adapter dependency-free; crops produced by any tool can
 * be converted losslessly with ImageMagick or Pillow.
 */

import * as fs from "node:fs";
import type { RgbImage } from "./types.js";

export function readPpm(path: string): RgbImage {
  const data = fs.readFileSync(path);
  const fields: string[] = [];
  let pos = 0;
  while (fields.length < 4) {
    while (pos < data.length && isSpace(data[pos])) pos++;
    if (data[pos] === 0x23) {
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      continue;
    }
    const start = pos;
    while (pos < data.length && !isSpace(data[pos])) pos++;
    if (start === pos) throw new Error(`${path}: truncated PPM header`);
    fields.push(data.subarray(start, pos).toString("ascii"));
  }
  if (fields[0] !== "P6") throw new Error(`${path}: not a binary PPM (magic ${fields[0]})`);
  const width = Number(fields[1]);
  const height = Number(fields[2]);
  const maxval = Number(fields[3]);
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new Error(`${path}: bad PPM dimensions`);
  }
  if (maxval !== 255) throw new Error(`${path}: unsupported maxval ${maxval}`);
  pos += 1; // single whitespace after maxval
  const expected = width * height * 3;
  const raster = data.subarray(pos, pos + expected);
  if (raster.length !== expected) {
    throw new Error(`${path}: raster has ${raster.length} bytes, expected ${expected}`);
  }
  return { width, height, data: new Uint8Array(raster) };
}

export function writePpm(path: string, image: RgbImage): void {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, "ascii");
  fs.writeFileSync(path, Buffer.concat([header, Buffer.from(image.data)]));
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

/** Small deterministic PRNG (mulberry32). */
export function rng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function fillRect(
  img: RgbImage,
  x0: number,
  y0: number,
  x1: number,
  y1: number,
  color: [number, number, number],
  jitter = 0,
  rand?: () => number,
): void {
  for (let y = Math.max(0, y0); y < Math.min(img.height, y1); y++) {
    for (let x = Math.max(0, x0); x < Math.min(img.width, x1); x++) {
      const k = (y * img.width + x) * 3;
      for (let c = 0; c < 3; c++) {
        const noise = jitter && rand ? Math.round((rand() - 0.5) * 2 * jitter) : 0;
        img.data[k + c] = Math.max(0, Math.min(255, color[c] + noise));
      }
    }
  }
}

export interface HousePhoto {
  image: RgbImage;
  /** Ground-truth door rectangle in pixel coordinates. */
  door: { x0: number; y0: number; x1: number; y1: number };
}

/**
 * Draw a simple front-of-house view: sky, facade with windows, grass,
 * and one dark front door. Deterministic for a given seed.
 */
export function makeHousePhoto(seed: number, width = 320, height = 240): HousePhoto {
  const rand = rng(seed);
  const img: RgbImage = { width, height, data: new Uint8Array(width * height * 3) };

  const horizon = Math.floor(height * 0.78);
  fillRect(img, 0, 0, width, horizon, [186, 214, 239], 6, rand); // sky
  fillRect(img, 0, horizon, width, height, [96, 158, 86], 10, rand); // grass

  const facadeX0 = Math.floor(width * (0.12 + 0.08 * rand()));
  const facadeX1 = Math.floor(width * (0.82 + 0.1 * rand()));
  const facadeY0 = Math.floor(height * (0.22 + 0.08 * rand()));
  const facadeColor: [number, number, number] = [216, 205, 182];
  fillRect(img, facadeX0, facadeY0, facadeX1, horizon, facadeColor, 8, rand);
  // roof band
  fillRect(img, facadeX0 - 8, facadeY0 - 14, facadeX1 + 8, facadeY0, [124, 82, 70], 6, rand);

  // two windows
  const winW = Math.floor(width * 0.09);
  const winY0 = facadeY0 + Math.floor(height * 0.1);
  fillRect(img, facadeX0 + 14, winY0, facadeX0 + 14 + winW, winY0 + winW, [150, 180, 205], 5, rand);
  fillRect(img, facadeX1 - 14 - winW, winY0, facadeX1 - 14, winY0 + winW, [150, 180, 205], 5, rand);

  // the front door: dark, taller than wide, bottom on the grass line
  const doorW = Math.floor(width * (0.09 + 0.03 * rand()));
  const doorH = Math.floor(doorW * (2.0 + 0.4 * rand()));
  const doorX0 = Math.floor((facadeX0 + facadeX1) / 2 - doorW / 2 + (rand() - 0.5) * width * 0.1);
  const doorY1 = horizon;
  const door = { x0: doorX0, y0: doorY1 - doorH, x1: doorX0 + doorW, y1: doorY1 };
  fillRect(img, door.x0, door.y0, door.x1, door.y1, [58, 36, 28], 4, rand);

  return { image: img, door };
}
