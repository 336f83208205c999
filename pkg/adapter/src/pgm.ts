/** Strict binary PGM (P5) IO matching the mask exchange format:
 * maxval 255, pixel values restricted to 0 and 255.
 */

import * as fs from "node:fs";
import type { BinaryMask } from "./types.js";

export function writePgm(path: string, mask: BinaryMask): void {
  const header = Buffer.from(`P5\n${mask.width} ${mask.height}\n255\n`, "ascii");
  const raster = Buffer.alloc(mask.width * mask.height);
  for (let i = 0; i < mask.data.length; i++) raster[i] = mask.data[i] ? 255 : 0;
  fs.writeFileSync(path, Buffer.concat([header, raster]));
}

export function readPgm(path: string): BinaryMask {
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
    if (start === pos) throw new Error(`${path}: truncated PGM header`);
    fields.push(data.subarray(start, pos).toString("ascii"));
  }
  if (fields[0] !== "P5") throw new Error(`${path}: not a binary PGM`);
  const width = Number(fields[1]);
  const height = Number(fields[2]);
  if (Number(fields[3]) !== 255) throw new Error(`${path}: maxval must be 255`);
  pos += 1;
  const raster = data.subarray(pos, pos + width * height);
  if (raster.length !== width * height) {
    throw new Error(`${path}: raster has ${raster.length} bytes for ${width}x${height}`);
  }
  const out = new Uint8Array(width * height);
  for (let i = 0; i < raster.length; i++) {
    if (raster[i] === 255) out[i] = 1;
    else if (raster[i] !== 0) throw new Error(`${path}: pixel value ${raster[i]} not in {0, 255}`);
  }
  return { width, height, data: out };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}
