import { describe, expect, it } from "vitest";
import { heuristicBackend } from "../src/backends.js";
import { segmentPromptFiltered } from "../src/filtered.js";
import { makeHousePhoto } from "../src/image.js";
import { makeConfig, type ScoredMask } from "../src/types.js";

const backend = heuristicBackend();

function maskKey(m: ScoredMask): string {
  return Buffer.from(m.mask.data).toString("base64");
}

describe("prompt-filtered keep-set monotonicity", () => {
  it("raising the threshold never adds masks; lowering never removes", () => {
    const image = makeHousePhoto(7).image;
    const thresholds = [0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 0.95];
    let previous: Set<string> | null = null;
    let previousCount = Infinity;
    for (const t of thresholds) {
      for (const method of ["SAM-CLIP", "SAM-CLPS"] as const) {
        const kept = segmentPromptFiltered(image, makeConfig({ method, simThreshold: t }), backend);
        if (method !== "SAM-CLIP") continue;
        const keys = new Set(kept.map(maskKey));
        if (previous !== null) {
          for (const key of keys) expect(previous.has(key)).toBe(true);
          expect(keys.size).toBeLessThanOrEqual(previousCount);
        }
        previous = keys;
        previousCount = keys.size;
      }
    }
  });

  it("two-threshold superset relation on one image", () => {
    const image = makeHousePhoto(19).image;
    const loose = segmentPromptFiltered(
      image,
      makeConfig({ method: "SAM-CLPS", simThreshold: 0.3 }),
      backend,
    );
    const tight = segmentPromptFiltered(
      image,
      makeConfig({ method: "SAM-CLPS", simThreshold: 0.7 }),
      backend,
    );
    const looseKeys = new Set(loose.map(maskKey));
    for (const m of tight) expect(looseKeys.has(maskKey(m))).toBe(true);
  });
});
