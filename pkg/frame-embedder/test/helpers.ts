import { writeFileSync } from "node:fs";

import { writeY4m } from "../src/y4m.js";

/**
 * Synthesize an uncompressed test video whose frames sweep through
 * distinct flat colors, so consecutive frame embeddings differ.
 */
export function makeTestVideo(
  path: string,
  opts: { seconds?: number; fps?: number; width?: number; height?: number } = {}
): { frames: number; fps: number } {
  const seconds = opts.seconds ?? 5;
  const fps = opts.fps ?? 8;
  const width = opts.width ?? 32;
  const height = opts.height ?? 24;
  const nFrames = Math.round(seconds * fps);
  const frames: Uint8Array[] = [];
  for (let f = 0; f < nFrames; f++) {
    const rgb = new Uint8Array(3 * width * height);
    const r = Math.round((255 * f) / Math.max(1, nFrames - 1));
    const g = Math.round(255 * Math.abs(Math.sin(f / 3)));
    const b = 255 - r;
    for (let i = 0; i < width * height; i++) {
      rgb[3 * i] = r;
      rgb[3 * i + 1] = g;
      // a diagonal gradient keeps frames spatially non-uniform
      rgb[3 * i + 2] = (b + (i % width) * 3) % 256;
    }
    frames.push(rgb);
  }
  writeFileSync(path, writeY4m({ width, height, fpsNum: fps, fpsDen: 1, frames }));
  return { frames: nFrames, fps };
}
