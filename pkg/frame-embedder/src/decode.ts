/**
 * Container decoding. The uncompressed y4m container is decoded natively;
 * every other container is piped through a system ffmpeg when one is on
 * PATH (converted to y4m on stdout), so common formats work wherever
 * ffmpeg is installed without binding this package to it.
 */

import { spawnSync } from "node:child_process";
import { readFileSync } from "node:fs";
import { extname } from "node:path";

import { parseY4m } from "./y4m.js";

export interface RawFrame {
  index: number;
  /** Presentation time in seconds (index / fps). */
  timestampSec: number;
  width: number;
  height: number;
  /** Packed RGB24, 3 * width * height bytes. */
  rgb: Uint8Array;
}

export interface DecodedVideo {
  path: string;
  width: number;
  height: number;
  fps: number;
  durationSec: number;
  frames: RawFrame[];
}

export class DecodeError extends Error {}

function fromY4mBytes(path: string, data: Uint8Array): DecodedVideo {
  const video = parseY4m(data);
  if (video.frames.length === 0) {
    throw new DecodeError(`${path}: no frames decoded`);
  }
  const fps = video.fpsNum / video.fpsDen;
  const frames = video.frames.map((rgb, index) => ({
    index,
    timestampSec: index / fps,
    width: video.width,
    height: video.height,
    rgb,
  }));
  return {
    path,
    width: video.width,
    height: video.height,
    fps,
    durationSec: video.frames.length / fps,
    frames,
  };
}

function decodeViaFfmpeg(path: string): DecodedVideo {
  const probe = spawnSync("ffmpeg", ["-version"], { stdio: "ignore" });
  if (probe.error || probe.status !== 0) {
    throw new DecodeError(
      `${path}: only .y4m is decoded natively and no ffmpeg binary is ` +
        "available on PATH to handle this container"
    );
  }
  const run = spawnSync(
    "ffmpeg",
    ["-v", "error", "-i", path, "-f", "yuv4mpegpipe", "-pix_fmt", "yuv444p", "-"],
    { maxBuffer: 1 << 30 }
  );
  if (run.status !== 0 || !run.stdout || run.stdout.length === 0) {
    const detail = run.stderr ? run.stderr.toString().trim() : "no output";
    throw new DecodeError(`${path}: ffmpeg failed: ${detail}`);
  }
  return fromY4mBytes(path, run.stdout);
}

export function decodeVideo(path: string): DecodedVideo {
  if (extname(path).toLowerCase() === ".y4m") {
    let data: Uint8Array;
    try {
      data = readFileSync(path);
    } catch (err) {
      throw new DecodeError(`${path}: ${(err as Error).message}`);
    }
    try {
      return fromY4mBytes(path, data);
    } catch (err) {
      throw new DecodeError(`${path}: ${(err as Error).message}`);
    }
  }
  return decodeViaFfmpeg(path);
}

export const VIDEO_EXTENSIONS = new Set([
  ".y4m",
  ".mp4",
  ".mov",
  ".webm",
  ".mkv",
  ".avi",
  ".m4v",
]);
