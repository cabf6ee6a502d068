import assert from "node:assert/strict";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { decodeVideo } from "../src/decode.js";
import { parseY4m, rgbToYuv, writeY4m, yuvToRgb } from "../src/y4m.js";
import { makeTestVideo } from "./helpers.js";

test("write then parse preserves geometry, rate, and frame count", () => {
  const frames = [
    new Uint8Array(3 * 4 * 2).fill(10),
    new Uint8Array(3 * 4 * 2).fill(200),
  ];
  const bytes = writeY4m({ width: 4, height: 2, fpsNum: 4, fpsDen: 1, frames });
  const parsed = parseY4m(bytes);
  assert.equal(parsed.width, 4);
  assert.equal(parsed.height, 2);
  assert.equal(parsed.fpsNum, 4);
  assert.equal(parsed.frames.length, 2);
});

test("flat colors survive the YUV round trip within quantization error", () => {
  const colors: Array<[number, number, number]> = [
    [255, 0, 0], [0, 255, 0], [0, 0, 255], [128, 128, 128], [255, 255, 255],
  ];
  for (const [r, g, b] of colors) {
    const [y, u, v] = rgbToYuv(r, g, b);
    const [r2, g2, b2] = yuvToRgb(y, u, v);
    assert.ok(Math.abs(r - r2) <= 2, `${r} vs ${r2}`);
    assert.ok(Math.abs(g - g2) <= 2, `${g} vs ${g2}`);
    assert.ok(Math.abs(b - b2) <= 2, `${b} vs ${b2}`);
  }
});

test("decodeVideo reads a synthesized y4m with correct duration", () => {
  const dir = mkdtempSync(join(tmpdir(), "fe-"));
  const path = join(dir, "clip.y4m");
  const { frames, fps } = makeTestVideo(path, { seconds: 2, fps: 4 });
  const video = decodeVideo(path);
  assert.equal(video.frames.length, frames);
  assert.equal(video.fps, fps);
  assert.ok(Math.abs(video.durationSec - 2.0) < 1e-9);
  assert.equal(video.frames[3].timestampSec, 3 / fps);
});

test("bad magic and truncated payloads are rejected", () => {
  assert.throws(() => parseY4m(Buffer.from("RIFFxxxx\n")), /magic/);
  const good = writeY4m({
    width: 2, height: 2, fpsNum: 1, fpsDen: 1,
    frames: [new Uint8Array(12).fill(1)],
  });
  assert.throws(() => parseY4m(good.subarray(0, good.length - 4)), /truncated/);
});

test("unsupported colorspace is named in the error", () => {
  const header = Buffer.from("YUV4MPEG2 W2 H2 F1:1 C410\n", "ascii");
  assert.throws(() => parseY4m(header), /C410/);
});

test("non-y4m extension without ffmpeg fails with a clear decode error", () => {
  const dir = mkdtempSync(join(tmpdir(), "fe-"));
  const path = join(dir, "clip.mp4");
  writeFileSync(path, Buffer.from("not really a video"));
  // passes when ffmpeg exists (it will reject the garbage); the message
  // must mention the path either way
  assert.throws(() => decodeVideo(path), /clip\.mp4/);
});
