import assert from "node:assert/strict";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { verifyArchive } from "../src/archive.js";
import { decodeVideo } from "../src/decode.js";
import { SeededProjectionEncoder } from "../src/encoder.js";
import { ExtractionError, extract, matchConcept } from "../src/extract.js";
import { makeTestVideo } from "./helpers.js";

const MODEL = "test:proj-16";

function freshDir(): string {
  return mkdtempSync(join(tmpdir(), "fe-"));
}

test("concept patterns must match exactly once", () => {
  const map = [
    { pattern: "flower-*", concept: "flower" },
    { pattern: "*.y4m", concept: "everything" },
  ];
  assert.throws(() => matchConcept("flower-01.y4m", map), /2 concept patterns/);
  assert.throws(
    () => matchConcept("insect-01.mp4", [map[0]]),
    /no concept pattern/
  );
  assert.equal(matchConcept("flower-01.y4m", [map[0]]), "flower");
});

test("single-frame still video: n_frames 1, vector equals the frame embedding", async () => {
  const dir = freshDir();
  makeTestVideo(join(dir, "still-0.y4m"), { seconds: 1, fps: 1 });
  const out = join(dir, "out.jsonl");
  const summary = await extract({
    inputDir: dir,
    conceptMap: [{ pattern: "still-*", concept: "still" }],
    intervalSec: 1.0,
    modelId: MODEL,
    pool: "mean",
    output: out,
  });
  assert.equal(summary.processed, 1);
  const record = JSON.parse(readFileSync(out, "utf-8").trim());
  assert.equal(record.n_frames, 1);
  const encoder = new SeededProjectionEncoder(16, MODEL);
  const frame = decodeVideo(join(dir, "still-0.y4m")).frames[0];
  const direct = await encoder.encode(frame);
  assert.deepEqual(record.vector, direct);
});

test("reprocessing the same video yields identical vectors", async () => {
  const dir = freshDir();
  makeTestVideo(join(dir, "clip-0.y4m"), { seconds: 2, fps: 4 });
  const args = {
    inputDir: dir,
    conceptMap: [{ pattern: "clip-*", concept: "clip" }],
    intervalSec: 0.25,
    modelId: MODEL,
    pool: "mean" as const,
    output: "",
  };
  const out1 = join(dir, "a.jsonl");
  const out2 = join(dir, "b.jsonl");
  await extract({ ...args, output: out1 });
  await extract({ ...args, output: out2 });
  const v1 = JSON.parse(readFileSync(out1, "utf-8").trim()).vector;
  const v2 = JSON.parse(readFileSync(out2, "utf-8").trim()).vector;
  for (let i = 0; i < v1.length; i++) {
    assert.ok(Math.abs(v1[i] - v2[i]) < 1e-6);
  }
});

test("undecodable videos are skipped with a logged reason", async () => {
  const dir = freshDir();
  makeTestVideo(join(dir, "good-0.y4m"), { seconds: 1, fps: 4 });
  writeFileSync(join(dir, "bad-0.y4m"), "YUV4MPEG2 garbage");
  const out = join(dir, "out.jsonl");
  const summary = await extract({
    inputDir: dir,
    conceptMap: [{ pattern: "*", concept: "demo" }],
    intervalSec: 0.25,
    modelId: MODEL,
    pool: "mean",
    output: out,
  });
  assert.equal(summary.processed, 1);
  assert.equal(summary.skipped, 1);
  const log = readFileSync(summary.logPath, "utf-8")
    .trim()
    .split("\n")
    .map((l) => JSON.parse(l));
  const skipped = log.filter((e) => e.event === "skipped");
  assert.equal(skipped.length, 1);
  assert.match(skipped[0].reason, /bad-0\.y4m/);
  assert.equal(log[0].model_id, MODEL);
});

test("extraction fails when every video is undecodable", async () => {
  const dir = freshDir();
  writeFileSync(join(dir, "bad-0.y4m"), "nope");
  await assert.rejects(
    extract({
      inputDir: dir,
      conceptMap: [{ pattern: "*", concept: "demo" }],
      intervalSec: 0.25,
      modelId: MODEL,
      pool: "mean",
      output: join(dir, "out.jsonl"),
    }),
    ExtractionError
  );
});

test("output is sorted by (concept, video_id)", async () => {
  const dir = freshDir();
  makeTestVideo(join(dir, "zz-1.y4m"), { seconds: 1, fps: 4 });
  makeTestVideo(join(dir, "aa-1.y4m"), { seconds: 1, fps: 4 });
  makeTestVideo(join(dir, "mm-1.y4m"), { seconds: 1, fps: 4 });
  const out = join(dir, "out.jsonl");
  await extract({
    inputDir: dir,
    conceptMap: [
      { pattern: "zz-*", concept: "alpha" },
      { pattern: "aa-*", concept: "beta" },
      { pattern: "mm-*", concept: "alpha" },
    ],
    intervalSec: 0.5,
    modelId: MODEL,
    pool: "mean",
    output: out,
  });
  const rows = readFileSync(out, "utf-8")
    .trim()
    .split("\n")
    .map((l) => JSON.parse(l));
  assert.deepEqual(
    rows.map((r) => [r.concept, r.video_id]),
    [["alpha", "mm-1"], ["alpha", "zz-1"], ["beta", "aa-1"]]
  );
  assert.equal(verifyArchive(out).ok, true);
});

test("mean-of-normalized pooling is applied when requested", async () => {
  const dir = freshDir();
  makeTestVideo(join(dir, "clip-0.y4m"), { seconds: 1, fps: 4 });
  const out = join(dir, "out.jsonl");
  await extract({
    inputDir: dir,
    conceptMap: [{ pattern: "*", concept: "demo" }],
    intervalSec: 0.25,
    modelId: MODEL,
    pool: "mean-of-normalized",
    output: out,
  });
  const record = JSON.parse(readFileSync(out, "utf-8").trim());
  // mean of unit vectors has norm <= 1
  const norm = Math.sqrt(
    record.vector.reduce((s: number, v: number) => s + v * v, 0)
  );
  assert.ok(norm <= 1.0 + 1e-9);
});
