/**
 * Acceptance: a locally synthesized 5 s video must produce exactly 20
 * frame embeddings, pool to their mean (1e-6), and the resulting archive
 * must satisfy both this package's verifier and the analysis core's
 * reader.
 */

import assert from "node:assert/strict";
import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { verifyArchive } from "../src/archive.js";
import { decodeVideo } from "../src/decode.js";
import { SeededProjectionEncoder } from "../src/encoder.js";
import { extract } from "../src/extract.js";
import { nearestFrameIndex, samplingSchedule } from "../src/schedule.js";
import { makeTestVideo } from "./helpers.js";

const MODEL = "test:proj-16";

test("5 s video: 20 frame embeddings, pooled mean, both readers accept", async (t) => {
  const dir = mkdtempSync(join(tmpdir(), "fe-acc-"));
  const videoPath = join(dir, "demo-0.y4m");
  makeTestVideo(videoPath, { seconds: 5, fps: 8 });
  const archivePath = join(dir, "archive.jsonl");

  const summary = await extract({
    inputDir: dir,
    conceptMap: [{ pattern: "demo-*", concept: "demo" }],
    intervalSec: 0.25,
    modelId: MODEL,
    pool: "mean",
    output: archivePath,
  });
  assert.equal(summary.processed, 1);

  const record = JSON.parse(readFileSync(archivePath, "utf-8").trim());
  assert.equal(record.n_frames, 20);
  assert.equal(record.video_id, "demo-0");
  assert.equal(record.concept, "demo");
  assert.equal(record.vector.length, record.dim);

  // independent recomputation: decode, schedule, encode, average
  const video = decodeVideo(videoPath);
  const schedule = samplingSchedule(video.durationSec, 0.25);
  assert.equal(schedule.length, 20);
  const encoder = new SeededProjectionEncoder(16, MODEL);
  const frameTimes = video.frames.map((f) => f.timestampSec);
  const embeddings: number[][] = [];
  for (const t of schedule) {
    embeddings.push(
      await encoder.encode(video.frames[nearestFrameIndex(frameTimes, t)])
    );
  }
  assert.equal(embeddings.length, 20);
  for (let j = 0; j < record.dim; j++) {
    const mean = embeddings.reduce((s, e) => s + e[j], 0) / embeddings.length;
    assert.ok(
      Math.abs(record.vector[j] - mean) < 1e-6,
      `component ${j}: ${record.vector[j]} vs ${mean}`
    );
  }

  // this package's contract verifier: zero violations
  const report = verifyArchive(archivePath);
  assert.equal(report.violations.length, 0);
  assert.equal(report.ok, true);
  assert.deepEqual([...report.concepts.entries()], [["demo", 1]]);

  // the analysis core's reader (the shared file contract), when installed
  const probe = spawnSync("python3", ["-c", "import veatkit"], {
    stdio: "ignore",
  });
  if (probe.error || probe.status !== 0) {
    t.diagnostic("veatkit not importable; analysis-core reader check skipped");
    return;
  }
  const reader = spawnSync(
    "python3",
    [
      "-c",
      "import sys\n" +
        "from veatkit import read_archive\n" +
        "records = read_archive(sys.argv[1])\n" +
        "assert len(records) == 1 and records[0].n_frames == 20\n" +
        "print('reader-ok')",
      archivePath,
    ],
    { encoding: "utf-8" }
  );
  assert.equal(reader.status, 0, reader.stderr);
  assert.match(reader.stdout, /reader-ok/);
});
