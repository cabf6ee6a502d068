import assert from "node:assert/strict";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { verifyArchive, writeArchive } from "../src/archive.js";
import { poolFrames } from "../src/pool.js";

function tmpFile(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "fe-")), name);
}

test("pooling one frame is the identity", () => {
  assert.deepEqual(poolFrames([[1.5, -2.0, 0.25]]), [1.5, -2.0, 0.25]);
});

test("pooling averages component-wise", () => {
  assert.deepEqual(poolFrames([[2, 0], [0, 2]]), [1, 1]);
});

test("mean-of-normalized units each frame first", () => {
  const pooled = poolFrames([[2, 0], [0, 4]], "mean-of-normalized");
  assert.deepEqual(pooled, [0.5, 0.5]);
});

test("pooling rejects empty, mismatched, and zero-sum inputs", () => {
  assert.throws(() => poolFrames([]));
  assert.throws(() => poolFrames([[1, 2], [1, 2, 3]]));
  assert.throws(() => poolFrames([[1, 0], [-1, 0]]), /zero/);
  assert.throws(() => poolFrames([[0, 0]], "mean-of-normalized"), /normalize/);
});

test("write then verify reports OK with per-concept counts", () => {
  const path = tmpFile("ok.jsonl");
  writeArchive(
    [
      { video_id: "a", concept: "flower", dim: 2, n_frames: 20,
        vector: [0.1, 0.2], source_path: "a.y4m" },
      { video_id: "b", concept: "flower", dim: 2, n_frames: 20,
        vector: [0.3, 1 / 3], source_path: null },
    ],
    path
  );
  const report = verifyArchive(path);
  assert.equal(report.ok, true);
  assert.equal(report.records, 2);
  assert.deepEqual([...report.concepts.entries()], [["flower", 2]]);
  // 2 != the conventional 30 per set -> warning, not violation
  assert.equal(report.warnings.length, 1);
  assert.match(report.warnings[0], /30/);
});

test("floats survive the archive byte-for-byte", () => {
  const path = tmpFile("floats.jsonl");
  const vector = [0.1 + 0.2, 1 / 3, -1e-17, 6.02e23];
  writeArchive(
    [{ video_id: "v", concept: "c", dim: 4, n_frames: 1, vector,
       source_path: null }],
    path
  );
  const parsed = JSON.parse(readFileSync(path, "utf-8").trim());
  assert.deepEqual(parsed.vector, vector);
});

test("missing field violations carry line numbers", () => {
  const path = tmpFile("bad.jsonl");
  const good = JSON.stringify({
    video_id: "a", concept: "c", dim: 1, n_frames: 1, vector: [1],
    source_path: null,
  });
  const missing = JSON.stringify({
    video_id: "b", concept: "c", dim: 1, vector: [1], source_path: null,
  });
  writeFileSync(path, `${good}\n${missing}\n`);
  const report = verifyArchive(path);
  assert.equal(report.ok, false);
  assert.equal(report.violations.length, 1);
  assert.equal(report.violations[0].line, 2);
  assert.match(report.violations[0].message, /n_frames/);
});

test("length mismatches, zero vectors, and duplicates are violations", () => {
  const path = tmpFile("bad2.jsonl");
  const rows = [
    { video_id: "a", concept: "c", dim: 3, n_frames: 1, vector: [1, 2],
      source_path: null },
    { video_id: "b", concept: "c", dim: 2, n_frames: 1, vector: [0, 0],
      source_path: null },
    { video_id: "d", concept: "c", dim: 1, n_frames: 1, vector: [1],
      source_path: null },
    { video_id: "d", concept: "c", dim: 1, n_frames: 1, vector: [2],
      source_path: null },
  ];
  writeFileSync(path, rows.map((r) => JSON.stringify(r)).join("\n") + "\n");
  const report = verifyArchive(path);
  assert.equal(report.ok, false);
  const lines = report.violations.map((v) => v.line);
  assert.deepEqual(lines, [1, 2, 4]);
  assert.match(report.violations[2].message, /duplicate/);
});

test("empty archives cannot be written and fail verification", () => {
  assert.throws(() => writeArchive([], tmpFile("never.jsonl")));
  const path = tmpFile("empty.jsonl");
  writeFileSync(path, "");
  assert.equal(verifyArchive(path).ok, false);
});
