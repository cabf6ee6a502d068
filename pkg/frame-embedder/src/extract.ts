/**
 * Extraction pipeline: directory of videos -> embedding archive.
 *
 * Each video is decoded, frames are picked at the scheduled timestamps
 * (nearest decoded frame per timestamp), encoded, and pooled into one
 * record. Output is sorted by (concept, video_id) so reruns are
 * byte-comparable; a JSONL log records per-video frame counts, the model
 * id, and any decode warnings.
 */

import { appendFileSync, readdirSync, writeFileSync } from "node:fs";
import { basename, extname, join } from "node:path";

import { ArchiveRecord, writeArchive } from "./archive.js";
import { DecodeError, VIDEO_EXTENSIONS, decodeVideo } from "./decode.js";
import { FrameEncoder, loadEncoder } from "./encoder.js";
import { PoolMode, poolFrames } from "./pool.js";
import { nearestFrameIndex, samplingSchedule } from "./schedule.js";

export interface ExtractionJob {
  inputDir: string;
  /** filename glob pattern (on the basename) -> concept label */
  conceptMap: Array<{ pattern: string; concept: string }>;
  intervalSec: number;
  modelId: string;
  pool: PoolMode;
  output: string;
  logPath?: string;
}

export interface ExtractionSummary {
  processed: number;
  skipped: number;
  archive: string;
  logPath: string;
}

export class ExtractionError extends Error {}

function globToRegExp(pattern: string): RegExp {
  const escaped = pattern.replace(/[.+^${}()|[\]\\]/g, "\\$&");
  return new RegExp(`^${escaped.replace(/\*/g, ".*").replace(/\?/g, ".")}$`);
}

export function matchConcept(
  fileName: string,
  conceptMap: Array<{ pattern: string; concept: string }>
): string {
  const matches = conceptMap.filter((entry) =>
    globToRegExp(entry.pattern).test(fileName)
  );
  if (matches.length === 0) {
    throw new ExtractionError(`${fileName}: matches no concept pattern`);
  }
  if (matches.length > 1) {
    const patterns = matches.map((m) => m.pattern).join(", ");
    throw new ExtractionError(
      `${fileName}: matches ${matches.length} concept patterns (${patterns}); ` +
        "each video must match exactly one"
    );
  }
  return matches[0].concept;
}

async function embedVideo(
  path: string,
  concept: string,
  intervalSec: number,
  encoder: FrameEncoder,
  pool: PoolMode
): Promise<{ record: ArchiveRecord; decodedFrames: number }> {
  const video = decodeVideo(path);
  const schedule = samplingSchedule(video.durationSec, intervalSec);
  if (schedule.length === 0) {
    throw new ExtractionError(`${path}: zero frames sampled`);
  }
  const frameTimes = video.frames.map((f) => f.timestampSec);
  const embeddings: number[][] = [];
  for (const t of schedule) {
    const frame = video.frames[nearestFrameIndex(frameTimes, t)];
    embeddings.push(await encoder.encode(frame));
  }
  const pooled = poolFrames(embeddings, pool);
  return {
    record: {
      video_id: basename(path, extname(path)),
      concept,
      dim: pooled.length,
      n_frames: schedule.length,
      vector: pooled,
      source_path: path,
    },
    decodedFrames: video.frames.length,
  };
}

export async function extract(job: ExtractionJob): Promise<ExtractionSummary> {
  if (!(job.intervalSec > 0)) {
    throw new ExtractionError(`interval must be positive, got ${job.intervalSec}`);
  }
  if (job.conceptMap.length === 0) {
    throw new ExtractionError("at least one pattern=concept mapping is required");
  }
  const names = readdirSync(job.inputDir)
    .filter((name) => VIDEO_EXTENSIONS.has(extname(name).toLowerCase()))
    .sort();
  if (names.length === 0) {
    throw new ExtractionError(`${job.inputDir}: no video files found`);
  }
  const encoder = await loadEncoder(job.modelId);
  const logPath = job.logPath ?? `${job.output}.log.jsonl`;
  writeFileSync(
    logPath,
    JSON.stringify({
      event: "start",
      input_dir: job.inputDir,
      model_id: encoder.id,
      interval_sec: job.intervalSec,
      pool: job.pool,
      videos: names.length,
    }) + "\n",
    "utf-8"
  );

  const records: ArchiveRecord[] = [];
  let skipped = 0;
  for (const name of names) {
    const path = join(job.inputDir, name);
    const concept = matchConcept(name, job.conceptMap); // config error: fail fast
    try {
      const { record, decodedFrames } = await embedVideo(
        path, concept, job.intervalSec, encoder, job.pool
      );
      records.push(record);
      appendFileSync(
        logPath,
        JSON.stringify({
          event: "video",
          video_id: record.video_id,
          concept,
          n_frames: record.n_frames,
          decoded_frames: decodedFrames,
          model_id: encoder.id,
        }) + "\n"
      );
    } catch (err) {
      if (err instanceof DecodeError) {
        skipped += 1;
        appendFileSync(
          logPath,
          JSON.stringify({
            event: "skipped",
            video: path,
            reason: err.message,
          }) + "\n"
        );
        continue;
      }
      throw err;
    }
  }
  if (records.length === 0) {
    throw new ExtractionError(
      `all ${names.length} video(s) failed to decode; see ${logPath}`
    );
  }
  records.sort((a, b) =>
    a.concept === b.concept
      ? a.video_id.localeCompare(b.video_id)
      : a.concept.localeCompare(b.concept)
  );
  writeArchive(records, job.output);
  appendFileSync(
    logPath,
    JSON.stringify({
      event: "done",
      records: records.length,
      skipped,
      output: job.output,
    }) + "\n"
  );
  return { processed: records.length, skipped, archive: job.output, logPath };
}
