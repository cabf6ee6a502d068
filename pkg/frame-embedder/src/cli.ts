#!/usr/bin/env node
/**
 * frame-embedder CLI.
 *
 *   frame-embedder extract --input-dir videos/ --concept "flower-*=flower" \
 *       --interval 0.25 --model Xenova/clip-vit-base-patch32 \
 *       --pool mean --output archive.jsonl
 *   frame-embedder verify archive.jsonl
 *
 * Exit codes: 0 success, 1 validation/contract error, 2 I/O error.
 */

import { DEFAULT_MODEL_ID } from "./encoder.js";
import { EXPECTED_SET_SIZE, verifyArchive } from "./archive.js";
import { ExtractionError, extract } from "./extract.js";
import type { PoolMode } from "./pool.js";

const USAGE = `usage:
  frame-embedder extract --input-dir DIR --concept PATTERN=LABEL [...]
      [--interval SECONDS] [--model MODEL_ID] [--pool mean|mean-of-normalized]
      --output ARCHIVE [--log LOG]
  frame-embedder verify ARCHIVE`;

function fail(message: string, code: number): never {
  console.error(`error: ${message}`);
  console.error(USAGE);
  process.exit(code);
}

interface Flags {
  positional: string[];
  options: Map<string, string[]>;
}

function parseFlags(argv: string[], known: Set<string>, booleans: Set<string>): Flags {
  const positional: string[] = [];
  const options = new Map<string, string[]>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      positional.push(arg);
      continue;
    }
    const name = arg.slice(2);
    if (!known.has(name)) {
      fail(`unknown flag --${name}`, 1);
    }
    let value = "true";
    if (!booleans.has(name)) {
      i += 1;
      if (i >= argv.length) {
        fail(`--${name} needs a value`, 1);
      }
      value = argv[i];
    }
    const bucket = options.get(name) ?? [];
    bucket.push(value);
    options.set(name, bucket);
  }
  return { positional, options };
}

function single(flags: Flags, name: string): string | undefined {
  const values = flags.options.get(name);
  if (values === undefined) return undefined;
  if (values.length > 1) fail(`--${name} given more than once`, 1);
  return values[0];
}

async function cmdExtract(argv: string[]): Promise<number> {
  const flags = parseFlags(
    argv,
    new Set(["input-dir", "concept", "interval", "model", "pool", "output", "log"]),
    new Set()
  );
  const inputDir = single(flags, "input-dir");
  const output = single(flags, "output");
  if (!inputDir || !output) {
    fail("--input-dir and --output are required", 1);
  }
  const conceptMap = (flags.options.get("concept") ?? []).map((spec) => {
    const eq = spec.indexOf("=");
    if (eq <= 0 || eq === spec.length - 1) {
      fail(`--concept expects PATTERN=LABEL, got ${JSON.stringify(spec)}`, 1);
    }
    return { pattern: spec.slice(0, eq), concept: spec.slice(eq + 1) };
  });
  if (conceptMap.length === 0) {
    fail("at least one --concept PATTERN=LABEL is required", 1);
  }
  const intervalSec = Number(single(flags, "interval") ?? "0.25");
  if (!(intervalSec > 0)) {
    fail(`--interval must be positive, got ${single(flags, "interval")}`, 1);
  }
  const pool = (single(flags, "pool") ?? "mean") as PoolMode;
  if (pool !== "mean" && pool !== "mean-of-normalized") {
    fail(`--pool must be mean or mean-of-normalized, got ${pool}`, 1);
  }
  const summary = await extract({
    inputDir,
    conceptMap,
    intervalSec,
    modelId: single(flags, "model") ?? DEFAULT_MODEL_ID,
    pool,
    output,
    logPath: single(flags, "log"),
  });
  console.log(
    `wrote ${summary.processed} record(s) to ${summary.archive} ` +
      `(${summary.skipped} skipped); log: ${summary.logPath}`
  );
  return 0;
}

function cmdVerify(argv: string[]): number {
  const flags = parseFlags(argv, new Set(), new Set());
  if (flags.positional.length !== 1) {
    fail("verify takes exactly one archive path", 1);
  }
  const report = verifyArchive(flags.positional[0]);
  for (const v of report.violations) {
    console.error(`line ${v.line}: ${v.message}`);
  }
  for (const w of report.warnings) {
    console.error(`warning: ${w}`);
  }
  if (!report.ok) {
    console.error(`FAILED: ${report.violations.length} violation(s)`);
    return 1;
  }
  const perConcept = [...report.concepts.entries()]
    .map(([c, n]) => `${c}=${n}`)
    .join(", ");
  console.log(
    `OK, ${report.records} record(s), ${report.concepts.size} concept(s)` +
      (perConcept ? ` (${perConcept})` : "")
  );
  return 0;
}

async function main(): Promise<number> {
  const [, , command, ...rest] = process.argv;
  try {
    if (command === "extract") return await cmdExtract(rest);
    if (command === "verify") return cmdVerify(rest);
    if (command === "--help" || command === "-h" || command === undefined) {
      console.log(USAGE);
      return command === undefined ? 1 : 0;
    }
    fail(`unknown command ${JSON.stringify(command)}`, 1);
  } catch (err) {
    if (err instanceof ExtractionError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code !== undefined) {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
