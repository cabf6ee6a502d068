export { samplingSchedule, nearestFrameIndex } from "./schedule.js";
export { parseY4m, writeY4m, rgbToYuv, yuvToRgb } from "./y4m.js";
export type { Y4mVideo } from "./y4m.js";
export { decodeVideo, DecodeError, VIDEO_EXTENSIONS } from "./decode.js";
export type { DecodedVideo, RawFrame } from "./decode.js";
export {
  DEFAULT_MODEL_ID,
  SeededProjectionEncoder,
  loadEncoder,
} from "./encoder.js";
export type { FrameEncoder } from "./encoder.js";
export { poolFrames } from "./pool.js";
export type { PoolMode } from "./pool.js";
export {
  EXPECTED_SET_SIZE,
  serializeRecord,
  verifyArchive,
  writeArchive,
} from "./archive.js";
export type { ArchiveRecord, VerifyReport, Violation } from "./archive.js";
export { extract, matchConcept, ExtractionError } from "./extract.js";
export type { ExtractionJob, ExtractionSummary } from "./extract.js";
