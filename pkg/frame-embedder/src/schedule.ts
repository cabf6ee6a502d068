/**
 * Frame sampling schedule: timestamps k * interval for k = 0, 1, ...
 * while strictly below the video duration. A 5 s video at the default
 * 0.25 s interval yields exactly 20 timestamps (0.00 .. 4.75).
 */
export function samplingSchedule(durationSec: number, intervalSec: number): number[] {
  if (!(durationSec > 0)) {
    throw new Error(`duration must be positive, got ${durationSec}`);
  }
  if (!(intervalSec > 0)) {
    throw new Error(`interval must be positive, got ${intervalSec}`);
  }
  const out: number[] = [];
  for (let k = 0; k * intervalSec < durationSec; k++) {
    out.push(k * intervalSec);
  }
  return out;
}

/** Index of the decoded frame nearest to a timestamp (earlier wins ties). */
export function nearestFrameIndex(frameTimes: number[], t: number): number {
  if (frameTimes.length === 0) {
    throw new Error("no decoded frames");
  }
  let best = 0;
  let bestDist = Math.abs(frameTimes[0] - t);
  for (let i = 1; i < frameTimes.length; i++) {
    const dist = Math.abs(frameTimes[i] - t);
    if (dist < bestDist) {
      best = i;
      bestDist = dist;
    }
  }
  return best;
}
