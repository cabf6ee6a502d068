/**
 * Frame-embedding pooling. The default is the plain component-wise mean;
 * "mean-of-normalized" L2-units each frame first (normalizing the pooled
 * vector itself would not change cosine similarities, so only the
 * pre-pooling variant exists).
 */

export type PoolMode = "mean" | "mean-of-normalized";

export function poolFrames(frames: number[][], mode: PoolMode = "mean"): number[] {
  if (frames.length === 0) {
    throw new Error("cannot pool an empty frame list");
  }
  const dim = frames[0].length;
  if (dim < 1) {
    throw new Error("frame embeddings must have dimension >= 1");
  }
  for (const f of frames) {
    if (f.length !== dim) {
      throw new Error(
        `inconsistent frame dimensions: ${f.length} vs ${dim}`
      );
    }
  }
  const pooled = new Array<number>(dim).fill(0);
  for (const f of frames) {
    let source = f;
    if (mode === "mean-of-normalized") {
      const norm = Math.sqrt(f.reduce((s, v) => s + v * v, 0));
      if (norm === 0) {
        throw new Error("cannot normalize an all-zeros frame embedding");
      }
      source = f.map((v) => v / norm);
    }
    for (let j = 0; j < dim; j++) {
      pooled[j] += source[j];
    }
  }
  for (let j = 0; j < dim; j++) {
    pooled[j] /= frames.length;
  }
  if (pooled.every((v) => v === 0)) {
    throw new Error("frames pool to the zero vector; cosine undefined");
  }
  return pooled;
}
