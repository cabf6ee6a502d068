/**
 * Frame encoders. The production encoder is a CLIP-family vision model
 * loaded through @huggingface/transformers (installed separately; model
 * ids like "Xenova/clip-vit-base-patch32"). For hermetic tests and
 * offline runs there is a deterministic seeded-projection encoder
 * ("test:proj-<dim>") that downsamples each frame to a grayscale grid and
 * projects it through a PRNG-generated matrix keyed on the model id.
 */

import type { RawFrame } from "./decode.js";

export interface FrameEncoder {
  readonly id: string;
  readonly dim: number;
  encode(frame: RawFrame): Promise<number[]>;
}

export const DEFAULT_MODEL_ID = "Xenova/clip-vit-base-patch32";

const PROJ_GRID = 16; // frames are box-averaged onto a 16x16 grayscale grid

/** mulberry32: tiny deterministic PRNG, enough for a fixed projection. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function grayGrid(frame: RawFrame): Float64Array {
  const { width, height, rgb } = frame;
  const grid = new Float64Array(PROJ_GRID * PROJ_GRID);
  const counts = new Float64Array(PROJ_GRID * PROJ_GRID);
  for (let row = 0; row < height; row++) {
    const gr = Math.min(PROJ_GRID - 1, Math.floor((row * PROJ_GRID) / height));
    for (let col = 0; col < width; col++) {
      const gc = Math.min(PROJ_GRID - 1, Math.floor((col * PROJ_GRID) / width));
      const i = 3 * (row * width + col);
      const gray =
        (0.299 * rgb[i] + 0.587 * rgb[i + 1] + 0.114 * rgb[i + 2]) / 255;
      grid[gr * PROJ_GRID + gc] += gray;
      counts[gr * PROJ_GRID + gc] += 1;
    }
  }
  for (let i = 0; i < grid.length; i++) {
    if (counts[i] > 0) grid[i] /= counts[i];
  }
  return grid;
}

export class SeededProjectionEncoder implements FrameEncoder {
  readonly id: string;
  readonly dim: number;
  private readonly matrix: Float64Array;

  constructor(dim: number, id?: string) {
    if (!Number.isInteger(dim) || dim < 1) {
      throw new Error(`projection dim must be a positive integer, got ${dim}`);
    }
    this.dim = dim;
    this.id = id ?? `test:proj-${dim}`;
    const inputs = PROJ_GRID * PROJ_GRID + 1; // +1 bias keeps outputs nonzero
    const rand = mulberry32(fnv1a(this.id));
    this.matrix = new Float64Array(dim * inputs);
    for (let i = 0; i < this.matrix.length; i++) {
      this.matrix[i] = 2 * rand() - 1;
    }
  }

  async encode(frame: RawFrame): Promise<number[]> {
    const grid = grayGrid(frame);
    const inputs = grid.length + 1;
    const out = new Array<number>(this.dim);
    for (let d = 0; d < this.dim; d++) {
      let acc = this.matrix[d * inputs + grid.length]; // bias term
      for (let i = 0; i < grid.length; i++) {
        acc += this.matrix[d * inputs + i] * grid[i];
      }
      out[d] = acc;
    }
    return out;
  }
}

class ClipEncoder implements FrameEncoder {
  readonly id: string;
  readonly dim: number;
  private readonly model: any;
  private readonly processor: any;
  private readonly rawImage: any;

  private constructor(id: string, dim: number, model: any, processor: any,
                      rawImage: any) {
    this.id = id;
    this.dim = dim;
    this.model = model;
    this.processor = processor;
    this.rawImage = rawImage;
  }

  static async load(modelId: string): Promise<ClipEncoder> {
    let transformers: any;
    try {
      // optional dependency, resolved at runtime only
      const moduleId = "@huggingface/transformers";
      transformers = await import(moduleId);
    } catch {
      throw new Error(
        `encoder ${modelId} needs the optional @huggingface/transformers ` +
          "package (npm install @huggingface/transformers), or use a " +
          "deterministic test encoder like test:proj-64"
      );
    }
    const model = await transformers.CLIPVisionModelWithProjection.from_pretrained(
      modelId
    );
    const processor = await transformers.AutoProcessor.from_pretrained(modelId);
    const probeDim = model.config?.projection_dim ?? 512;
    return new ClipEncoder(modelId, probeDim, model, processor,
                           transformers.RawImage);
  }

  async encode(frame: RawFrame): Promise<number[]> {
    const image = new this.rawImage(frame.rgb, frame.width, frame.height, 3);
    const inputs = await this.processor(image);
    const { image_embeds } = await this.model(inputs);
    return Array.from(image_embeds.data as Float32Array, Number);
  }
}

/**
 * Resolve a model id to an encoder. "test:proj-<dim>" builds the seeded
 * projection encoder; anything else is treated as a CLIP-family
 * checkpoint for the transformers runtime.
 */
export async function loadEncoder(modelId: string): Promise<FrameEncoder> {
  const match = /^test:proj-(\d+)$/.exec(modelId);
  if (match) {
    return new SeededProjectionEncoder(Number(match[1]), modelId);
  }
  return ClipEncoder.load(modelId);
}
