/**
 * Minimal YUV4MPEG2 (.y4m) reader and writer.
 *
 * Y4M is the uncompressed interchange container: a plain-text stream
 * header (width, height, frame rate, colorspace) followed by raw planar
 * YUV frames, each introduced by a FRAME line. Supported colorspaces:
 * C420 family (C420, C420jpeg, C420mpeg2, C420paldv) and C444. Chroma
 * siting differences between the 420 variants are ignored; frames are
 * upsampled with nearest-neighbor chroma, which is exact for the flat
 * color fields used in tests.
 */

export interface Y4mVideo {
  width: number;
  height: number;
  fpsNum: number;
  fpsDen: number;
  /** One RGB24 buffer (3 * width * height) per frame. */
  frames: Uint8Array[];
}

const MAGIC = "YUV4MPEG2";

function clamp8(v: number): number {
  return v < 0 ? 0 : v > 255 ? 255 : Math.round(v);
}

/** BT.601 full-range conversions, the y4m convention for test material. */
export function rgbToYuv(r: number, g: number, b: number): [number, number, number] {
  const y = 0.299 * r + 0.587 * g + 0.114 * b;
  const u = -0.168736 * r - 0.331264 * g + 0.5 * b + 128;
  const v = 0.5 * r - 0.418688 * g - 0.081312 * b + 128;
  return [clamp8(y), clamp8(u), clamp8(v)];
}

export function yuvToRgb(y: number, u: number, v: number): [number, number, number] {
  const r = y + 1.402 * (v - 128);
  const g = y - 0.344136 * (u - 128) - 0.714136 * (v - 128);
  const b = y + 1.772 * (u - 128);
  return [clamp8(r), clamp8(g), clamp8(b)];
}

export function parseY4m(data: Uint8Array): Y4mVideo {
  let pos = data.indexOf(0x0a); // first newline ends the stream header
  if (pos < 0) {
    throw new Error("not a y4m stream: missing header line");
  }
  const header = Buffer.from(data.subarray(0, pos)).toString("ascii");
  const fields = header.split(" ");
  if (fields[0] !== MAGIC) {
    throw new Error(`not a y4m stream: bad magic ${JSON.stringify(fields[0])}`);
  }
  let width = 0;
  let height = 0;
  let fpsNum = 0;
  let fpsDen = 1;
  let colorspace = "C420";
  for (const field of fields.slice(1)) {
    const tag = field[0];
    const value = field.slice(1);
    if (tag === "W") width = Number(value);
    else if (tag === "H") height = Number(value);
    else if (tag === "F") {
      const [n, d] = value.split(":").map(Number);
      fpsNum = n;
      fpsDen = d;
    } else if (tag === "C") colorspace = field;
  }
  if (!(width > 0) || !(height > 0) || !(fpsNum > 0) || !(fpsDen > 0)) {
    throw new Error(`y4m header missing geometry or rate: ${header}`);
  }
  const is420 = colorspace.startsWith("C420");
  const is444 = colorspace.startsWith("C444");
  if (!is420 && !is444) {
    throw new Error(`unsupported y4m colorspace ${colorspace}`);
  }
  if (is420 && (width % 2 !== 0 || height % 2 !== 0)) {
    throw new Error("C420 requires even dimensions");
  }
  const ySize = width * height;
  const cSize = is420 ? (width / 2) * (height / 2) : ySize;
  const frameBytes = ySize + 2 * cSize;

  const frames: Uint8Array[] = [];
  pos += 1;
  while (pos < data.length) {
    const lineEnd = data.indexOf(0x0a, pos);
    if (lineEnd < 0) {
      throw new Error(`truncated FRAME header at byte ${pos}`);
    }
    const frameLine = Buffer.from(data.subarray(pos, lineEnd)).toString("ascii");
    if (!frameLine.startsWith("FRAME")) {
      throw new Error(`expected FRAME marker at byte ${pos}, got ${frameLine}`);
    }
    pos = lineEnd + 1;
    if (pos + frameBytes > data.length) {
      throw new Error(`truncated frame payload at byte ${pos}`);
    }
    const yPlane = data.subarray(pos, pos + ySize);
    const uPlane = data.subarray(pos + ySize, pos + ySize + cSize);
    const vPlane = data.subarray(pos + ySize + cSize, pos + frameBytes);
    pos += frameBytes;

    const rgb = new Uint8Array(3 * ySize);
    for (let row = 0; row < height; row++) {
      for (let col = 0; col < width; col++) {
        const yi = row * width + col;
        const ci = is420
          ? (row >> 1) * (width / 2) + (col >> 1)
          : yi;
        const [r, g, b] = yuvToRgb(yPlane[yi], uPlane[ci], vPlane[ci]);
        rgb[3 * yi] = r;
        rgb[3 * yi + 1] = g;
        rgb[3 * yi + 2] = b;
      }
    }
    frames.push(rgb);
  }
  return { width, height, fpsNum, fpsDen, frames };
}

/** Serialize RGB frames as C444 y4m (lossless through this module). */
export function writeY4m(video: Y4mVideo): Uint8Array {
  const { width, height, fpsNum, fpsDen, frames } = video;
  const header = `${MAGIC} W${width} H${height} F${fpsNum}:${fpsDen} Ip A1:1 C444\n`;
  const ySize = width * height;
  const chunks: Uint8Array[] = [Buffer.from(header, "ascii")];
  for (const rgb of frames) {
    if (rgb.length !== 3 * ySize) {
      throw new Error(`frame has ${rgb.length} bytes, expected ${3 * ySize}`);
    }
    chunks.push(Buffer.from("FRAME\n", "ascii"));
    const planes = new Uint8Array(3 * ySize);
    for (let i = 0; i < ySize; i++) {
      const [y, u, v] = rgbToYuv(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
      planes[i] = y;
      planes[ySize + i] = u;
      planes[2 * ySize + i] = v;
    }
    chunks.push(planes);
  }
  return Buffer.concat(chunks);
}
