/**
 * Binary tensor file transport shared with the saliency pipeline.
 *
 * Layout (little endian): magic "SMT1", u32 version (=1), u32 ndim,
 * ndim x u32 dims, then a float32 row-major payload.
 */

import * as fs from "fs";

export const MAGIC = "SMT1";
export const VERSION = 1;
export const MAX_NDIM = 8;
export const MAX_ELEMENTS = 2 ** 31;

export interface TensorData {
  dims: number[];
  data: Float32Array;
}

export function writeTensor(path: string, dims: number[], data: Float32Array): void {
  if (dims.length < 1 || dims.length > MAX_NDIM) {
    throw new Error(`tensor ndim ${dims.length} outside supported range 1..${MAX_NDIM}`);
  }
  if (dims.some((d) => d < 1 || !Number.isInteger(d))) {
    throw new Error(`invalid dims ${JSON.stringify(dims)}`);
  }
  const count = dims.reduce((a, b) => a * b, 1);
  if (count > MAX_ELEMENTS) {
    throw new Error(`${count} elements exceeds limit ${MAX_ELEMENTS}`);
  }
  if (count !== data.length) {
    throw new Error(`dims ${JSON.stringify(dims)} demand ${count} floats, got ${data.length}`);
  }
  const header = Buffer.alloc(12 + 4 * dims.length);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt32LE(VERSION, 4);
  header.writeUInt32LE(dims.length, 8);
  dims.forEach((d, i) => header.writeUInt32LE(d, 12 + 4 * i));
  const payload = Buffer.alloc(4 * count);
  for (let i = 0; i < count; i++) {
    payload.writeFloatLE(data[i], 4 * i);
  }
  fs.writeFileSync(path, Buffer.concat([header, payload]));
}

/**
 * Read a tensor file back, enforcing the same validation rules the consumer
 * applies: magic, version, dim bounds and an exact payload length.
 */
export function readTensor(path: string): TensorData {
  const raw = fs.readFileSync(path);
  if (raw.length < 12) {
    throw new Error(`${path}: file shorter than fixed header`);
  }
  if (raw.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${path}: bad magic ${JSON.stringify(raw.toString("ascii", 0, 4))}`);
  }
  const version = raw.readUInt32LE(4);
  if (version !== VERSION) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const ndim = raw.readUInt32LE(8);
  if (ndim < 1 || ndim > MAX_NDIM) {
    throw new Error(`${path}: ndim ${ndim} outside supported range 1..${MAX_NDIM}`);
  }
  if (raw.length < 12 + 4 * ndim) {
    throw new Error(`${path}: header truncated before dims`);
  }
  const dims: number[] = [];
  let count = 1;
  for (let i = 0; i < ndim; i++) {
    const d = raw.readUInt32LE(12 + 4 * i);
    if (d < 1) {
      throw new Error(`${path}: zero-sized dimension`);
    }
    dims.push(d);
    count *= d;
    if (count > MAX_ELEMENTS) {
      throw new Error(`${path}: element count exceeds limit ${MAX_ELEMENTS}`);
    }
  }
  const offset = 12 + 4 * ndim;
  const expected = 4 * count;
  const actual = raw.length - offset;
  if (actual < expected) {
    throw new Error(`${path}: payload has ${actual} bytes, ${expected} required`);
  }
  if (actual > expected) {
    throw new Error(`${path}: ${actual - expected} trailing bytes after payload`);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = raw.readFloatLE(offset + 4 * i);
  }
  return { dims, data };
}
