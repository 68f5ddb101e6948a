import * as fs from "fs";

import { PNG } from "pngjs";

export interface RgbImage {
  height: number;
  width: number;
  /** row-major RGB, values scaled to [0, 1] */
  data: Float32Array;
}

export function loadPng(path: string): RgbImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const { width, height } = png;
  const data = new Float32Array(height * width * 3);
  for (let i = 0; i < height * width; i++) {
    data[3 * i] = png.data[4 * i] / 255;
    data[3 * i + 1] = png.data[4 * i + 1] / 255;
    data[3 * i + 2] = png.data[4 * i + 2] / 255;
  }
  return { height, width, data };
}
