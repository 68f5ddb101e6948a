/**
 * Extraction jobs: turn a pre-trained network plus one image into the tensor
 * files and manifests the saliency pipeline consumes.
 *
 * Scores mode runs a segmentation-with-background model forward and exports
 * the pre-softmax score stack at frame resolution (background slice last).
 * GBP mode runs a classification backbone, picks the top-k classes, and for
 * each of the tapped blocks exports the absolute guided-backprop gradients
 * of the class score with respect to that block's last conv activation.
 */

import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";

import { compileBackbone, lastConvStepOfBlock, runSteps } from "./backbone";
import { RgbImage } from "./image";
import { writeTensor } from "./tensor_file";

export const DEFAULT_TOP_K = 3;
export const DEFAULT_LAYERS = [3, 4, 5];

export interface ScoreResult {
  tensorPath: string;
  manifestPath: string;
  classCount: number;
}

export interface GbpResult {
  manifestPath: string;
  tensorPaths: string[];
  classOrder: string[];
}

function imageTensor(image: RgbImage): tf.Tensor4D {
  return tf.tensor4d(image.data, [1, image.height, image.width, 3]);
}

/** channels-last [1, h, w, c] -> row-major Float32Array in [c, h, w] order */
async function toChw(t: tf.Tensor4D): Promise<{ data: Float32Array; dims: number[] }> {
  const [, h, w, c] = t.shape;
  const chw = tf.transpose(tf.squeeze(t, [0]), [2, 0, 1]);
  const data = (await chw.data()) as Float32Array;
  return { data: Float32Array.from(data), dims: [c, h, w] };
}

export async function extractScores(
  model: tf.LayersModel,
  image: RgbImage,
  outDir: string,
  name: string,
  classNames?: string[]
): Promise<ScoreResult> {
  fs.mkdirSync(outDir, { recursive: true });
  const steps = compileBackbone(model);
  const { data, dims, originalExtents } = tf.tidy(() => {
    const out = runSteps(steps, imageTensor(image), 0, steps.length - 1, false);
    if (out.rank !== 4) {
      throw new Error(`scores model must end in a spatial map, got rank ${out.rank}`);
    }
    const spatial = out as tf.Tensor4D;
    const [, h, w] = spatial.shape;
    const resized =
      h === image.height && w === image.width
        ? spatial
        : tf.image.resizeBilinear(spatial, [image.height, image.width], true);
    const chw = tf.transpose(tf.squeeze(resized, [0]), [2, 0, 1]);
    return {
      data: chw.dataSync() as Float32Array,
      dims: chw.shape as number[],
      originalExtents: [h, w],
    };
  });

  const tensorName = `${name}.smt`;
  const tensorPath = path.join(outDir, tensorName);
  writeTensor(tensorPath, dims, Float32Array.from(data));

  const channels = dims[0];
  const classCount = channels - 1; // background rides last
  const names =
    classNames ?? Array.from({ length: classCount }, (_, i) => `class_${i}`);
  if (names.length !== classCount) {
    throw new Error(`${names.length} labels for ${classCount} classes`);
  }
  const lines = [`tensor ${tensorName}`];
  names.forEach((n, i) => lines.push(`class ${i} ${n}`));
  lines.push(`background ${classCount}`);
  lines.push(`# network output extents ${originalExtents[0]} ${originalExtents[1]}`);
  const manifestPath = path.join(outDir, `${name}.manifest`);
  fs.writeFileSync(manifestPath, lines.join("\n") + "\n");
  return { tensorPath, manifestPath, classCount };
}

export async function extractGbp(
  model: tf.LayersModel,
  image: RgbImage,
  outDir: string,
  topK: number = DEFAULT_TOP_K,
  layers: number[] = DEFAULT_LAYERS,
  classNames?: string[]
): Promise<GbpResult> {
  if (topK < 1) {
    throw new Error(`top-k must be >= 1, got ${topK}`);
  }
  fs.mkdirSync(outDir, { recursive: true });
  const steps = compileBackbone(model);
  const taps = layers.map((block) => {
    const idx = lastConvStepOfBlock(steps, block);
    if (idx < 0) {
      throw new Error(`backbone has no conv layer in block ${block}`);
    }
    return idx;
  });

  const input = imageTensor(image);
  const logits = tf.tidy(() => {
    const out = runSteps(steps, input, 0, steps.length - 1, false);
    if (out.rank !== 2) {
      throw new Error(`classification model must end in class scores, got rank ${out.rank}`);
    }
    return out as tf.Tensor2D;
  });
  const { indices } = tf.topk(logits, topK);
  const classIndices = Array.from((await indices.data()) as Int32Array);
  const classOrder = classIndices.map((i) => classNames?.[i] ?? `class_${i}`);

  const tensorPaths: string[] = [];
  const manifestLines = [
    `frame ${image.height} ${image.width}`,
    `layers ${layers.join(" ")}`,
  ];
  classOrder.forEach((label, rank) => manifestLines.push(`class ${rank} ${label}`));

  for (let li = 0; li < layers.length; li++) {
    const tap = taps[li];
    const activationAtTap = tf.tidy(
      () => runSteps(steps, input, 0, tap, false) as tf.Tensor4D
    );
    for (let rank = 0; rank < classIndices.length; rank++) {
      const classIndex = classIndices[rank];
      const gradients = tf.tidy(() => {
        const head = (a: tf.Tensor) => {
          const out = runSteps(steps, a, tap + 1, steps.length - 1, true) as tf.Tensor2D;
          return tf.reshape(tf.slice(out, [0, classIndex], [1, 1]), []) as tf.Scalar;
        };
        return tf.abs(tf.grad(head)(activationAtTap)) as tf.Tensor4D;
      });
      const [, h, w, k] = gradients.shape;
      const chw = tf.tidy(
        () => tf.transpose(tf.squeeze(gradients, [0]), [2, 0, 1]).dataSync() as Float32Array
      );
      gradients.dispose();
      const fname = `gbp_l${layers[li]}_c${rank}.smt`;
      const tensorPath = path.join(outDir, fname);
      writeTensor(tensorPath, [k, h, w], Float32Array.from(chw));
      tensorPaths.push(tensorPath);
      manifestLines.push(`tensor ${layers[li]} ${rank} ${fname}`);
    }
    activationAtTap.dispose();
  }
  input.dispose();
  logits.dispose();

  const manifestPath = path.join(outDir, "gradients.manifest");
  fs.writeFileSync(manifestPath, manifestLines.join("\n") + "\n");
  return { manifestPath, tensorPaths, classOrder };
}
