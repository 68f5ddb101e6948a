/**
 * Re-executes a sequential conv backbone layer by layer so that (a) ReLU
 * gradients can be swapped for guided ones and (b) intermediate activations
 * can be tapped or used as differentiation roots.
 *
 * Blocks are delimited by pooling layers: the convs before the first pool
 * form block 1, and "layer i" means the last conv activation of block i.
 */

import * as tf from "@tensorflow/tfjs";

import { guidedRelu } from "./guided_relu";

type Step = {
  layerName: string;
  /** block index this step's output belongs to (1-based) */
  block: number;
  /** true for conv steps, whose outputs are tap candidates */
  isConv: boolean;
  apply: (x: tf.Tensor, guided: boolean) => tf.Tensor;
};

function activation(x: tf.Tensor, name: string, guided: boolean): tf.Tensor {
  if (name === "relu") {
    return guided ? guidedRelu(x) : tf.relu(x);
  }
  if (name === "linear" || name === "softmax") {
    // scores stay pre-softmax: per-class standardization downstream is
    // invariant to monotone maps but raw scores carry more information
    return x;
  }
  throw new Error(`unsupported activation '${name}'`);
}

export function compileBackbone(model: tf.LayersModel): Step[] {
  const steps: Step[] = [];
  let block = 1;
  for (const layer of model.layers) {
    const cls = layer.getClassName();
    const config = layer.getConfig() as Record<string, unknown>;
    if (cls === "InputLayer") {
      continue;
    }
    if (cls === "Conv2D") {
      const [kernel, bias] = layer.getWeights();
      const strides = (config["strides"] as [number, number]) ?? [1, 1];
      const padding = (config["padding"] as string) === "same" ? "same" : "valid";
      const act = (config["activation"] as string) ?? "linear";
      const currentBlock = block;
      steps.push({
        layerName: layer.name,
        block: currentBlock,
        isConv: true,
        apply: (x, guided) =>
          activation(
            tf.add(
              tf.conv2d(x as tf.Tensor4D, kernel as tf.Tensor4D, strides, padding as "same" | "valid"),
              bias
            ),
            act,
            guided
          ),
      });
    } else if (cls === "MaxPooling2D" || cls === "AveragePooling2D") {
      const pool = (config["poolSize"] as [number, number]) ?? [2, 2];
      const strides = (config["strides"] as [number, number]) ?? pool;
      const padding = (config["padding"] as string) === "same" ? "same" : "valid";
      const isMax = cls === "MaxPooling2D";
      const currentBlock = block;
      steps.push({
        layerName: layer.name,
        block: currentBlock,
        isConv: false,
        apply: (x) =>
          isMax
            ? tf.maxPool(x as tf.Tensor4D, pool, strides, padding as "same" | "valid")
            : tf.avgPool(x as tf.Tensor4D, pool, strides, padding as "same" | "valid"),
      });
      block += 1; // a pool closes the current block
    } else if (cls === "Flatten") {
      steps.push({
        layerName: layer.name,
        block,
        isConv: false,
        apply: (x) => tf.reshape(x, [x.shape[0] as number, -1]),
      });
    } else if (cls === "GlobalAveragePooling2D") {
      steps.push({
        layerName: layer.name,
        block,
        isConv: false,
        apply: (x) => tf.mean(x as tf.Tensor4D, [1, 2]),
      });
    } else if (cls === "Dense") {
      const [kernel, bias] = layer.getWeights();
      const act = (config["activation"] as string) ?? "linear";
      steps.push({
        layerName: layer.name,
        block,
        isConv: false,
        apply: (x, guided) =>
          activation(tf.add(tf.matMul(x as tf.Tensor2D, kernel as tf.Tensor2D), bias), act, guided),
      });
    } else if (cls === "Dropout") {
      steps.push({ layerName: layer.name, block, isConv: false, apply: (x) => x });
    } else {
      throw new Error(`unsupported layer type '${cls}' (${layer.name})`);
    }
  }
  return steps;
}

/** Index of the last conv step in the given block, or -1. */
export function lastConvStepOfBlock(steps: Step[], block: number): number {
  let found = -1;
  steps.forEach((s, i) => {
    if (s.isConv && s.block === block) {
      found = i;
    }
  });
  return found;
}

export function runSteps(
  steps: Step[],
  input: tf.Tensor,
  from: number,
  to: number,
  guided: boolean
): tf.Tensor {
  let x = input;
  for (let i = from; i <= to; i++) {
    x = steps[i].apply(x, guided);
  }
  return x;
}
