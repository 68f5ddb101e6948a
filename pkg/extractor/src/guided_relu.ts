/**
 * Guided ReLU: forward is an ordinary ReLU, backward propagates a gradient
 * only where both the forward input and the incoming gradient are positive.
 * Blocking negative upstream signal is what sharpens class-gradient maps
 * compared to plain backprop.
 */

import * as tf from "@tensorflow/tfjs";

export const guidedRelu = tf.customGrad((x, save) => {
  const input = x as tf.Tensor;
  (save as tf.GradSaveFunc)([input]);
  const value = tf.relu(input);
  const gradFunc = (dy: tf.Tensor, saved: tf.Tensor[]) => {
    const [forwardInput] = saved;
    const mask = tf.mul(tf.step(forwardInput, 0), tf.step(dy, 0));
    return [tf.mul(dy, mask)];
  };
  return { value, gradFunc };
}) as (x: tf.Tensor) => tf.Tensor;
