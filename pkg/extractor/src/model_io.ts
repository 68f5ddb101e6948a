/**
 * Filesystem save/load for layers models in the standard model.json +
 * weights.bin format.  The browser-oriented tfjs build ships no file://
 * handler, so a small one is provided here.
 */

import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(weightData));
      const manifest = {
        modelTopology: artifacts.modelTopology,
        weightsManifest: [
          { paths: ["weights.bin"], weights: artifacts.weightSpecs },
        ],
      };
      fs.writeFileSync(path.join(dir, "model.json"), JSON.stringify(manifest));
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: "JSON" as const,
        },
      };
    })
  );
}

export async function loadModel(modelPath: string): Promise<tf.LayersModel> {
  const jsonPath = modelPath.endsWith(".json")
    ? modelPath
    : path.join(modelPath, "model.json");
  if (!fs.existsSync(jsonPath)) {
    throw new Error(`model load failure: ${jsonPath} does not exist`);
  }
  const manifest = JSON.parse(fs.readFileSync(jsonPath, "utf-8"));
  const weightSpecs: tf.io.WeightsManifestEntry[] = [];
  const buffers: Buffer[] = [];
  for (const group of manifest.weightsManifest ?? []) {
    weightSpecs.push(...group.weights);
    for (const rel of group.paths) {
      buffers.push(fs.readFileSync(path.join(path.dirname(jsonPath), rel)));
    }
  }
  const weightData = Buffer.concat(buffers);
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: manifest.modelTopology,
      weightSpecs,
      weightData: weightData.buffer.slice(
        weightData.byteOffset,
        weightData.byteOffset + weightData.byteLength
      ),
    })
  );
}
