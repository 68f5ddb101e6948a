#!/usr/bin/env node
/**
 * CLI: extract score maps or guided-backprop gradient tensors from a saved
 * layers model for one image.
 *
 *   rgbdsal-extract --image frame.png --mode scores --weights model_dir --out scores/
 *   rgbdsal-extract --image frame.png --mode gbp --weights model_dir --out gbp/frame --topk 3
 */

import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { DEFAULT_LAYERS, DEFAULT_TOP_K, extractGbp, extractScores } from "./extract";
import { loadPng } from "./image";
import { loadModel } from "./model_io";

function readLabels(labelsPath: string | undefined): string[] | undefined {
  if (!labelsPath) {
    return undefined;
  }
  return fs
    .readFileSync(labelsPath, "utf-8")
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
}

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .option("image", { type: "string", demandOption: true, describe: "input RGB PNG" })
    .option("mode", {
      choices: ["scores", "gbp"] as const,
      demandOption: true,
      describe: "scores: per-class score stack; gbp: gradient tensors",
    })
    .option("weights", {
      type: "string",
      demandOption: true,
      describe: "saved model directory (or model.json path)",
    })
    .option("out", { type: "string", demandOption: true, describe: "output directory" })
    .option("topk", { type: "number", default: DEFAULT_TOP_K })
    .option("layers", {
      type: "string",
      default: DEFAULT_LAYERS.join(","),
      describe: "comma-separated backbone block ids to tap",
    })
    .option("labels", { type: "string", describe: "text file with one class name per line" })
    .option("name", { type: "string", describe: "output stem (default: image stem)" })
    .strict()
    .parse();

  await tf.setBackend("cpu");
  await tf.ready();

  let model: tf.LayersModel;
  try {
    model = await loadModel(args.weights);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  const image = loadPng(args.image);
  const name = args.name ?? path.basename(args.image).replace(/\.png$/i, "");
  const labels = readLabels(args.labels);

  try {
    if (args.mode === "scores") {
      const result = await extractScores(model, image, args.out, name, labels);
      console.log(`wrote ${result.tensorPath} (${result.classCount} classes + background)`);
    } else {
      const layers = args.layers.split(",").map((s) => parseInt(s.trim(), 10));
      const result = await extractGbp(model, image, args.out, args.topk, layers, labels);
      console.log(
        `wrote ${result.tensorPaths.length} gradient tensors for classes ` +
          `[${result.classOrder.join(", ")}] -> ${result.manifestPath}`
      );
    }
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

if (require.main === module) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
