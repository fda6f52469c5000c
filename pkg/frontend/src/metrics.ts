/** Binary classification metrics and the stratified train/test split. */

import { Rng } from "./random.ts";

export interface Scores {
  precision: number;
  recall: number;
  f1: number;
}

/** Precision/recall/F1 with label 1 as the positive class. */
export function binaryScores(truth: readonly number[], pred: readonly number[]): Scores {
  if (truth.length !== pred.length) {
    throw new Error(`length mismatch: ${truth.length} vs ${pred.length}`);
  }
  let tp = 0;
  let fp = 0;
  let fn = 0;
  for (let i = 0; i < truth.length; i++) {
    if (pred[i] === 1 && truth[i] === 1) tp++;
    else if (pred[i] === 1) fp++;
    else if (truth[i] === 1) fn++;
  }
  const precision = tp + fp === 0 ? 0 : tp / (tp + fp);
  const recall = tp + fn === 0 ? 0 : tp / (tp + fn);
  const f1 = precision + recall === 0 ? 0 : (2 * precision * recall) / (precision + recall);
  return { precision, recall, f1 };
}

export interface Split {
  trainIdx: number[];
  testIdx: number[];
}

/** Stratified split: each class contributes the same test fraction. */
export function stratifiedSplit(
  labels: readonly number[],
  testFraction: number,
  seed: number,
): Split {
  const rng = new Rng(seed);
  const byClass = new Map<number, number[]>();
  labels.forEach((label, i) => {
    const bucket = byClass.get(label) ?? [];
    bucket.push(i);
    byClass.set(label, bucket);
  });
  const trainIdx: number[] = [];
  const testIdx: number[] = [];
  for (const indices of byClass.values()) {
    rng.shuffle(indices);
    const nTest = Math.round(indices.length * testFraction);
    testIdx.push(...indices.slice(0, nTest));
    trainIdx.push(...indices.slice(nTest));
  }
  rng.shuffle(trainIdx);
  rng.shuffle(testIdx);
  return { trainIdx, testIdx };
}
