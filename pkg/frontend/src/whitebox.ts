/** Supervised detection runs over labeled feature CSVs.
 *
 * Stratified 70/30 split, ensemble classifier, report with metrics and the
 * exact configuration needed to reproduce the run.  When rows carry an
 * address column, per-address aggregate features (transaction count, mean
 * spend, frequency over the address's height range) are appended, modeling
 * an attacker who can group transactions by identity.
 */

import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";

import { Classifier, makeClassifier, predictLabels } from "./classifiers.ts";
import { Rng } from "./random.ts";
import { binaryScores, stratifiedSplit } from "./metrics.ts";
import { FeatureRow, featureVector, readFeatureCsv } from "./schema.ts";

export interface DetectionReport {
  classifier: string;
  hyperparameters: Record<string, number>;
  precision: number;
  recall: number;
  f1: number;
  seed: number;
  n_train: number;
  n_test: number;
  address_features: boolean;
  dataset_sha256: string;
  label_shuffled: boolean;
}

const TEST_FRACTION = 0.3;

interface AddressStats {
  count: number;
  meanSpend: number;
  frequency: number;
}

/** Per-address aggregates; synthetic height positions stand in for rows
 * without block metadata (the feature CSV carries none). */
function addressStats(rows: readonly FeatureRow[]): Map<string, AddressStats> {
  const groups = new Map<string, { spends: number[]; positions: number[] }>();
  rows.forEach((row, position) => {
    const key = row.address ?? `__row_${position}`;
    const g = groups.get(key) ?? { spends: [], positions: [] };
    g.spends.push(row.inputs_amount);
    g.positions.push(position);
    groups.set(key, g);
  });
  const out = new Map<string, AddressStats>();
  for (const [key, g] of groups) {
    const span = Math.max(...g.positions) - Math.min(...g.positions) + 1;
    out.set(key, {
      count: g.spends.length,
      meanSpend: g.spends.reduce((a, b) => a + b, 0) / g.spends.length,
      frequency: g.spends.length / span,
    });
  }
  return out;
}

export function buildMatrix(rows: readonly FeatureRow[]): {
  X: number[][];
  y: number[];
  addressFeatures: boolean;
} {
  const withAddress = rows.some((r) => r.address !== undefined);
  const stats = withAddress ? addressStats(rows) : null;
  const X = rows.map((row, position) => {
    const features = featureVector(row);
    if (stats) {
      const s = stats.get(row.address ?? `__row_${position}`)!;
      features.push(s.count, s.meanSpend, s.frequency);
    }
    return features;
  });
  const y = rows.map((row) => (row.label === "covert" ? 1 : 0));
  return { X, y, addressFeatures: withAddress };
}

export interface WhiteboxOptions {
  classifier: string;
  seed: number;
  /** Permutation-null mode: labels are shuffled before the split. */
  shuffleLabels?: boolean;
}

export function runWhiteboxRows(
  rows: FeatureRow[],
  options: WhiteboxOptions,
  datasetSha256 = "",
): DetectionReport {
  const { X, y, addressFeatures } = buildMatrix(rows);
  if (new Set(y).size < 2) {
    throw new Error("need both real and covert rows");
  }
  const labels = options.shuffleLabels ? new Rng(options.seed ^ 0x5f5f).shuffle([...y]) : y;
  const split = stratifiedSplit(labels, TEST_FRACTION, options.seed);
  const clf: Classifier = makeClassifier(options.classifier, options.seed);
  clf.fit(
    split.trainIdx.map((i) => X[i]!),
    split.trainIdx.map((i) => labels[i]!),
  );
  const pred = predictLabels(clf, split.testIdx.map((i) => X[i]!));
  const truth = split.testIdx.map((i) => labels[i]!);
  const scores = binaryScores(truth, pred);
  return {
    classifier: clf.name,
    hyperparameters: clf.hyperparameters,
    precision: scores.precision,
    recall: scores.recall,
    f1: scores.f1,
    seed: options.seed,
    n_train: split.trainIdx.length,
    n_test: split.testIdx.length,
    address_features: addressFeatures,
    dataset_sha256: datasetSha256,
    label_shuffled: options.shuffleLabels ?? false,
  };
}

export function runWhitebox(csvPath: string, options: WhiteboxOptions): DetectionReport {
  const sha = createHash("sha256").update(readFileSync(csvPath)).digest("hex");
  return runWhiteboxRows(readFeatureCsv(csvPath), options, sha);
}
