/** CART trees: gini-split classification and variance-split regression.
 *
 * Shared axis-aligned binary splitter; candidate thresholds are quantiles
 * of the node's feature values (capped), which bounds split-search cost on
 * heavy-tailed amount features without changing results materially.
 */

import { Rng } from "./random.ts";

export interface TreeOptions {
  maxDepth: number;
  minSamplesLeaf: number;
  /** Features considered per split; 0 means all. */
  maxFeatures: number;
}

export interface TreeNode {
  feature?: number;
  threshold?: number;
  left?: TreeNode;
  right?: TreeNode;
  /** Leaf payload: class-1 probability (classification) or mean (regression). */
  value?: number;
}

const MAX_THRESHOLDS = 32;

function candidateThresholds(values: number[]): number[] {
  const sorted = [...new Set(values)].sort((a, b) => a - b);
  if (sorted.length < 2) return [];
  if (sorted.length <= MAX_THRESHOLDS) {
    const out: number[] = [];
    for (let i = 1; i < sorted.length; i++) {
      out.push((sorted[i - 1]! + sorted[i]!) / 2);
    }
    return out;
  }
  const out: number[] = [];
  for (let k = 1; k <= MAX_THRESHOLDS; k++) {
    const q = (k * (sorted.length - 1)) / (MAX_THRESHOLDS + 1);
    const lo = sorted[Math.floor(q)]!;
    const hi = sorted[Math.ceil(q)]!;
    out.push((lo + hi) / 2);
  }
  return [...new Set(out)];
}

type Impurity = (indices: number[], y: readonly number[]) => number;

const gini: Impurity = (indices, y) => {
  let ones = 0;
  for (const i of indices) ones += y[i]!;
  const p = ones / indices.length;
  return 2 * p * (1 - p);
};

const variance: Impurity = (indices, y) => {
  let sum = 0;
  for (const i of indices) sum += y[i]!;
  const mean = sum / indices.length;
  let acc = 0;
  for (const i of indices) acc += (y[i]! - mean) ** 2;
  return acc / indices.length;
};

function leafValue(indices: number[], y: readonly number[]): number {
  let sum = 0;
  for (const i of indices) sum += y[i]!;
  return sum / indices.length;
}

function build(
  X: readonly number[][],
  y: readonly number[],
  indices: number[],
  depth: number,
  opts: TreeOptions,
  impurity: Impurity,
  rng: Rng | null,
): TreeNode {
  const nodeImpurity = impurity(indices, y);
  if (
    depth >= opts.maxDepth ||
    indices.length < 2 * opts.minSamplesLeaf ||
    nodeImpurity === 0
  ) {
    return { value: leafValue(indices, y) };
  }
  const nFeatures = X[0]!.length;
  let featurePool = [...Array(nFeatures).keys()];
  if (rng && opts.maxFeatures > 0 && opts.maxFeatures < nFeatures) {
    featurePool = rng.shuffle(featurePool).slice(0, opts.maxFeatures);
  }
  let best: { feature: number; threshold: number; score: number } | null = null;
  for (const feature of featurePool) {
    const values = indices.map((i) => X[i]![feature]!);
    for (const threshold of candidateThresholds(values)) {
      const left: number[] = [];
      const right: number[] = [];
      for (const i of indices) {
        (X[i]![feature]! <= threshold ? left : right).push(i);
      }
      if (left.length < opts.minSamplesLeaf || right.length < opts.minSamplesLeaf) {
        continue;
      }
      const score =
        (left.length / indices.length) * impurity(left, y) +
        (right.length / indices.length) * impurity(right, y);
      if (best === null || score < best.score) {
        best = { feature, threshold, score };
      }
    }
  }
  if (best === null || best.score >= nodeImpurity) {
    return { value: leafValue(indices, y) };
  }
  const left: number[] = [];
  const right: number[] = [];
  for (const i of indices) {
    (X[i]![best.feature]! <= best.threshold ? left : right).push(i);
  }
  return {
    feature: best.feature,
    threshold: best.threshold,
    left: build(X, y, left, depth + 1, opts, impurity, rng),
    right: build(X, y, right, depth + 1, opts, impurity, rng),
  };
}

export function buildClassificationTree(
  X: readonly number[][],
  y: readonly number[],
  indices: number[],
  opts: TreeOptions,
  rng: Rng | null = null,
): TreeNode {
  return build(X, y, indices, 0, opts, gini, rng);
}

export function buildRegressionTree(
  X: readonly number[][],
  y: readonly number[],
  indices: number[],
  opts: TreeOptions,
): TreeNode {
  return build(X, y, indices, 0, opts, variance, null);
}

/** Leaf payload for one sample. */
export function predictTree(node: TreeNode, x: readonly number[]): number {
  let cur = node;
  while (cur.value === undefined) {
    cur = x[cur.feature!]! <= cur.threshold! ? cur.left! : cur.right!;
  }
  return cur.value;
}
