/** Ensemble classifiers: bootstrap random forest and logistic-loss GBDT. */

import { Rng } from "./random.ts";
import {
  TreeNode,
  TreeOptions,
  buildClassificationTree,
  buildRegressionTree,
  predictTree,
} from "./tree.ts";

export interface Classifier {
  name: string;
  hyperparameters: Record<string, number>;
  fit(X: number[][], y: number[]): void;
  /** Class-1 probability per row. */
  predictProba(X: readonly number[][]): number[];
}

export function predictLabels(clf: Classifier, X: readonly number[][]): number[] {
  return clf.predictProba(X).map((p) => (p >= 0.5 ? 1 : 0));
}

export interface ForestParams {
  nTrees: number;
  maxDepth: number;
  minSamplesLeaf: number;
  seed: number;
}

export const FOREST_DEFAULTS: ForestParams = {
  nTrees: 100,
  maxDepth: 12,
  minSamplesLeaf: 2,
  seed: 0,
};

export class RandomForest implements Classifier {
  readonly name = "random-forest";
  readonly hyperparameters: Record<string, number>;
  private readonly params: ForestParams;
  private trees: TreeNode[] = [];

  constructor(params: Partial<ForestParams> = {}) {
    this.params = { ...FOREST_DEFAULTS, ...params };
    this.hyperparameters = { ...this.params };
  }

  fit(X: number[][], y: number[]): void {
    const rng = new Rng(this.params.seed);
    const nFeatures = X[0]!.length;
    const opts: TreeOptions = {
      maxDepth: this.params.maxDepth,
      minSamplesLeaf: this.params.minSamplesLeaf,
      maxFeatures: Math.max(1, Math.round(Math.sqrt(nFeatures))),
    };
    this.trees = [];
    for (let t = 0; t < this.params.nTrees; t++) {
      const sample = Array.from({ length: X.length }, () => rng.int(0, X.length - 1));
      this.trees.push(buildClassificationTree(X, y, sample, opts, rng));
    }
  }

  predictProba(X: readonly number[][]): number[] {
    return X.map((x) => {
      let acc = 0;
      for (const tree of this.trees) acc += predictTree(tree, x);
      return acc / this.trees.length;
    });
  }
}

export interface GbdtParams {
  nRounds: number;
  learningRate: number;
  maxDepth: number;
  minSamplesLeaf: number;
  seed: number;
}

export const GBDT_DEFAULTS: GbdtParams = {
  nRounds: 100,
  learningRate: 0.1,
  maxDepth: 3,
  minSamplesLeaf: 5,
  seed: 0,
};

/** Gradient boosting on the logistic loss with residual-fitting trees. */
export class Gbdt implements Classifier {
  readonly name = "gbdt";
  readonly hyperparameters: Record<string, number>;
  private readonly params: GbdtParams;
  private trees: TreeNode[] = [];
  private baseScore = 0;

  constructor(params: Partial<GbdtParams> = {}) {
    this.params = { ...GBDT_DEFAULTS, ...params };
    this.hyperparameters = { ...this.params };
  }

  fit(X: number[][], y: number[]): void {
    const n = X.length;
    const mean = y.reduce((a, b) => a + b, 0) / n;
    const eps = 1e-9;
    this.baseScore = Math.log((mean + eps) / (1 - mean + eps));
    const scores = new Array<number>(n).fill(this.baseScore);
    const opts: TreeOptions = {
      maxDepth: this.params.maxDepth,
      minSamplesLeaf: this.params.minSamplesLeaf,
      maxFeatures: 0,
    };
    const all = [...Array(n).keys()];
    this.trees = [];
    for (let round = 0; round < this.params.nRounds; round++) {
      const residuals = scores.map((s, i) => y[i]! - 1 / (1 + Math.exp(-s)));
      const tree = buildRegressionTree(X, residuals, all, opts);
      this.trees.push(tree);
      for (let i = 0; i < n; i++) {
        scores[i]! += this.params.learningRate * predictTree(tree, X[i]!);
      }
    }
  }

  predictProba(X: readonly number[][]): number[] {
    return X.map((x) => {
      let score = this.baseScore;
      for (const tree of this.trees) {
        score += this.params.learningRate * predictTree(tree, x);
      }
      return 1 / (1 + Math.exp(-score));
    });
  }
}

export function makeClassifier(kind: string, seed: number): Classifier {
  switch (kind) {
    case "random-forest":
      return new RandomForest({ seed });
    case "gbdt":
      return new Gbdt({ seed });
    default:
      throw new Error(`unknown classifier ${kind} (expected random-forest|gbdt)`);
  }
}
