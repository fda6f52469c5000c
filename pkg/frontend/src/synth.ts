/** Conditional tabular synthesizer trained on the corpus CSV.
 *
 * Learns (input count, output count, input amount) jointly: the corpus is
 * clipped to the 1-99 amount percentiles and cut into three macro buckets
 * at the 20/80 percentiles; each bucket holds a categorical over count
 * pairs and, per pair, a smoothed kernel density over log amounts
 * (Silverman bandwidth), so sampled amounts are never verbatim replays.
 * Fees are assigned from the transaction pipeline's saved fee model file,
 * keeping the two generators drop-in compatible at the feature-CSV
 * boundary.
 */

import { readFileSync } from "node:fs";

import { Rng } from "./random.ts";
import { percentile } from "./ablation.ts";
import { CorpusRow, FeatureRow, validateRecord } from "./schema.ts";

export class TrainingDiverged extends Error {}

interface FeePmf {
  support: number[];
  probabilities: number[];
}

interface FeeModel {
  bounds: Array<[number, number]>;
  pmfs: FeePmf[];
}

type Bound = number | "inf" | "-inf";

function unnum(x: Bound): number {
  if (x === "inf") return Infinity;
  if (x === "-inf") return -Infinity;
  return x;
}

/** Fee models from the pipeline's saved synthesizer document. */
export function loadFeeModels(modelPath: string): Map<string, FeeModel> {
  const doc = JSON.parse(readFileSync(modelPath, "utf8")) as {
    version: number;
    fees: Record<string, { bounds: Array<[Bound, Bound]>; pmfs: FeePmf[] }>;
  };
  if (doc.version !== 1) {
    throw new Error(`unsupported model version ${doc.version}`);
  }
  const out = new Map<string, FeeModel>();
  for (const [key, entry] of Object.entries(doc.fees)) {
    out.set(key, {
      bounds: entry.bounds.map(([lo, hi]) => [unnum(lo), unnum(hi)] as [number, number]),
      pmfs: entry.pmfs,
    });
  }
  return out;
}

function locateBucket(bounds: Array<[number, number]>, amount: number): number {
  for (let k = 0; k < bounds.length; k++) {
    const [lo, hi] = bounds[k]!;
    if (lo < amount && amount <= hi) return k;
  }
  return amount <= bounds[0]![1] ? 0 : bounds.length - 1;
}

interface PairModel {
  weight: number;
  logAmounts: number[];
  bandwidth: number;
  range: [number, number];
}

interface MacroBucket {
  weight: number;
  pairs: Map<string, PairModel>;
}

export class TabularSynthesizer {
  private buckets: MacroBucket[] = [];
  private feeModels: Map<string, FeeModel> | null = null;

  fit(corpus: readonly CorpusRow[], feeModels: Map<string, FeeModel>): this {
    const amounts = corpus.map((r) => r.inputs_amount);
    const lo = percentile(amounts, 1);
    const hi = percentile(amounts, 99);
    const clipped = corpus.filter((r) => r.inputs_amount >= lo && r.inputs_amount <= hi);
    if (clipped.length < 10) {
      throw new TrainingDiverged("too few rows after clipping");
    }
    const clippedAmounts = clipped.map((r) => r.inputs_amount);
    const e1 = percentile(clippedAmounts, 20);
    const e2 = percentile(clippedAmounts, 80);
    const groups: CorpusRow[][] = [[], [], []];
    for (const row of clipped) {
      const idx = row.inputs_amount <= e1 ? 0 : row.inputs_amount <= e2 ? 1 : 2;
      groups[idx]!.push(row);
    }
    if (groups.some((g) => g.length === 0)) {
      throw new TrainingDiverged("empty macro bucket");
    }
    this.buckets = groups.map((group) => {
      const byPair = new Map<string, CorpusRow[]>();
      for (const row of group) {
        const key = `${row.input_cnt},${row.output_cnt}`;
        const bucket = byPair.get(key) ?? [];
        bucket.push(row);
        byPair.set(key, bucket);
      }
      const pairs = new Map<string, PairModel>();
      for (const [key, rows] of byPair) {
        const logs = rows.map((r) => Math.log(r.inputs_amount));
        const mean = logs.reduce((a, b) => a + b, 0) / logs.length;
        const sd = Math.sqrt(
          logs.reduce((a, b) => a + (b - mean) ** 2, 0) / Math.max(1, logs.length - 1),
        );
        // Silverman's rule; floor keeps point-mass cells sampleable
        const bandwidth = Math.max(1e-3, 1.06 * sd * Math.pow(logs.length, -0.2));
        pairs.set(key, {
          weight: rows.length / group.length,
          logAmounts: logs,
          bandwidth,
          range: [
            Math.min(...rows.map((r) => r.inputs_amount)),
            Math.max(...rows.map((r) => r.inputs_amount)),
          ],
        });
      }
      return { weight: group.length / clipped.length, pairs };
    });
    this.feeModels = feeModels;
    return this;
  }

  sample(count: number, seed: number): FeatureRow[] {
    if (this.buckets.length === 0 || this.feeModels === null) {
      throw new TrainingDiverged("synthesizer is not fitted");
    }
    const rng = new Rng(seed);
    const rows: FeatureRow[] = [];
    for (let i = 0; i < count; i++) {
      rows.push(this.sampleOne(rng));
    }
    return rows;
  }

  private sampleOne(rng: Rng): FeatureRow {
    const bucket = this.buckets[rng.weighted(this.buckets.map((b) => b.weight))]!;
    const keys = [...bucket.pairs.keys()];
    const key = keys[rng.weighted(keys.map((k) => bucket.pairs.get(k)!.weight))]!;
    const pair = bucket.pairs.get(key)!;
    const [iStr, jStr] = key.split(",");
    for (let attempt = 0; attempt < 200; attempt++) {
      const amount = this.drawAmount(pair, rng);
      const fee = this.drawFee(key, amount, rng);
      if (fee !== null && fee < amount) {
        const row: FeatureRow = {
          input_cnt: Number(iStr),
          output_cnt: Number(jStr),
          inputs_amount: amount,
          outputs_amount: amount - fee,
          fee,
          label: "covert",
        };
        validateRecord(row);
        return row;
      }
    }
    throw new TrainingDiverged(`cannot place a valid fee for cell ${key}`);
  }

  private drawAmount(pair: PairModel, rng: Rng): number {
    const center = rng.choice(pair.logAmounts);
    const value = Math.exp(rng.normal(center, pair.bandwidth));
    const [lo, hi] = pair.range;
    return Math.round(Math.min(Math.max(value, lo), hi));
  }

  private drawFee(key: string, amount: number, rng: Rng): number | null {
    const model = this.feeModels!.get(key);
    if (!model) return null;
    const pmf = model.pmfs[locateBucket(model.bounds, amount)]!;
    for (let attempt = 0; attempt < 100; attempt++) {
      const fee = pmf.support[rng.weighted(pmf.probabilities)]!;
      if (fee < amount) return fee;
    }
    return null;
  }
}
