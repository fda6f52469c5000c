/** Ablation dataset generators for covert-transaction construction styles.
 *
 * Four construction styles are compared, differing in whether they use
 * fresh identities and learned transaction features:
 *   direct           fixed addresses, fixed-range parameters
 *   dynamic-address  fresh address per transaction, fixed-range parameters
 *   impersonate      fixed addresses, corpus-mimicking parameters
 *   full-pipeline    fresh addresses and learned features (the transaction
 *                    pipeline's own synthesized output, passed through)
 * plus a fixed-percentile generator that confines amount and fee to one
 * percentile cell each.
 *
 * Each generator returns a balanced labeled mix (1:1 covert:real, shuffled)
 * ready for the supervised detection runner.  Styles with fixed addresses
 * carry an address column so per-address features can be extracted.
 */

import { Rng } from "./random.ts";
import { CorpusRow, FeatureRow, readFeatureCsv, validateRecord } from "./schema.ts";

export type AblationType = "direct" | "dynamic-address" | "impersonate" | "full-pipeline";

export interface AblationSpec {
  type: AblationType;
  count: number;
  /** Fixed parameter ranges for direct/dynamic-address (satoshi). */
  amountRange?: [number, number];
  feeRange?: [number, number];
  /** How many identities the fixed-address styles reuse. */
  addressPool?: number;
  /** Required for full-pipeline: the pipeline's synthesized feature CSV. */
  pipelineCsv?: string;
}

export const DEFAULT_AMOUNT_RANGE: [number, number] = [400_000, 600_000];
export const DEFAULT_FEE_RANGE: [number, number] = [2_000, 2_500];
export const DEFAULT_ADDRESS_POOL = 3;

/** Linear-interpolation percentile, matching the pipeline's convention. */
export function percentile(values: readonly number[], q: number): number {
  const sorted = [...values].sort((a, b) => a - b);
  const pos = (q / 100) * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo]!;
  return sorted[lo]! + (pos - lo) * (sorted[hi]! - sorted[lo]!);
}

function covertRow(inputsAmount: number, fee: number, rng: Rng): FeatureRow {
  const amount = Math.max(Math.round(inputsAmount), fee + 1);
  const row: FeatureRow = {
    input_cnt: rng.int(1, 5),
    output_cnt: rng.int(1, 5),
    inputs_amount: amount,
    outputs_amount: amount - fee,
    fee,
    label: "covert",
  };
  validateRecord(row);
  return row;
}

function fixedRangeRows(count: number, spec: AblationSpec, rng: Rng): FeatureRow[] {
  const [aLo, aHi] = spec.amountRange ?? DEFAULT_AMOUNT_RANGE;
  const [fLo, fHi] = spec.feeRange ?? DEFAULT_FEE_RANGE;
  const rows: FeatureRow[] = [];
  for (let i = 0; i < count; i++) {
    rows.push(covertRow(rng.uniform(aLo, aHi), rng.int(fLo, fHi), rng));
  }
  return rows;
}

function mimicRows(count: number, corpus: readonly CorpusRow[], rng: Rng): FeatureRow[] {
  // corpus-mimicking features: smoothed resampling of real rows
  const rows: FeatureRow[] = [];
  for (let i = 0; i < count; i++) {
    const base = rng.choice(corpus);
    const jitter = Math.exp(rng.normal(0, 0.05));
    const amount = Math.max(Math.round(base.inputs_amount * jitter), base.fee + 1);
    rows.push({
      input_cnt: base.input_cnt,
      output_cnt: base.output_cnt,
      inputs_amount: amount,
      outputs_amount: amount - base.fee,
      fee: base.fee,
      label: "covert",
    });
  }
  return rows;
}

/** Reused-identity styles spread covert rows over a small address pool,
 * each address carrying a random number of transactions. */
function assignPooledAddresses(rows: FeatureRow[], pool: number, rng: Rng): void {
  const weights = Array.from({ length: pool }, () => rng.uniform(0.5, 1.5));
  for (const row of rows) {
    row.address = `covert-${rng.weighted(weights)}`;
  }
}

function realRows(corpus: readonly CorpusRow[], count: number, rng: Rng, withAddress: boolean): FeatureRow[] {
  const picked: FeatureRow[] = [];
  for (let i = 0; i < count; i++) {
    const base = rng.choice(corpus);
    const row: FeatureRow = {
      input_cnt: base.input_cnt,
      output_cnt: base.output_cnt,
      inputs_amount: base.inputs_amount,
      outputs_amount: base.outputs_amount,
      fee: base.fee,
      label: "real",
    };
    if (withAddress) row.address = `real-${i}`; // ordinary users: fresh addresses
    picked.push(row);
  }
  return picked;
}

export function generateAblation(
  spec: AblationSpec,
  corpus: readonly CorpusRow[],
  seed: number,
): FeatureRow[] {
  const rng = new Rng(seed);
  let covert: FeatureRow[];
  let withAddress = false;
  switch (spec.type) {
    case "direct":
      covert = fixedRangeRows(spec.count, spec, rng);
      assignPooledAddresses(covert, spec.addressPool ?? DEFAULT_ADDRESS_POOL, rng);
      withAddress = true;
      break;
    case "dynamic-address":
      covert = fixedRangeRows(spec.count, spec, rng);
      break;
    case "impersonate":
      covert = mimicRows(spec.count, corpus, rng);
      assignPooledAddresses(covert, spec.addressPool ?? DEFAULT_ADDRESS_POOL, rng);
      withAddress = true;
      break;
    case "full-pipeline": {
      if (!spec.pipelineCsv) {
        throw new Error("full-pipeline requires pipelineCsv");
      }
      covert = readFeatureCsv(spec.pipelineCsv).slice(0, spec.count);
      break;
    }
    default:
      throw new Error(`unknown ablation type ${(spec as AblationSpec).type}`);
  }
  const real = realRows(corpus, covert.length, rng, withAddress);
  return rng.shuffle([...covert, ...real]);
}

/** One fixed-percentile cell: amounts confined to the amount percentile
 * band, fees to the fee percentile band.  Bands are the five ranges
 * 1-20, 20-40, 40-60, 60-80, 80-99. */
export const PERCENTILE_BANDS: ReadonlyArray<[number, number]> = [
  [1, 20],
  [20, 40],
  [40, 60],
  [60, 80],
  [80, 99],
];

export function generateFixedPercentile(
  corpus: readonly CorpusRow[],
  amountBand: number,
  feeBand: number,
  count: number,
  seed: number,
): FeatureRow[] {
  const rng = new Rng(seed);
  const amounts = corpus.map((r) => r.inputs_amount);
  const fees = corpus.map((r) => r.fee);
  const [aql, aqh] = PERCENTILE_BANDS[amountBand]!;
  const [fql, fqh] = PERCENTILE_BANDS[feeBand]!;
  const aLo = percentile(amounts, aql);
  const aHi = percentile(amounts, aqh);
  const fLo = percentile(fees, fql);
  const fHi = percentile(fees, fqh);
  const covert: FeatureRow[] = [];
  for (let i = 0; i < count; i++) {
    const fee = Math.max(1, Math.round(rng.uniform(fLo, fHi)));
    covert.push(covertRow(rng.uniform(aLo, aHi), fee, rng));
  }
  const real = realRows(corpus, count, rng, false);
  return rng.shuffle([...covert, ...real]);
}
