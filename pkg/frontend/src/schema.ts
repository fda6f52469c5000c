/** Shared CSV interchange formats and their validation.
 *
 * The harness exchanges data with the transaction pipeline exclusively
 * through these files:
 *   corpus CSV:  txid,block_height,timestamp,is_coinbase,input_cnt,
 *                output_cnt,inputs_amount,outputs_amount,fee
 *   feature CSV: input_cnt,output_cnt,inputs_amount,outputs_amount,fee,label
 *                (optional extra column: address, for per-address analyses)
 */

import { readFileSync, writeFileSync } from "node:fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

export interface FeatureRow {
  input_cnt: number;
  output_cnt: number;
  inputs_amount: number;
  outputs_amount: number;
  fee: number;
  label: "real" | "covert";
  /** Present only for datasets that carry communication identities. */
  address?: string;
}

export interface CorpusRow {
  block_height: number;
  input_cnt: number;
  output_cnt: number;
  inputs_amount: number;
  outputs_amount: number;
  fee: number;
}

const FEATURE_COLUMNS = [
  "input_cnt",
  "output_cnt",
  "inputs_amount",
  "outputs_amount",
  "fee",
  "label",
] as const;

const CORPUS_COLUMNS = [
  "txid",
  "block_height",
  "timestamp",
  "is_coinbase",
  "input_cnt",
  "output_cnt",
  "inputs_amount",
  "outputs_amount",
  "fee",
] as const;

function parseCsv(path: string, required: readonly string[]): Record<string, string>[] {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0]!.message}`);
  }
  const have = new Set(parsed.meta.fields ?? []);
  const missing = required.filter((c) => !have.has(c));
  if (missing.length > 0) {
    throw new SchemaError(`${path}: missing columns ${missing.join(", ")}`);
  }
  return parsed.data;
}

function toInt(raw: string | undefined, column: string): number {
  const value = Number(raw);
  if (!Number.isFinite(value) || !Number.isInteger(value)) {
    throw new SchemaError(`column ${column}: not an integer: ${raw}`);
  }
  return value;
}

/** One record's internal consistency: positive fee, amount identity. */
export function validateRecord(row: {
  input_cnt: number;
  output_cnt: number;
  inputs_amount: number;
  outputs_amount: number;
  fee: number;
}): void {
  if (row.input_cnt < 1 || row.output_cnt < 1) {
    throw new SchemaError("counts must be positive");
  }
  if (row.fee <= 0) {
    throw new SchemaError("fee must be positive");
  }
  if (row.outputs_amount !== row.inputs_amount - row.fee) {
    throw new SchemaError(
      `outputs_amount ${row.outputs_amount} != inputs_amount ${row.inputs_amount} - fee ${row.fee}`,
    );
  }
}

export function readFeatureCsv(path: string): FeatureRow[] {
  return parseCsv(path, FEATURE_COLUMNS).map((raw) => {
    const label = raw["label"];
    if (label !== "real" && label !== "covert") {
      throw new SchemaError(`label must be real|covert, got ${label}`);
    }
    const row: FeatureRow = {
      input_cnt: toInt(raw["input_cnt"], "input_cnt"),
      output_cnt: toInt(raw["output_cnt"], "output_cnt"),
      inputs_amount: toInt(raw["inputs_amount"], "inputs_amount"),
      outputs_amount: toInt(raw["outputs_amount"], "outputs_amount"),
      fee: toInt(raw["fee"], "fee"),
      label,
    };
    if (raw["address"] !== undefined && raw["address"] !== "") {
      row.address = raw["address"];
    }
    validateRecord(row);
    return row;
  });
}

export function writeFeatureCsv(path: string, rows: FeatureRow[]): void {
  const withAddress = rows.some((r) => r.address !== undefined);
  const columns: string[] = [...FEATURE_COLUMNS];
  if (withAddress) columns.push("address");
  const csv = Papa.unparse(
    rows.map((r) => ({ ...r, address: r.address ?? "" })),
    { columns, newline: "\n" },
  );
  writeFileSync(path, csv + "\n");
}

export function readCorpusCsv(path: string): CorpusRow[] {
  const rows: CorpusRow[] = [];
  for (const raw of parseCsv(path, CORPUS_COLUMNS)) {
    if (toInt(raw["is_coinbase"], "is_coinbase") !== 0) continue;
    const row: CorpusRow = {
      block_height: toInt(raw["block_height"], "block_height"),
      input_cnt: toInt(raw["input_cnt"], "input_cnt"),
      output_cnt: toInt(raw["output_cnt"], "output_cnt"),
      inputs_amount: toInt(raw["inputs_amount"], "inputs_amount"),
      outputs_amount: toInt(raw["outputs_amount"], "outputs_amount"),
      fee: toInt(raw["fee"], "fee"),
    };
    validateRecord(row);
    rows.push(row);
  }
  if (rows.length === 0) throw new SchemaError(`${path}: no usable rows`);
  return rows;
}

/** Shared feature-vector order for classifiers. */
export function featureVector(row: {
  input_cnt: number;
  output_cnt: number;
  inputs_amount: number;
  outputs_amount: number;
  fee: number;
}): number[] {
  return [row.input_cnt, row.output_cnt, row.fee, row.inputs_amount, row.outputs_amount];
}
