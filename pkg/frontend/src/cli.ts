/** Command-line entry points for the detection harness.
 *
 *   whitebox  --mixed m.csv --classifier random-forest [--seed 0] [--shuffle-labels] [--out report.json]
 *   ablation  --type direct --corpus c.csv --count 1000 [--pipeline fake.csv] [--seed 0] --out mixed.csv
 *   percentile-cell --corpus c.csv --amount-band 0 --fee-band 0 --count 1000 [--seed 0] --out mixed.csv
 *   synth     --corpus c.csv --model model.json --count 1000 [--seed 0] --out fake.csv
 */

import { parseArgs } from "node:util";
import { writeFileSync } from "node:fs";

import { AblationType, generateAblation, generateFixedPercentile } from "./ablation.ts";
import { readCorpusCsv, writeFeatureCsv } from "./schema.ts";
import { TabularSynthesizer, loadFeeModels } from "./synth.ts";
import { runWhitebox } from "./whitebox.ts";

function main(argv: string[]): number {
  const command = argv[0];
  const rest = argv.slice(1);
  switch (command) {
    case "whitebox": {
      const { values } = parseArgs({
        args: rest,
        options: {
          mixed: { type: "string" },
          classifier: { type: "string", default: "random-forest" },
          seed: { type: "string", default: "0" },
          "shuffle-labels": { type: "boolean", default: false },
          out: { type: "string" },
        },
      });
      if (!values.mixed) throw new Error("--mixed is required");
      const report = runWhitebox(values.mixed, {
        classifier: values.classifier!,
        seed: Number(values.seed),
        shuffleLabels: values["shuffle-labels"],
      });
      const doc = JSON.stringify(report, null, 2);
      if (values.out) writeFileSync(values.out, doc + "\n");
      console.log(doc);
      return 0;
    }
    case "ablation": {
      const { values } = parseArgs({
        args: rest,
        options: {
          type: { type: "string" },
          corpus: { type: "string" },
          count: { type: "string", default: "1000" },
          pipeline: { type: "string" },
          seed: { type: "string", default: "0" },
          out: { type: "string" },
        },
      });
      if (!values.type || !values.corpus || !values.out) {
        throw new Error("--type, --corpus, and --out are required");
      }
      const corpus = readCorpusCsv(values.corpus);
      const rows = generateAblation(
        {
          type: values.type as AblationType,
          count: Number(values.count),
          pipelineCsv: values.pipeline,
        },
        corpus,
        Number(values.seed),
      );
      writeFeatureCsv(values.out, rows);
      console.log(JSON.stringify({ rows: rows.length, out: values.out }));
      return 0;
    }
    case "percentile-cell": {
      const { values } = parseArgs({
        args: rest,
        options: {
          corpus: { type: "string" },
          "amount-band": { type: "string" },
          "fee-band": { type: "string" },
          count: { type: "string", default: "1000" },
          seed: { type: "string", default: "0" },
          out: { type: "string" },
        },
      });
      if (!values.corpus || !values.out || values["amount-band"] === undefined || values["fee-band"] === undefined) {
        throw new Error("--corpus, --amount-band, --fee-band, and --out are required");
      }
      const corpus = readCorpusCsv(values.corpus);
      const rows = generateFixedPercentile(
        corpus,
        Number(values["amount-band"]),
        Number(values["fee-band"]),
        Number(values.count),
        Number(values.seed),
      );
      writeFeatureCsv(values.out, rows);
      console.log(JSON.stringify({ rows: rows.length, out: values.out }));
      return 0;
    }
    case "synth": {
      const { values } = parseArgs({
        args: rest,
        options: {
          corpus: { type: "string" },
          model: { type: "string" },
          count: { type: "string", default: "1000" },
          seed: { type: "string", default: "0" },
          out: { type: "string" },
        },
      });
      if (!values.corpus || !values.model || !values.out) {
        throw new Error("--corpus, --model, and --out are required");
      }
      const corpus = readCorpusCsv(values.corpus);
      const synth = new TabularSynthesizer().fit(corpus, loadFeeModels(values.model));
      const rows = synth.sample(Number(values.count), Number(values.seed));
      writeFeatureCsv(values.out, rows);
      console.log(JSON.stringify({ rows: rows.length, out: values.out }));
      return 0;
    }
    default:
      console.error(
        "usage: cli.ts <whitebox|ablation|percentile-cell|synth> [options]",
      );
      return 2;
  }
}

process.exit(main(process.argv.slice(2)));
