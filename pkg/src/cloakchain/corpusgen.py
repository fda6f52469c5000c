"""Synthetic transaction corpus generator.

Real large-scale chain datasets are out of reach for a desk experiment, so
evaluation runs against this documented generator instead:

* input counts follow the published real-world proportions for counts 1-5;
* output counts follow a similar skewed distribution;
* input amounts are log-normal, location shifted up with the input count;
* fees come from small discrete tiers per input count with limited jitter,
  so many transactions share identical fees, as on the real network.
"""

from __future__ import annotations

import numpy as np

from .masquerade import Corpus, TxFeatureRecord

INPUT_CNT_WEIGHTS = (0.777, 0.140, 0.047, 0.022, 0.014)
OUTPUT_CNT_WEIGHTS = (0.55, 0.35, 0.06, 0.03, 0.01)

# per-input-count log-amount location/scale (satoshi)
_AMOUNT_MU = (12.5, 13.1, 13.6, 14.0, 14.3)
_AMOUNT_SIGMA = 1.1

# discrete fee tiers (satoshi) and their weights, per input count
_FEE_TIERS = (
    ((1100, 1500, 2200, 3100, 4500), (0.30, 0.28, 0.22, 0.14, 0.06)),
    ((1800, 2600, 3500, 4400, 6100), (0.28, 0.27, 0.23, 0.15, 0.07)),
    ((2700, 3800, 5000, 6300, 8200), (0.27, 0.27, 0.24, 0.15, 0.07)),
    ((3500, 4900, 6400, 8100, 10400), (0.26, 0.27, 0.25, 0.15, 0.07)),
    ((4100, 5600, 7400, 9300, 11800), (0.26, 0.27, 0.25, 0.15, 0.07)),
)
# fee jitter multiples keep the support discrete but not single-valued
_JITTER = (0, 0, 0, 10, 20, 50)


def make_corpus(count: int, seed: int = 0) -> Corpus:
    rng = np.random.default_rng(seed)
    icnt = rng.choice(5, size=count, p=INPUT_CNT_WEIGHTS) + 1
    ocnt = rng.choice(5, size=count, p=OUTPUT_CNT_WEIGHTS) + 1
    records = []
    for k in range(count):
        i = int(icnt[k])
        amount = int(round(np.exp(rng.normal(_AMOUNT_MU[i - 1], _AMOUNT_SIGMA))))
        tiers, weights = _FEE_TIERS[i - 1]
        fee = int(rng.choice(tiers, p=weights)) + int(rng.choice(_JITTER))
        if fee >= amount:
            amount = fee + 1 + int(rng.integers(1000, 100000))
        rec = TxFeatureRecord(
            input_cnt=i,
            output_cnt=int(ocnt[k]),
            fee=fee,
            inputs_amount=amount,
            outputs_amount=amount - fee,
        )
        rec.validate()
        records.append(rec)
    return Corpus(records=records, provenance={"generator": "synthetic-v1", "seed": seed})


def corpus_rows(corpus: Corpus) -> list[dict]:
    """Corpus CSV rows for the generated records."""
    rows = []
    for k, rec in enumerate(corpus.records):
        rows.append(
            {
                "txid": f"{k:064x}",
                "block_height": k // 2000,
                "timestamp": 1600000000 + 600 * (k // 2000),
                "is_coinbase": 0,
                "input_cnt": rec.input_cnt,
                "output_cnt": rec.output_cnt,
                "inputs_amount": rec.inputs_amount,
                "outputs_amount": rec.outputs_amount,
                "fee": rec.fee,
            }
        )
    return rows
