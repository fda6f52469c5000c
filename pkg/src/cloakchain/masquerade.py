"""Transaction-parameter masquerading.

Real transactions are reduced to five features (input count, output count,
fee, total input amount, total output amount).  The corpus is partitioned by
(input count, output count), each cell is cut into percentile intervals of
input amount, and an empirical fee distribution is fitted per interval.
Counts and amounts for fake transactions come from a learned per-bucket
model (categorical over the count pair, log-amount Gaussian mixture); fees
are drawn from the matching interval's fitted distribution, so fake fees
reuse values real transactions actually paid.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict

import numpy as np
from sklearn.mixture import GaussianMixture

from .errors import (
    EmptyAfterFilter,
    InsufficientData,
    ModelMismatch,
    SchemaError,
    WeightSumError,
)

MAX_IO_COUNT = 5

CORPUS_FIELDS = [
    "txid", "block_height", "timestamp", "is_coinbase",
    "input_cnt", "output_cnt", "inputs_amount", "outputs_amount", "fee",
]
FAKE_FIELDS = ["input_cnt", "output_cnt", "inputs_amount", "outputs_amount", "fee", "label"]


@dataclass(frozen=True)
class TxFeatureRecord:
    input_cnt: int
    output_cnt: int
    fee: int
    inputs_amount: int
    outputs_amount: int

    def validate(self) -> None:
        if self.input_cnt < 1 or self.output_cnt < 1:
            raise SchemaError("counts must be positive")
        if self.fee <= 0:
            raise SchemaError("fee must be positive")
        if self.outputs_amount != self.inputs_amount - self.fee:
            raise SchemaError(
                f"outputs_amount {self.outputs_amount} != "
                f"inputs_amount {self.inputs_amount} - fee {self.fee}"
            )

    def as_vector(self) -> list[int]:
        """Feature order shared with the evaluation module."""
        return [
            self.input_cnt,
            self.output_cnt,
            self.fee,
            self.inputs_amount,
            self.outputs_amount,
        ]


@dataclass
class Corpus:
    records: list[TxFeatureRecord]
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class PartitionCell:
    i: int
    j: int
    records: list[TxFeatureRecord]


@dataclass
class IntervalBucket:
    cell: tuple[int, int]
    ordinal: int
    lo: float  # exclusive, -inf for the first interval
    hi: float  # inclusive
    records: list[TxFeatureRecord]


@dataclass
class FeePmf:
    support: list[int]
    probabilities: list[float]

    def __post_init__(self):
        total = sum(self.probabilities)
        if not self.support or abs(total - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonempty and sum to 1")

    def sample(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        return rng.choice(np.asarray(self.support), size=size, p=self.probabilities)


def ingest_corpus(rows, max_io: int = MAX_IO_COUNT) -> Corpus:
    """Filter raw rows into a Corpus: no coinbase, counts capped at max_io.

    Rows failing the amount identity raise SchemaError; rows merely outside
    the filters are dropped and counted in the provenance metadata.
    """
    records = []
    dropped = {"coinbase": 0, "io_count": 0, "nonpositive": 0}
    for row in rows:
        rec = TxFeatureRecord(
            input_cnt=int(row["input_cnt"]),
            output_cnt=int(row["output_cnt"]),
            fee=int(row["fee"]),
            inputs_amount=int(row["inputs_amount"]),
            outputs_amount=int(row["outputs_amount"]),
        )
        if int(row.get("is_coinbase", 0)):
            dropped["coinbase"] += 1
            continue
        if rec.outputs_amount != rec.inputs_amount - rec.fee:
            raise SchemaError("outputs_amount != inputs_amount - fee")
        if rec.fee <= 0 or rec.input_cnt < 1 or rec.output_cnt < 1:
            dropped["nonpositive"] += 1
            continue
        if rec.input_cnt > max_io or rec.output_cnt > max_io:
            dropped["io_count"] += 1
            continue
        records.append(rec)
    if not records:
        raise EmptyAfterFilter("no records left after filtering")
    return Corpus(records=records, provenance={"dropped": dropped, "max_io": max_io})


def read_corpus_csv(path: str, max_io: int = MAX_IO_COUNT) -> Corpus:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CORPUS_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise SchemaError(f"corpus CSV missing columns: {sorted(missing)}")
        corpus = ingest_corpus(reader, max_io=max_io)
    corpus.provenance["source"] = path
    return corpus


def write_corpus_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CORPUS_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def write_fake_csv(path: str, records: list[TxFeatureRecord], label: str = "covert") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=FAKE_FIELDS)
        writer.writeheader()
        for rec in records:
            row = asdict(rec)
            row["label"] = label
            writer.writerow(row)


def read_fake_csv(path: str) -> list[tuple[TxFeatureRecord, str]]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(FAKE_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise SchemaError(f"feature CSV missing columns: {sorted(missing)}")
        for row in reader:
            rec = TxFeatureRecord(
                input_cnt=int(row["input_cnt"]),
                output_cnt=int(row["output_cnt"]),
                fee=int(row["fee"]),
                inputs_amount=int(row["inputs_amount"]),
                outputs_amount=int(row["outputs_amount"]),
            )
            rec.validate()
            out.append((rec, row["label"]))
    return out


def partition_cells(corpus: Corpus) -> list[PartitionCell]:
    """Disjoint cover of the corpus by (input count, output count)."""
    cells: dict[tuple[int, int], list[TxFeatureRecord]] = {}
    for rec in corpus.records:
        cells.setdefault((rec.input_cnt, rec.output_cnt), []).append(rec)
    return [PartitionCell(i=i, j=j, records=recs) for (i, j), recs in sorted(cells.items())]


def percentile(values, q):
    """Linear-interpolation percentile, the single convention used artifact-wide."""
    return float(np.percentile(np.asarray(values, dtype=float), q, method="linear"))


def bucket_by_percentile(cell: PartitionCell, n_intervals: int = 5) -> list[IntervalBucket]:
    """Cut a cell into intervals at input-amount percentiles.

    Buckets are (lo, hi]; the first bucket is open below.  Degenerate
    intervals (equal bounds) are merged away.
    """
    if not cell.records or n_intervals < 1:
        raise ValueError("cell must be nonempty and n_intervals >= 1")
    amounts = np.array([r.inputs_amount for r in cell.records], dtype=float)
    edges = [percentile(amounts, 100.0 * k / n_intervals) for k in range(1, n_intervals + 1)]
    # drop duplicate upper bounds (all-equal amounts collapse to one bucket)
    uniq = []
    for e in edges:
        if not uniq or e > uniq[-1]:
            uniq.append(e)
    bounds = []
    lo = float("-inf")
    for hi in uniq:
        bounds.append((lo, hi))
        lo = hi
    buckets = [
        IntervalBucket(cell=(cell.i, cell.j), ordinal=k, lo=lo, hi=hi, records=[])
        for k, (lo, hi) in enumerate(bounds)
    ]
    for rec in cell.records:
        buckets[locate_bucket(bounds, rec.inputs_amount)].records.append(rec)
    return [b for b in buckets if b.records]


def locate_bucket(bounds: list[tuple[float, float]], amount: float) -> int:
    """Index of the (lo, hi] interval holding the amount, clamped at the ends."""
    for k, (lo, hi) in enumerate(bounds):
        if lo < amount <= hi:
            return k
    return 0 if amount <= bounds[0][1] else len(bounds) - 1


def fit_fee_pmf(bucket: IntervalBucket) -> FeePmf:
    """Empirical (frequency-weighted) distribution over observed fee values."""
    if not bucket.records:
        raise ValueError("bucket must be nonempty")
    fees = sorted({r.fee for r in bucket.records})
    counts = {f: 0 for f in fees}
    for r in bucket.records:
        counts[r.fee] += 1
    total = len(bucket.records)
    probs = [counts[f] / total for f in fees]
    # renormalize away float dust so the sum is exactly 1
    probs[-1] += 1.0 - sum(probs)
    return FeePmf(support=fees, probabilities=probs)


def expected_capacity(proportions, avg_fees) -> tuple[float, float]:
    """Expected channel throughput per transaction.

    Each input carries one 256-bit nonce, so bits = 256 * E[input count];
    cost is the proportion-weighted mean fee.
    """
    proportions = list(map(float, proportions))
    avg_fees = list(map(float, avg_fees))
    if len(proportions) != len(avg_fees):
        raise WeightSumError("proportions and fees must align")
    if abs(sum(proportions) - 1.0) > 1e-6:
        raise WeightSumError(f"weights sum to {sum(proportions)}, not 1")
    mean_inputs = sum(w * (i + 1) for i, w in enumerate(proportions))
    bits = 256.0 * mean_inputs
    fee = sum(w * f for w, f in zip(proportions, avg_fees))
    return bits, fee


MODEL_VERSION = 1


class FeatureSynthesizer:
    """Learned generator for fake transaction features (fit/sample estimator).

    Fitting clips the corpus to the [clip_lo, clip_hi] input-amount
    percentiles and splits it into three macro buckets at the macro edge
    percentiles.  Each macro bucket gets a categorical over count pairs and,
    per count pair, a Gaussian mixture over log input amounts.  Fee models
    are the per-interval empirical distributions of the full corpus.
    """

    def __init__(
        self,
        n_intervals: int = 5,
        macro_edges: tuple[float, float] = (20.0, 80.0),
        clip: tuple[float, float] = (1.0, 99.0),
        n_components: int = 5,
        max_iter: int = 200,
        tol: float = 1e-6,
        random_state: int = 0,
    ):
        self.n_intervals = n_intervals
        self.macro_edges = tuple(macro_edges)
        self.clip = tuple(clip)
        self.n_components = n_components
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.fitted_ = False

    def get_params(self, deep: bool = True) -> dict:
        return {
            "n_intervals": self.n_intervals,
            "macro_edges": self.macro_edges,
            "clip": self.clip,
            "n_components": self.n_components,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "random_state": self.random_state,
        }

    def set_params(self, **params) -> "FeatureSynthesizer":
        for key, value in params.items():
            if key not in self.get_params():
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    # --- fitting ---

    def fit(self, corpus: Corpus) -> "FeatureSynthesizer":
        amounts = np.array([r.inputs_amount for r in corpus.records], dtype=float)
        lo, hi = (percentile(amounts, q) for q in self.clip)
        clipped = [r for r in corpus.records if lo <= r.inputs_amount <= hi]
        if not clipped:
            raise InsufficientData("clip range removed every record")
        self.clip_range_ = (lo, hi)
        clipped_amounts = np.array([r.inputs_amount for r in clipped], dtype=float)
        e1, e2 = (percentile(clipped_amounts, q) for q in self.macro_edges)
        self.macro_bounds_ = [(float("-inf"), e1), (e1, e2), (e2, float("inf"))]
        groups = [[], [], []]
        for rec in clipped:
            groups[locate_bucket(self.macro_bounds_, rec.inputs_amount)].append(rec)
        if any(not g for g in groups):
            raise InsufficientData("a macro bucket is empty")
        total = len(clipped)
        self.macro_weights_ = [len(g) / total for g in groups]
        self.cell_models_ = []
        for b, group in enumerate(groups):
            pairs: dict[tuple[int, int], list[float]] = {}
            for rec in group:
                pairs.setdefault((rec.input_cnt, rec.output_cnt), []).append(
                    float(rec.inputs_amount)
                )
            model = {}
            for pair, vals in sorted(pairs.items()):
                logs = np.log(np.asarray(vals)).reshape(-1, 1)
                if len(logs) < 2 or len(np.unique(logs)) < 2:
                    # point-mass cell: mixture fitting is meaningless
                    model[pair] = {
                        "weight": len(vals) / len(group),
                        "mix_weights": [1.0],
                        "mix_means": [float(logs.mean())],
                        "mix_vars": [1e-12],
                        "amount_range": (float(min(vals)), float(max(vals))),
                    }
                    continue
                k = min(self.n_components, len(np.unique(logs)))
                gm = GaussianMixture(
                    n_components=max(1, k),
                    covariance_type="diag",
                    max_iter=self.max_iter,
                    tol=self.tol,
                    init_params="k-means++",
                    random_state=self.random_state,
                    reg_covar=1e-9,
                )
                gm.fit(logs)
                model[pair] = {
                    "weight": len(vals) / len(group),
                    "mix_weights": gm.weights_.tolist(),
                    "mix_means": gm.means_.ravel().tolist(),
                    "mix_vars": gm.covariances_.ravel().tolist(),
                    "amount_range": (float(min(vals)), float(max(vals))),
                }
            self.cell_models_.append(model)
        # fee models over the whole (unclipped) corpus
        self.fee_models_ = {}
        for cell in partition_cells(corpus):
            buckets = bucket_by_percentile(cell, self.n_intervals)
            self.fee_models_[(cell.i, cell.j)] = {
                "bounds": [(b.lo, b.hi) for b in buckets],
                "pmfs": [fit_fee_pmf(b) for b in buckets],
            }
        self.fitted_ = True
        return self

    # --- sampling ---

    def _rng_for(self, seed: int, ordinal: int) -> np.random.Generator:
        # per-ordinal stream: output independent of batching or threading
        return np.random.default_rng(np.random.SeedSequence([seed, ordinal]))

    def sample_one(self, seed: int, ordinal: int) -> TxFeatureRecord:
        rng = self._rng_for(seed, ordinal)
        bucket = rng.choice(3, p=self.macro_weights_)
        model = self.cell_models_[bucket]
        pairs = list(model)
        weights = np.array([model[p]["weight"] for p in pairs])
        weights = weights / weights.sum()
        i, j = pairs[rng.choice(len(pairs), p=weights)]
        cell = model[(i, j)]
        for _ in range(200):
            amount = self._draw_amount(rng, cell)
            fee = self._draw_fee(rng, i, j, amount)
            if fee is not None and fee < amount:
                rec = TxFeatureRecord(
                    input_cnt=i,
                    output_cnt=j,
                    fee=int(fee),
                    inputs_amount=int(amount),
                    outputs_amount=int(amount) - int(fee),
                )
                rec.validate()
                return rec
        raise ModelMismatch(f"cannot place a valid fee for cell ({i},{j})")

    def _draw_amount(self, rng: np.random.Generator, cell: dict) -> int:
        comp = rng.choice(len(cell["mix_weights"]), p=cell["mix_weights"])
        val = rng.normal(cell["mix_means"][comp], np.sqrt(cell["mix_vars"][comp]))
        amount = float(np.exp(val))
        lo, hi = cell["amount_range"]
        return int(round(min(max(amount, lo), hi)))

    def _draw_fee(self, rng: np.random.Generator, i: int, j: int, amount: int):
        entry = self.fee_models_.get((i, j))
        if entry is None:
            raise ModelMismatch(f"no fee model for cell ({i},{j})")
        idx = locate_bucket(entry["bounds"], amount)
        pmf = entry["pmfs"][idx]
        for _ in range(100):
            fee = int(pmf.sample(rng, 1)[0])
            if fee < amount:
                return fee
        return None

    def sample(self, count: int, seed: int = 0, start_ordinal: int = 0) -> list[TxFeatureRecord]:
        if not self.fitted_:
            raise InsufficientData("synthesizer is not fitted")
        return [self.sample_one(seed, start_ordinal + k) for k in range(count)]

    # --- persistence ---

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "params": {k: list(v) if isinstance(v, tuple) else v for k, v in self.get_params().items()},
            "clip_range": list(self.clip_range_),
            "macro_bounds": [[_num(lo), _num(hi)] for lo, hi in self.macro_bounds_],
            "macro_weights": self.macro_weights_,
            "cells": [
                {f"{i},{j}": m for (i, j), m in model.items()}
                for model in self.cell_models_
            ],
            "fees": {
                f"{i},{j}": {
                    "bounds": [[_num(lo), _num(hi)] for lo, hi in entry["bounds"]],
                    "pmfs": [
                        {"support": p.support, "probabilities": p.probabilities}
                        for p in entry["pmfs"]
                    ],
                }
                for (i, j), entry in self.fee_models_.items()
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureSynthesizer":
        if doc.get("version") != MODEL_VERSION:
            raise SchemaError(f"unsupported model version {doc.get('version')}")
        params = dict(doc["params"])
        params["macro_edges"] = tuple(params["macro_edges"])
        params["clip"] = tuple(params["clip"])
        synth = cls(**params)
        synth.clip_range_ = tuple(doc["clip_range"])
        synth.macro_bounds_ = [(_unnum(lo), _unnum(hi)) for lo, hi in doc["macro_bounds"]]
        synth.macro_weights_ = doc["macro_weights"]
        synth.cell_models_ = [
            {tuple(map(int, key.split(","))): m for key, m in model.items()}
            for model in doc["cells"]
        ]
        synth.fee_models_ = {
            tuple(map(int, key.split(","))): {
                "bounds": [(_unnum(lo), _unnum(hi)) for lo, hi in entry["bounds"]],
                "pmfs": [
                    FeePmf(support=p["support"], probabilities=p["probabilities"])
                    for p in entry["pmfs"]
                ],
            }
            for key, entry in doc["fees"].items()
        }
        synth.fitted_ = True
        return synth

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "FeatureSynthesizer":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _num(x: float):
    """JSON-safe bound value (infinities become strings)."""
    if x == float("-inf"):
        return "-inf"
    if x == float("inf"):
        return "inf"
    return x


def _unnum(x):
    if x in ("-inf", "inf"):
        return float(x)
    return float(x)
