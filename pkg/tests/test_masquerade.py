import math

import numpy as np
import pytest
from scipy import stats

from cloakchain import masquerade as mq
from cloakchain.corpusgen import corpus_rows, make_corpus
from cloakchain.errors import (
    EmptyAfterFilter,
    InsufficientData,
    SchemaError,
    WeightSumError,
)


def rec(i=1, j=1, fee=1000, amount=100_000):
    return mq.TxFeatureRecord(
        input_cnt=i, output_cnt=j, fee=fee,
        inputs_amount=amount, outputs_amount=amount - fee,
    )


class TestRecordAndIngest:
    def test_validate_accepts_consistent_record(self):
        rec().validate()

    def test_validate_rejects_broken_identity(self):
        bad = mq.TxFeatureRecord(1, 1, 1000, 100_000, 100_000)
        with pytest.raises(SchemaError):
            bad.validate()

    def test_as_vector_order(self):
        assert rec(2, 3, 500, 10_000).as_vector() == [2, 3, 500, 10_000, 9_500]

    def test_ingest_filters_and_counts(self):
        rows = [
            {"input_cnt": 1, "output_cnt": 1, "fee": 100, "inputs_amount": 1000,
             "outputs_amount": 900, "is_coinbase": 0},
            {"input_cnt": 1, "output_cnt": 1, "fee": 100, "inputs_amount": 1000,
             "outputs_amount": 900, "is_coinbase": 1},
            {"input_cnt": 9, "output_cnt": 1, "fee": 100, "inputs_amount": 1000,
             "outputs_amount": 900, "is_coinbase": 0},
            {"input_cnt": 1, "output_cnt": 1, "fee": 0, "inputs_amount": 1000,
             "outputs_amount": 1000, "is_coinbase": 0},
        ]
        corpus = mq.ingest_corpus(rows)
        assert len(corpus) == 1
        assert corpus.provenance["dropped"] == {"coinbase": 1, "io_count": 1, "nonpositive": 1}

    def test_ingest_raises_on_identity_violation(self):
        rows = [{"input_cnt": 1, "output_cnt": 1, "fee": 100, "inputs_amount": 1000,
                 "outputs_amount": 950, "is_coinbase": 0}]
        with pytest.raises(SchemaError):
            mq.ingest_corpus(rows)

    def test_ingest_empty_after_filter(self):
        rows = [{"input_cnt": 1, "output_cnt": 1, "fee": 100, "inputs_amount": 1000,
                 "outputs_amount": 900, "is_coinbase": 1}]
        with pytest.raises(EmptyAfterFilter):
            mq.ingest_corpus(rows)

    def test_csv_round_trip(self, small_corpus, tmp_path):
        path = str(tmp_path / "corpus.csv")
        mq.write_corpus_csv(path, corpus_rows(small_corpus))
        back = mq.read_corpus_csv(path)
        assert back.records == small_corpus.records

    def test_fake_csv_round_trip(self, tmp_path):
        path = str(tmp_path / "fake.csv")
        records = [rec(), rec(2, 2, 700, 50_000)]
        mq.write_fake_csv(path, records, label="covert")
        back = mq.read_fake_csv(path)
        assert [r for r, _ in back] == records
        assert {label for _, label in back} == {"covert"}

    def test_corpus_csv_missing_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("input_cnt,output_cnt\n1,1\n")
        with pytest.raises(SchemaError):
            mq.read_corpus_csv(str(path))


class TestPartitionAndBuckets:
    def test_partition_is_disjoint_cover(self, small_corpus):
        cells = mq.partition_cells(small_corpus)
        total = sum(len(c.records) for c in cells)
        assert total == len(small_corpus)
        keys = [(c.i, c.j) for c in cells]
        assert len(keys) == len(set(keys))
        for cell in cells:
            assert all(r.input_cnt == cell.i and r.output_cnt == cell.j for r in cell.records)

    def test_percentile_matches_hand_value(self):
        # linear interpolation: p25 of [1..5] is 2.0, p50 is 3.0
        assert mq.percentile([1, 2, 3, 4, 5], 25) == 2.0
        assert mq.percentile([1, 2, 3, 4, 5], 50) == 3.0
        assert mq.percentile([1, 2, 3, 4], 50) == 2.5

    def test_buckets_cover_cell_without_overlap(self, small_corpus):
        for cell in mq.partition_cells(small_corpus):
            buckets = mq.bucket_by_percentile(cell, n_intervals=5)
            assert sum(len(b.records) for b in buckets) == len(cell.records)
            for b in buckets:
                for r in b.records:
                    assert b.lo < r.inputs_amount <= b.hi

    def test_bucket_edges_at_percentiles(self):
        cell = mq.PartitionCell(1, 1, [rec(amount=a) for a in range(1000, 2001, 10)])
        buckets = mq.bucket_by_percentile(cell, n_intervals=5)
        amounts = [r.inputs_amount for r in cell.records]
        assert [b.hi for b in buckets] == [
            mq.percentile(amounts, q) for q in (20, 40, 60, 80, 100)
        ]
        assert buckets[0].lo == float("-inf")

    def test_degenerate_amounts_collapse_to_one_bucket(self):
        cell = mq.PartitionCell(1, 1, [rec(amount=5000)] * 10)
        buckets = mq.bucket_by_percentile(cell, n_intervals=5)
        assert len(buckets) == 1
        assert len(buckets[0].records) == 10

    def test_locate_bucket_clamps(self):
        bounds = [(float("-inf"), 10.0), (10.0, 20.0), (20.0, 30.0)]
        assert mq.locate_bucket(bounds, 5) == 0
        assert mq.locate_bucket(bounds, 10) == 0
        assert mq.locate_bucket(bounds, 15) == 1
        assert mq.locate_bucket(bounds, 999) == 2


class TestFeePmf:
    def test_counts_match_hand_tally(self):
        bucket = mq.IntervalBucket(
            cell=(1, 1), ordinal=0, lo=float("-inf"), hi=float("inf"),
            records=[rec(fee=100)] * 3 + [rec(fee=200)] * 1,
        )
        pmf = mq.fit_fee_pmf(bucket)
        assert pmf.support == [100, 200]
        assert pmf.probabilities == [0.75, 0.25]

    def test_probabilities_sum_to_one_exactly(self, small_corpus):
        for cell in mq.partition_cells(small_corpus):
            for bucket in mq.bucket_by_percentile(cell):
                pmf = mq.fit_fee_pmf(bucket)
                assert abs(sum(pmf.probabilities) - 1.0) <= 1e-12
                assert all(p > 0 for p in pmf.probabilities)

    def test_samples_stay_on_support(self):
        pmf = mq.FeePmf(support=[7, 11], probabilities=[0.5, 0.5])
        rng = np.random.default_rng(0)
        assert set(pmf.sample(rng, 200)) == {7, 11}

    def test_rejects_bad_probabilities(self):
        with pytest.raises(ValueError):
            mq.FeePmf(support=[1], probabilities=[0.5])


class TestExpectedCapacity:
    def test_single_input_weight(self):
        bits, fee = mq.expected_capacity([1, 0, 0, 0, 0], [100, 0, 0, 0, 0])
        assert bits == 256.0 and fee == 100.0

    def test_uniform_weights(self):
        bits, fee = mq.expected_capacity([0.2] * 5, [10, 20, 30, 40, 50])
        assert math.isclose(bits, 256 * 3.0)
        assert math.isclose(fee, 30.0)

    def test_reference_distribution(self):
        """Frozen expected values for the observed real-world input-count mix."""
        weights = [0.777, 0.140, 0.047, 0.022, 0.014]
        fees = [3144.32, 4373.07, 5785.43, 7241.43, 7393.79]
        bits, fee = mq.expected_capacity(weights, fees)
        assert math.isclose(bits, 347.136)
        assert math.isclose(bits / 256, 1.356)
        assert abs(round(fee) - 3589) <= 1

    def test_weight_sum_enforced(self):
        with pytest.raises(WeightSumError):
            mq.expected_capacity([0.5, 0.4], [1, 1])
        with pytest.raises(WeightSumError):
            mq.expected_capacity([0.5, 0.5], [1])


class TestFeatureSynthesizer:
    def test_estimator_params_round_trip(self):
        synth = mq.FeatureSynthesizer(n_intervals=4, random_state=3)
        params = synth.get_params()
        other = mq.FeatureSynthesizer().set_params(**params)
        assert other.get_params() == params
        with pytest.raises(ValueError):
            synth.set_params(bogus=1)

    def test_sample_records_are_valid(self, fitted_synth):
        for r in fitted_synth.sample(200, seed=5):
            r.validate()
            assert 1 <= r.input_cnt <= 5 and 1 <= r.output_cnt <= 5

    def test_sampling_is_deterministic_and_batch_invariant(self, fitted_synth):
        a = fitted_synth.sample(20, seed=9)
        b = fitted_synth.sample(20, seed=9)
        assert a == b
        # the same ordinals drawn in two batches give the same records
        first = fitted_synth.sample(10, seed=9)
        second = fitted_synth.sample(10, seed=9, start_ordinal=10)
        assert first + second == a

    def test_different_seeds_differ(self, fitted_synth):
        assert fitted_synth.sample(20, seed=1) != fitted_synth.sample(20, seed=2)

    def test_fees_come_from_real_support(self, small_corpus, fitted_synth):
        real_fees = {
            (r.input_cnt, r.output_cnt, r.fee) for r in small_corpus.records
        }
        observed_fees = {r.fee for r in small_corpus.records}
        for r in fitted_synth.sample(300, seed=11):
            assert r.fee in observed_fees
            assert (r.input_cnt, r.output_cnt, r.fee) in real_fees

    def test_amounts_respect_clip_cell_ranges(self, small_corpus, fitted_synth):
        by_cell = {}
        for r in small_corpus.records:
            by_cell.setdefault((r.input_cnt, r.output_cnt), []).append(r.inputs_amount)
        for r in fitted_synth.sample(300, seed=13):
            lo = min(by_cell[(r.input_cnt, r.output_cnt)])
            hi = max(by_cell[(r.input_cnt, r.output_cnt)])
            assert lo <= r.inputs_amount <= hi

    def test_count_pair_frequencies_track_corpus(self, small_corpus, fitted_synth):
        """Chi-squared test: sampled (i, j) frequencies match the corpus."""
        fake = fitted_synth.sample(4000, seed=17)
        real_counts = {}
        for r in small_corpus.records:
            real_counts[(r.input_cnt, r.output_cnt)] = real_counts.get(
                (r.input_cnt, r.output_cnt), 0
            ) + 1
        fake_counts = {}
        for r in fake:
            fake_counts[(r.input_cnt, r.output_cnt)] = fake_counts.get(
                (r.input_cnt, r.output_cnt), 0
            ) + 1
        # restrict to pairs common enough for the test to be meaningful
        keys = [k for k, v in real_counts.items() if v >= 50]
        expected = np.array([real_counts[k] for k in keys], dtype=float)
        expected = expected / expected.sum() * sum(fake_counts.get(k, 0) for k in keys)
        observed = np.array([fake_counts.get(k, 0) for k in keys], dtype=float)
        _, p_value = stats.chisquare(observed, expected)
        assert p_value > 0.001

    def test_amount_distribution_close_to_corpus(self, small_corpus, fitted_synth):
        """KS distance between real and fake log-amounts is small."""
        fake = fitted_synth.sample(3000, seed=19)
        real = np.log([r.inputs_amount for r in small_corpus.records])
        synth = np.log([r.inputs_amount for r in fake])
        d, _ = stats.ks_2samp(real, synth)
        assert d < 0.08

    def test_mixture_recovers_known_generator(self):
        """Fit on a hand-built two-mode corpus; samples must show both modes
        with weights within 5 percentage points."""
        rng = np.random.default_rng(42)
        records = []
        for _ in range(3000):
            if rng.random() < 0.7:
                amount = int(np.exp(rng.normal(10.0, 0.05)))
            else:
                amount = int(np.exp(rng.normal(13.0, 0.05)))
            records.append(rec(fee=997, amount=amount))
        corpus = mq.Corpus(records=records)
        synth = mq.FeatureSynthesizer(random_state=0).fit(corpus)
        fake = synth.sample(3000, seed=23)
        low = sum(1 for r in fake if np.log(r.inputs_amount) < 11.5) / len(fake)
        assert abs(low - 0.7) < 0.05

    def test_unfitted_sample_raises(self):
        with pytest.raises(InsufficientData):
            mq.FeatureSynthesizer().sample(1)

    def test_save_load_samples_identically(self, fitted_synth, tmp_path):
        path = str(tmp_path / "model.json")
        fitted_synth.save(path)
        loaded = mq.FeatureSynthesizer.load(path)
        assert loaded.sample(50, seed=29) == fitted_synth.sample(50, seed=29)

    def test_from_dict_rejects_unknown_version(self):
        with pytest.raises(SchemaError):
            mq.FeatureSynthesizer.from_dict({"version": 99})

    def test_fit_requires_nonempty_macro_buckets(self):
        corpus = mq.Corpus(records=[rec(amount=5000)] * 10)
        with pytest.raises(InsufficientData):
            mq.FeatureSynthesizer().fit(corpus)
