import numpy as np
import pytest
from sklearn import metrics as skm

from cloakchain import evalcore as ev
from cloakchain.errors import DegenerateData, LengthMismatch
from cloakchain.masquerade import Corpus, TxFeatureRecord


def rec(i=1, j=1, fee=1000, amount=100_000):
    return TxFeatureRecord(i, j, fee, amount, amount - fee)


class TestMixDatasets:
    def test_ratio_and_shuffle(self, small_corpus):
        fake = [rec(amount=50_000 + k) for k in range(500)]
        mixed = ev.mix_datasets(small_corpus, fake, ratio=0.5, seed=3)
        n_fake = mixed.labels.count("covert")
        n_real = mixed.labels.count("real")
        assert n_fake == 500 and n_real == 500
        # shuffled: covert rows are not all at the end
        first_half = mixed.labels[:500]
        assert 0 < first_half.count("covert") < 500

    def test_ratio_quarter(self, small_corpus):
        fake = [rec(amount=50_000 + k) for k in range(300)]
        mixed = ev.mix_datasets(small_corpus, fake, ratio=0.25, seed=3)
        assert mixed.labels.count("covert") == 300
        assert mixed.labels.count("real") == 900

    def test_features_match_labels(self, small_corpus):
        fake = [rec(i=5, j=5, amount=123_456) for _ in range(50)]
        mixed = ev.mix_datasets(small_corpus, fake, ratio=0.5, seed=1)
        for row, label in zip(mixed.features, mixed.labels):
            if label == "covert":
                assert row.tolist() == [5, 5, 1000, 123_456, 122_456]

    def test_deterministic(self, small_corpus):
        fake = [rec(amount=50_000 + k) for k in range(100)]
        a = ev.mix_datasets(small_corpus, fake, seed=7)
        b = ev.mix_datasets(small_corpus, fake, seed=7)
        assert np.array_equal(a.features, b.features) and a.labels == b.labels

    def test_empty_rejected(self, small_corpus):
        with pytest.raises(ValueError):
            ev.mix_datasets(Corpus(records=[]), [rec()])
        with pytest.raises(ValueError):
            ev.mix_datasets(small_corpus, [])

    def test_length_mismatch_guard(self):
        with pytest.raises(LengthMismatch):
            ev.LabeledFeatureSet(features=np.zeros((2, 5)), labels=["real"])


class TestStandardize:
    def test_zero_mean_unit_variance(self):
        rng = np.random.default_rng(0)
        X = rng.normal(5, 3, size=(400, 4))
        Z = ev.standardize(X)
        assert np.allclose(Z.mean(axis=0), 0, atol=1e-9)
        assert np.allclose(Z.std(axis=0), 1, atol=1e-9)

    def test_constant_column_dropped_with_warning(self):
        X = np.column_stack([np.arange(10.0), np.full(10, 3.0)])
        with pytest.warns(UserWarning):
            Z = ev.standardize(X)
        assert Z.shape == (10, 1)

    def test_all_constant_raises(self):
        with pytest.raises(DegenerateData):
            ev.standardize(np.full((10, 3), 2.0))


class TestKmeans:
    def test_separable_blobs_recovered(self):
        rng = np.random.default_rng(1)
        a = rng.normal(0, 0.1, size=(100, 3))
        b = rng.normal(10, 0.1, size=(100, 3))
        X = np.vstack([a, b])
        truth = ["a"] * 100 + ["b"] * 100
        pred = ev.kmeans2(X, seed=0)
        assert ev.ari(pred.tolist(), truth) == 1.0
        assert ev.nmi(pred.tolist(), truth) == 1.0

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            ev.kmeans2(np.zeros((1, 3)))


class TestAgreementScores:
    def test_hand_contingency_fixture(self):
        # clusters [0,0,0,1,1,1] vs labels [a,a,b,b,b,b]: table [[2,1],[0,3]]
        # same-pair count 4, row pairs 6, column pairs 7, total pairs 15
        pred = [0, 0, 0, 1, 1, 1]
        truth = ["a", "a", "b", "b", "b", "b"]
        table = ev._contingency(pred, truth)
        assert table.tolist() == [[2, 1], [0, 3]]
        expected_ari = (4 - (6 * 7) / 15) / ((6 + 7) / 2 - (6 * 7) / 15)
        assert abs(ev.ari(pred, truth) - expected_ari) < 1e-12

    def test_matches_sklearn_on_random_labelings(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(10, 200))
            pred = rng.integers(0, 3, size=n).tolist()
            truth = rng.integers(0, 2, size=n).tolist()
            assert abs(ev.ari(pred, truth) - skm.adjusted_rand_score(truth, pred)) < 1e-10
            assert (
                abs(
                    ev.nmi(pred, truth)
                    - skm.normalized_mutual_info_score(truth, pred, average_method="arithmetic")
                )
                < 1e-10
            )

    def test_perfect_and_inverted_agreement(self):
        truth = ["a"] * 5 + ["b"] * 5
        assert ev.ari([0] * 5 + [1] * 5, truth) == 1.0
        assert ev.ari([1] * 5 + [0] * 5, truth) == 1.0  # relabel invariance
        assert ev.nmi([1] * 5 + [0] * 5, truth) == 1.0

    def test_random_labelings_score_near_zero(self):
        rng = np.random.default_rng(11)
        scores = []
        for _ in range(200):
            pred = rng.integers(0, 2, size=500).tolist()
            truth = rng.integers(0, 2, size=500).tolist()
            scores.append(ev.ari(pred, truth))
        assert abs(float(np.mean(scores))) < 0.02

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            ev.ari([0, 1], ["a"])
