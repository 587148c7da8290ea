import numpy as np
import pytest

from conftest import make_matrix
from entropic.errors import StatsError
from entropic.stats import (
    boxplot_by_audio,
    boxplot_csv,
    correlation_csv,
    correlation_matrix,
    pearson,
    sex_grouped_correlation_means,
    sex_means_csv,
    summarize,
)


class TestPearson:
    def test_exact_positive_dependence(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_exact_negative_dependence(self):
        assert pearson([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0)

    def test_worked_example(self):
        assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)

    def test_self_correlation_is_one(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=40)
        assert pearson(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=30), rng.normal(size=30)
        assert pearson(3.0 * a + 7.0, b) == pytest.approx(pearson(a, b), abs=1e-12)

    def test_constant_sequence_rejected(self):
        with pytest.raises(StatsError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(StatsError):
            pearson([1, 2], [1, 2, 3])


class TestCorrelationMatrix:
    def test_identical_rows_give_unit_offdiagonal(self):
        rng = np.random.default_rng(2)
        row = rng.normal(size=60)
        values = np.tile(row, (24, 1)) + rng.normal(0, 1e-9, (24, 60))
        values[0] = values[1]  # exactly identical pair
        corr = correlation_matrix(make_matrix(values))
        assert corr[0, 1] == pytest.approx(1.0)

    def test_symmetric_unit_diagonal(self):
        rng = np.random.default_rng(3)
        corr = correlation_matrix(make_matrix(rng.normal(size=(24, 60))))
        assert np.allclose(corr, corr.T, atol=1e-12)
        assert np.all(np.diag(corr) == 1.0)

    def test_incomplete_matrix_rejected(self):
        from entropic.dataset import audio_columns
        from entropic.stats import ActorInfo, EntropyMatrix

        values = np.ones((2, 60))
        values[1, 0] = np.nan
        m = EntropyMatrix(
            values=values,
            actor_meta=(ActorInfo(1, "male"), ActorInfo(2, "female")),
            audio_meta=tuple(audio_columns()),
            row_complete=(True, False),
        )
        with pytest.raises(StatsError):
            correlation_matrix(m)


class TestSexGroupedMeans:
    def test_constant_correlation(self):
        n = 6
        corr = np.full((n, n), 0.7)
        np.fill_diagonal(corr, 1.0)
        sexes = ["male", "female"] * 3
        means = sex_grouped_correlation_means(corr, sexes)
        for key in means:
            assert means[key] == pytest.approx(0.7)

    def test_block_constant_matrix(self):
        sexes = ["male"] * 3 + ["female"] * 3
        corr = np.empty((6, 6))
        for i in range(6):
            for j in range(6):
                corr[i, j] = 0.5 if sexes[i] == sexes[j] else 0.1
        np.fill_diagonal(corr, 1.0)
        means = sex_grouped_correlation_means(corr, sexes)
        assert means[("male", "male")] == pytest.approx(0.5)
        assert means[("female", "female")] == pytest.approx(0.5)
        assert means[("male", "female")] == pytest.approx(0.1)
        assert means[("female", "male")] == pytest.approx(0.1)

    def test_singleton_group_flagged_nan(self):
        corr = np.array([[1.0, 0.2, 0.3], [0.2, 1.0, 0.4], [0.3, 0.4, 1.0]])
        means = sex_grouped_correlation_means(corr, ["male", "female", "female"])
        assert np.isnan(means[("male", "male")])
        assert means[("female", "female")] == pytest.approx(0.4)

    def test_asymmetric_matrix_rejected(self):
        corr = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(StatsError):
            sex_grouped_correlation_means(corr, ["male", "female"])


class TestBoxplot:
    def test_constant_column(self):
        s = summarize([3.0] * 10)
        assert s.minimum == s.q1 == s.median == s.q3 == s.maximum == 3.0
        assert s.outliers == ()

    def test_interpolated_quantiles_1_to_24(self):
        s = summarize(np.arange(1.0, 25.0))
        assert s.q1 == pytest.approx(6.75)
        assert s.median == pytest.approx(12.5)
        assert s.q3 == pytest.approx(18.25)

    def test_outliers_beyond_tukey_fences(self):
        values = list(np.linspace(0, 1, 20)) + [50.0, -50.0]
        s = summarize(values)
        assert set(s.outliers) == {50.0, -50.0}
        iqr = s.q3 - s.q1
        for o in s.outliers:
            assert o < s.q1 - 1.5 * iqr or o > s.q3 + 1.5 * iqr

    def test_ordering_chain(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            s = summarize(rng.normal(size=int(rng.integers(1, 60))))
            assert s.minimum <= s.q1 <= s.median <= s.q3 <= s.maximum

    def test_by_audio_shape(self):
        rng = np.random.default_rng(5)
        out = boxplot_by_audio(make_matrix(rng.normal(size=(24, 60))))
        assert len(out) == 60
        emotions = [meta.emotion for meta, _ in out]
        assert emotions[:4] == ["neutral"] * 4


class TestCsvOutputs:
    def test_correlation_csv_header(self):
        rng = np.random.default_rng(6)
        m = make_matrix(rng.normal(size=(24, 60)))
        text = correlation_csv(correlation_matrix(m), m.actor_meta)
        lines = text.strip().split("\n")
        assert lines[0] == "actor," + ",".join(str(i) for i in range(1, 25))
        assert len(lines) == 25

    def test_sex_means_csv(self):
        text = sex_means_csv({("male", "male"): 0.43, ("male", "female"): 0.23})
        assert "sex_a,sex_b,mean_correlation" in text
        assert "male,male,0.43" in text

    def test_boxplot_csv_columns(self):
        rng = np.random.default_rng(7)
        m = make_matrix(rng.normal(size=(24, 60)))
        text = boxplot_csv(boxplot_by_audio(m))
        lines = text.strip().split("\n")
        assert lines[0] == "group,emotion,min,q1,median,q3,max,mean,outliers"
        assert len(lines) == 61
