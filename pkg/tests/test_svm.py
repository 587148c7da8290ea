import numpy as np
import pytest

from conftest import make_blobs
from entropic.errors import TrainingError
from entropic.svm import (
    KernelSpec,
    LabeledPoint,
    SvmModel,
    accuracy,
    decision_value,
    kernel_eval,
    kfold_cross_validate,
    select_best_kernel,
    train_binary,
    train_multiclass,
)


def points_from(X, labels):
    return [LabeledPoint(x, lab) for x, lab in zip(X, labels)]


TWO_POINTS = [LabeledPoint(np.array([-1.0]), "A"), LabeledPoint(np.array([1.0]), "B")]


class TestKernelEval:
    def test_linear_dot(self):
        assert kernel_eval(KernelSpec("linear"), [1, 2], [3, 4]) == 11.0

    def test_polynomial(self):
        spec = KernelSpec("polynomial", degree=2, offset=1.0)
        assert kernel_eval(spec, [1, 0], [0, 1]) == 1.0

    def test_gaussian_at_zero_distance(self):
        spec = KernelSpec("gaussian", sigma=1.0)
        assert kernel_eval(spec, [1.0, 2.0], [1.0, 2.0]) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(TrainingError):
            kernel_eval(KernelSpec("linear"), [1, 2], [1, 2, 3])

    def test_invalid_specs(self):
        with pytest.raises(TrainingError):
            KernelSpec("sigmoid")
        with pytest.raises(TrainingError):
            KernelSpec("polynomial", degree=0)
        with pytest.raises(TrainingError):
            KernelSpec("gaussian", sigma=0.0)


def kkt_residuals(model, data, C, tol):
    """Check every point against the soft-margin KKT conditions."""
    X = np.stack([p.features for p in data])
    neg, pos = model.class_pair
    y = np.array([-1.0 if p.label == neg else 1.0 for p in data])
    f = model.decision_values(X)
    # Recover the raw multipliers a_i = |signed alpha| per training point.
    alpha = np.zeros(len(data))
    sv_rows = {tuple(sv): a for sv, a in zip(model.support_vectors, model.alpha)}
    for i, p in enumerate(data):
        alpha[i] = abs(sv_rows.get(tuple(p.features), 0.0))
    ok = True
    for a, yi, fi in zip(alpha, y, f):
        margin = yi * fi
        if a <= 1e-9:
            ok &= margin >= 1 - tol - 1e-6
        elif a >= C - 1e-9:
            ok &= margin <= 1 + tol + 1e-6
        else:
            ok &= abs(margin - 1) <= tol + 1e-6
    return ok


class TestTrainBinary:
    def test_symmetric_two_point_problem(self):
        m = train_binary(TWO_POINTS, KernelSpec("linear"), C=10.0)
        assert m.bias == pytest.approx(0.0, abs=1e-6)
        assert decision_value(m, [0.0]) == pytest.approx(0.0, abs=1e-6)
        assert decision_value(m, [2.0]) > 0

    def test_separable_blobs_perfect_training_accuracy(self):
        X, labels = make_blobs(seed=0)
        data = points_from(X, labels)
        tol = 1e-3
        m = train_binary(data, KernelSpec("linear"), C=10.0, tol=tol)
        assert accuracy(m.predict(X), labels) == 1.0
        assert kkt_residuals(m, data, C=10.0, tol=tol)

    def test_dual_feasibility(self):
        X, labels = make_blobs(seed=1, centers=((0.0, 0.0), (1.0, 1.0)))  # overlapping
        for C in (0.1, 1.0, 10.0):
            m = train_binary(points_from(X, labels), KernelSpec("gaussian", sigma=1.0), C=C)
            assert abs(m.alpha.sum()) <= 1e-8 * C + 1e-12
            assert np.all(np.abs(m.alpha) <= C + 1e-12)

    def test_degenerate_identical_features(self):
        data = [LabeledPoint(np.array([1.0, 1.0]), "A" if i < 5 else "B") for i in range(8)]
        m = train_binary(data, KernelSpec("linear"), C=1.0)
        X = np.stack([p.features for p in data])
        acc = accuracy(m.predict(X), [p.label for p in data])
        assert acc <= 0.5 + abs(5 - 3) / 8

    def test_single_class_rejected(self):
        with pytest.raises(TrainingError):
            train_binary([LabeledPoint(np.array([0.0]), "A")] * 3, KernelSpec("linear"))

    def test_empty_rejected(self):
        with pytest.raises(TrainingError):
            train_binary([], KernelSpec("linear"))

    def test_order_permutation_does_not_change_predictions(self):
        X, labels = make_blobs(seed=2)
        data = points_from(X, labels)
        rng = np.random.default_rng(0)
        test = rng.normal(2.0, 2.0, (50, 2))
        base = train_binary(data, KernelSpec("linear"), C=10.0).predict(test)
        for seed in range(3):
            perm = np.random.default_rng(seed).permutation(len(data))
            shuffled = [data[i] for i in perm]
            assert train_binary(shuffled, KernelSpec("linear"), C=10.0).predict(test) == base


class TestDecisionValue:
    def test_no_support_vectors_returns_bias(self):
        m = SvmModel(
            support_vectors=np.empty((0, 2)),
            alpha=np.empty(0),
            bias=1.5,
            kernel=KernelSpec("linear"),
            class_pair=("A", "B"),
        )
        assert decision_value(m, [3.0, 4.0]) == 1.5

    def test_label_flip_negates_decision(self):
        X, labels = make_blobs(seed=3)
        m = train_binary(points_from(X, labels), KernelSpec("linear"), C=10.0)
        flipped = SvmModel(
            support_vectors=m.support_vectors,
            alpha=-m.alpha,
            bias=-m.bias,
            kernel=m.kernel,
            class_pair=(m.class_pair[1], m.class_pair[0]),
        )
        v = np.array([1.0, 2.0])
        assert decision_value(flipped, v) == pytest.approx(-decision_value(m, v))

    def test_dimension_mismatch(self):
        m = train_binary(TWO_POINTS, KernelSpec("linear"), C=1.0)
        with pytest.raises(TrainingError):
            decision_value(m, [1.0, 2.0])


class TestMulticlass:
    def test_two_classes_reduce_to_binary(self):
        X, labels = make_blobs(seed=4)
        data = points_from(X, labels)
        binary = train_binary(data, KernelSpec("linear"), C=10.0)
        multi = train_multiclass(data, KernelSpec("linear"), C=10.0)
        test = np.random.default_rng(1).normal(2.0, 3.0, (80, 2))
        assert multi.predict(test) == binary.predict(test)

    def test_three_blobs_full_accuracy(self):
        X, labels = make_blobs(seed=5, centers=((0, 0), (5, 0), (0, 5)))
        multi = train_multiclass(points_from(X, labels), KernelSpec("linear"), C=10.0)
        assert len(multi.models) == 3
        assert accuracy(multi.predict(X), labels) == 1.0

    def test_single_class_rejected(self):
        with pytest.raises(TrainingError):
            train_multiclass([LabeledPoint(np.array([0.0]), "A")] * 4, KernelSpec("linear"))

    def test_gaussian_rescaling_keeps_predictions(self):
        X, labels = make_blobs(seed=6, n_per_class=30)
        data = points_from(X, labels)
        test = np.random.default_rng(2).normal(2.0, 3.0, (200, 2))
        base = train_binary(data, KernelSpec("gaussian", sigma=2.0), C=10.0).predict(test)
        scaled_kernel = KernelSpec("gaussian", sigma=2.0, scale=7.3)
        scaled = train_binary(data, scaled_kernel, C=10.0).predict(test)
        assert scaled == base


class TestAccuracy:
    def test_two_thirds(self):
        assert accuracy([1, 1, 0], [1, 0, 0]) == pytest.approx(2 / 3)

    def test_identical_is_one(self):
        assert accuracy(["x", "y"], ["x", "y"]) == 1.0

    def test_disjoint_is_zero(self):
        assert accuracy([1, 1], [2, 2]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(TrainingError):
            accuracy([1], [1, 2])

    def test_empty(self):
        with pytest.raises(TrainingError):
            accuracy([], [])


class TestKfold:
    def test_separable_mean_one(self):
        X, labels = make_blobs(seed=7)
        result = kfold_cross_validate(points_from(X, labels), KernelSpec("linear"), C=10.0, k=4, seed=0)
        assert result.mean_accuracy == 1.0
        assert result.stratified

    def test_leave_one_out_fold_count(self):
        X, labels = make_blobs(seed=8, n_per_class=6)
        result = kfold_cross_validate(points_from(X, labels), KernelSpec("linear"), C=10.0, k=12, seed=0)
        assert len(result.fold_accuracies) == 12

    def test_random_labels_near_chance(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(200, 2))
        labels = ["A" if v < 0.5 else "B" for v in rng.uniform(size=200)]
        result = kfold_cross_validate(points_from(X, labels), KernelSpec("linear"), C=1.0, k=5, seed=0)
        assert abs(result.mean_accuracy - 0.5) <= 0.12

    def test_tiny_class_degrades_to_unstratified(self):
        X, labels = make_blobs(seed=10, n_per_class=10)
        data = points_from(X, labels) + [LabeledPoint(np.array([9.0, 9.0]), "A")]
        # class census: A=11, B=10, plus a singleton class C
        data.append(LabeledPoint(np.array([-9.0, -9.0]), "C"))
        data.append(LabeledPoint(np.array([-9.0, -8.0]), "C"))
        labels3 = [p.label for p in data]
        from entropic.svm import stratified_folds

        folds, stratified = stratified_folds(labels3, k=3, seed=0)
        assert stratified  # two C points is still enough
        data.append(LabeledPoint(np.array([-9.0, -7.0]), "D"))
        folds, stratified = stratified_folds([p.label for p in data], k=3, seed=0)
        assert not stratified  # singleton class D

    def test_k_larger_than_dataset_rejected(self):
        with pytest.raises(TrainingError):
            kfold_cross_validate(TWO_POINTS, KernelSpec("linear"), k=3)


class TestSelectBestKernel:
    def test_xor_prefers_polynomial(self):
        rng = np.random.default_rng(11)
        centers = [((0, 0), "A"), ((1, 1), "A"), ((0, 1), "B"), ((1, 0), "B")]
        X, labels = [], []
        for (cx, cy), lab in centers:
            X.append(rng.normal((cx, cy), 0.08, (15, 2)))
            labels.extend([lab] * 15)
        data = points_from(np.vstack(X), labels)
        result = select_best_kernel(
            data,
            kernels=[KernelSpec("linear"), KernelSpec("polynomial", degree=2, offset=1.0)],
            Cs=(10.0,),
            k=4,
            seed=0,
        )
        assert result.kernel.family == "polynomial"

    def test_single_cell_grid(self):
        result = select_best_kernel(
            TWO_POINTS * 3, kernels=[KernelSpec("linear")], Cs=(1.0,), k=2, seed=0
        )
        assert result.kernel.family == "linear"
        assert len(result.table) == 1

    def test_linear_wins_ties_on_separable_data(self):
        X, labels = make_blobs(seed=12)
        result = select_best_kernel(points_from(X, labels), Cs=(10.0,), k=3, seed=0)
        assert result.mean_accuracy == 1.0
        assert result.kernel.family == "linear"  # first in grid order among ties

    def test_empty_grid_rejected(self):
        with pytest.raises(TrainingError):
            select_best_kernel(TWO_POINTS * 3, kernels=[], Cs=(1.0,))


class TestModelSerialization:
    def test_round_trip_decision_values(self):
        X, labels = make_blobs(seed=13)
        m = train_binary(points_from(X, labels), KernelSpec("gaussian", sigma=1.7), C=3.0)
        restored = SvmModel.from_json(m.to_json())
        test = np.random.default_rng(3).normal(2.0, 3.0, (40, 2))
        assert np.allclose(m.decision_values(test), restored.decision_values(test), atol=1e-12)
        assert restored.class_pair == m.class_pair

    def test_version_check(self):
        m = train_binary(TWO_POINTS, KernelSpec("linear"), C=1.0)
        doc = m.to_json().replace('"version": 1', '"version": 99')
        with pytest.raises(TrainingError):
            SvmModel.from_json(doc)
