import json

import numpy as np
import pytest

from cebread.errors import ModelError
from cebread.features import FeatureMatrix, FeatureVector, standardize
from cebread.models import (
    ForestParams,
    LogRegParams,
    SvmParams,
    TrainedModel,
    fit_forest,
    gini,
    load_model,
    make_params,
    mdi_importance,
    model_from_dict,
    model_to_dict,
    predict,
    predict_many,
    save_model,
    train,
    train_tree,
)
from cebread.models.forest import ForestClassifier, TreeNode, DecisionTree
from cebread.models.logreg import LogisticModel, fit_logreg
from cebread.models.svm import LinearBinarySvm, fit_svm, resolve_gamma
from cebread.seeding import rng_for

from oracles import (
    oracle_axis_separable,
    oracle_best_split,
    oracle_stump_accuracy,
)


def matrix_from(X, labels, prefix="f"):
    X = np.asarray(X, dtype=float)
    return FeatureMatrix(
        doc_ids=tuple(f"d{i}" for i in range(X.shape[0])),
        schema=tuple(f"{prefix}{j}" for j in range(X.shape[1])),
        X=X,
        labels=np.asarray(labels, dtype=int),
    )


def blobs(centers, labels, n_per, spread, seed=0):
    rng = np.random.default_rng(seed)
    rows, y = [], []
    for center, label in zip(centers, labels):
        for _ in range(n_per):
            rows.append(np.asarray(center, dtype=float) + rng.normal(0, spread, len(center)))
            y.append(label)
    return matrix_from(np.array(rows), y)


def xor_matrix(n_per=10, jitter=0.05, seed=5):
    rng = np.random.default_rng(seed)
    rows, y = [], []
    for cx, cy, label in [(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 1)]:
        for _ in range(n_per):
            rows.append([cx + rng.uniform(-jitter, jitter), cy + rng.uniform(-jitter, jitter)])
            y.append(label)
    return matrix_from(np.array(rows), y)


def train_accuracy(model, matrix):
    return float((predict_many(model, matrix) == matrix.labels).mean())


class TestGini:
    def test_three_way_even(self):
        assert gini([2, 2, 2]) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_pure(self):
        assert gini([5, 0, 0]) == 0.0

    def test_analytic(self):
        assert gini([3, 1, 0]) == pytest.approx(0.375, abs=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(ModelError):
            gini([0, 0, 0])

    def test_negative_rejected(self):
        with pytest.raises(ModelError):
            gini([2, -1])


class TestTreeGrowing:
    def test_one_dimensional_split(self):
        X = np.array([[1.0], [2.0], [9.0], [10.0]])
        tree = train_tree(X, [0, 0, 1, 1], 2, "all", None, rng_for(0))
        assert tree.root.feature == 0
        assert tree.root.threshold == 5.5
        assert tree.root.left.is_leaf and tree.root.right.is_leaf
        assert list(tree.predict_class_index(X)) == [0, 0, 1, 1]
        gain, feature, threshold = oracle_best_split(X.tolist(), [0, 0, 1, 1])
        assert tree.root.gain == pytest.approx(gain, abs=1e-12)
        assert (tree.root.feature, tree.root.threshold) == (feature, threshold)

    def test_pure_root_stays_leaf(self):
        X = np.array([[1.0], [2.0], [3.0]])
        tree = train_tree(X, [0, 0, 0], 1, "all", None, rng_for(0))
        assert tree.root.is_leaf

    def test_constant_features_stay_leaf(self):
        X = np.ones((6, 3))
        tree = train_tree(X, [0, 1, 0, 1, 0, 1], 2, "all", None, rng_for(0))
        assert tree.root.is_leaf

    def test_root_gain_matches_exhaustive_search(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            n = rng.integers(4, 20)
            d = rng.integers(1, 4)
            X = rng.integers(0, 5, size=(n, d)).astype(float)
            y = rng.integers(0, 3, size=n)
            tree = train_tree(X, y, 3, "all", 1, rng_for(0))
            best = oracle_best_split(X.tolist(), y.tolist())
            if tree.root.is_leaf:
                assert best is None or best[0] <= 1e-9
            else:
                assert tree.root.gain == pytest.approx(best[0], abs=1e-9)

    def test_depth_limit_respected(self):
        matrix = blobs([(0, 0), (4, 0), (0, 4)], [1, 2, 3], 15, 1.0, seed=3)
        tree = train_tree(matrix.X, np.searchsorted((1, 2, 3), matrix.labels), 3, "all", 2, rng_for(0))

        def depth(node):
            if node.is_leaf:
                return 0
            return 1 + max(depth(node.left), depth(node.right))

        assert depth(tree.root) <= 2

    def test_every_recorded_split_has_positive_gain(self):
        matrix = blobs([(0, 0), (2, 1), (1, 3)], [1, 2, 3], 20, 0.9, seed=9)
        tree = train_tree(matrix.X, np.searchsorted((1, 2, 3), matrix.labels), 3, "all", None, rng_for(1))
        stack = [tree.root]
        seen_split = False
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            seen_split = True
            assert node.gain > 0
            assert node.left.n_samples + node.right.n_samples == node.n_samples
            stack.extend([node.left, node.right])
        assert seen_split


class TestXorDepthBound:
    def test_depth_one_tree_bounded_by_stump_oracle(self):
        matrix = xor_matrix()
        y_idx = np.searchsorted((1, 2), matrix.labels)
        bound = oracle_stump_accuracy(matrix.X.tolist(), matrix.labels.tolist())
        assert bound <= 0.75
        tree = train_tree(matrix.X, y_idx, 2, "all", 1, rng_for(0))
        pred = np.asarray((1, 2))[tree.predict_class_index(matrix.X)]
        assert float((pred == matrix.labels).mean()) <= bound

    def test_deep_forest_beats_stumps(self):
        matrix = xor_matrix()
        shallow = train("rforest", matrix, ForestParams(n_estimators=25, max_features="all", max_depth=1, seed=0))
        deep = train("rforest", matrix, ForestParams(n_estimators=25, max_features="all", max_depth=20, seed=0))
        acc_shallow = train_accuracy(shallow, matrix)
        acc_deep = train_accuracy(deep, matrix)
        assert acc_deep == 1.0
        assert acc_shallow <= 0.75
        assert acc_shallow < acc_deep


class TestForest:
    def test_majority_vote(self):
        def leaf_tree(class_idx):
            counts = np.zeros(3)
            counts[class_idx] = 5
            return DecisionTree(root=TreeNode(counts=counts, n_samples=5), n_features=1, n_classes=3)

        forest = ForestClassifier(trees=[leaf_tree(0), leaf_tree(0), leaf_tree(2)], n_classes=3)
        model = TrainedModel(
            kind="rforest", params=ForestParams(), schema=("f0",), classes=(1, 2, 3), inner=forest, stats=None
        )
        assert predict(model, FeatureVector(("f0",), np.array([0.0]))) == 1

    def test_tie_breaks_to_lowest_label(self):
        def leaf_tree(class_idx):
            counts = np.zeros(3)
            counts[class_idx] = 5
            return DecisionTree(root=TreeNode(counts=counts, n_samples=5), n_features=1, n_classes=3)

        forest = ForestClassifier(trees=[leaf_tree(0), leaf_tree(2)], n_classes=3)
        model = TrainedModel(
            kind="rforest", params=ForestParams(), schema=("f0",), classes=(1, 2, 3), inner=forest, stats=None
        )
        assert predict(model, FeatureVector(("f0",), np.array([0.0]))) == 1

    def test_seed_makes_forests_reproducible(self):
        matrix = blobs([(0, 0), (3, 1), (1, 4)], [1, 2, 3], 20, 1.0, seed=2)
        probe = np.random.default_rng(0).normal(0, 2, size=(25, 2))
        probe_matrix = matrix_from(probe, np.ones(25))
        a = train("rforest", matrix, ForestParams(n_estimators=15, seed=42))
        b = train("rforest", matrix, ForestParams(n_estimators=15, seed=42))
        assert np.array_equal(predict_many(a, probe_matrix), predict_many(b, probe_matrix))

    def test_bootstrap_indices_are_per_tree(self):
        matrix = blobs([(0, 0), (3, 1)], [1, 2], 15, 1.0, seed=4)
        model = train("rforest", matrix, ForestParams(n_estimators=5, seed=0))
        baggings = [tuple(t.bootstrap_indices) for t in model.inner.trees]
        assert len(set(baggings)) == 5
        for bag in baggings:
            assert len(bag) == matrix.n_rows

    def test_forest_train_accuracy_beats_single_tree_oob_on_average(self):
        matrix = blobs([(0, 0), (3, 0), (0, 3)], [1, 2, 3], 20, 0.9, seed=6)
        y_idx = np.searchsorted((1, 2, 3), matrix.labels)
        forest_accs, oob_accs = [], []
        for seed in range(10):
            model = train("rforest", matrix, ForestParams(n_estimators=20, max_depth=None, seed=seed))
            forest_accs.append(train_accuracy(model, matrix))
            for tree in model.inner.trees:
                mask = np.ones(matrix.n_rows, dtype=bool)
                mask[tree.bootstrap_indices] = False
                if not mask.any():
                    continue
                pred = tree.predict_class_index(matrix.X[mask])
                oob_accs.append(float((pred == y_idx[mask]).mean()))
        assert np.mean(forest_accs) >= np.mean(oob_accs)


class TestMdiImportance:
    def test_single_informative_feature_takes_everything(self):
        rng = np.random.default_rng(0)
        x0 = np.concatenate([rng.normal(0, 0.2, 20), rng.normal(4, 0.2, 20)])
        X = np.column_stack([x0, np.full(40, 7.0)])
        matrix = matrix_from(X, [1] * 20 + [2] * 20)
        model = train("rforest", matrix, ForestParams(n_estimators=10, max_features="all", seed=0))
        imp = mdi_importance(model)
        assert imp.values[0] == 1.0
        assert imp.values[1] == 0.0

    def test_no_possible_splits_gives_zeros(self):
        matrix = matrix_from(np.ones((8, 2)), [1, 2] * 4)
        model = train("rforest", matrix, ForestParams(n_estimators=5, seed=0))
        imp = mdi_importance(model)
        assert np.array_equal(imp.values, np.zeros(2))

    def test_noise_below_informative_across_seeds(self):
        rng = np.random.default_rng(1)
        signal = np.concatenate([rng.normal(0, 0.3, 30), rng.normal(2, 0.3, 30), rng.normal(4, 0.3, 30)])
        noise = rng.uniform(0, 4, 90)
        matrix = matrix_from(np.column_stack([signal, noise]), [1] * 30 + [2] * 30 + [3] * 30)
        for seed in range(10):
            model = train(
                "rforest", matrix, ForestParams(n_estimators=20, max_features="all", max_depth=5, seed=seed)
            )
            imp = mdi_importance(model)
            assert imp.values[0] > imp.values[1]

    def test_importances_sum_to_one_when_any_split_exists(self):
        matrix = blobs([(0, 0, 1), (3, 1, 0)], [1, 2], 20, 0.8, seed=8)
        model = train("rforest", matrix, ForestParams(n_estimators=10, seed=3))
        imp = mdi_importance(model)
        assert float(imp.values.sum()) == pytest.approx(1.0, abs=1e-12)
        assert np.all(imp.values >= 0)

    def test_rejected_for_other_kinds(self):
        matrix = blobs([(0,), (3,)], [1, 2], 10, 0.5, seed=0)
        model = train("logreg", matrix, LogRegParams(max_iter=50))
        with pytest.raises(ModelError):
            mdi_importance(model)


class TestLogreg:
    def test_loss_history_never_increases(self):
        matrix = blobs([(0, 0), (2, 1), (0, 3)], [1, 2, 3], 15, 0.8, seed=1)
        for penalty in ("l1", "l2"):
            model = train("logreg", matrix, LogRegParams(penalty=penalty, C=1.0, max_iter=200))
            history = model.inner.loss_history
            assert len(history) > 2
            assert all(b <= a for a, b in zip(history, history[1:]))

    def test_separable_two_class_fits_perfectly(self):
        matrix = blobs([(-2, 0), (2, 0)], [1, 2], 15, 0.3, seed=2)
        model = train("logreg", matrix, LogRegParams(C=10.0, max_iter=500))
        assert train_accuracy(model, matrix) == 1.0

    def test_three_class_blobs(self):
        matrix = blobs([(0, 0), (4, 0), (0, 4)], [1, 2, 3], 15, 0.4, seed=3)
        model = train("logreg", matrix, LogRegParams(C=10.0, max_iter=500))
        assert train_accuracy(model, matrix) == 1.0

    def test_huge_penalty_predicts_majority(self):
        X = np.random.default_rng(4).normal(0, 1, size=(30, 2))
        labels = np.array([1] * 10 + [2] * 14 + [3] * 6)
        matrix = matrix_from(X, labels)
        for penalty in ("l1", "l2"):
            model = train("logreg", matrix, LogRegParams(penalty=penalty, C=1e-9, max_iter=300))
            assert float(np.abs(model.inner.weights).max()) < 1e-3
            probe = matrix_from(np.random.default_rng(5).normal(0, 3, size=(10, 2)), np.ones(10))
            assert list(predict_many(model, probe)) == [2] * 10

    def test_l1_huge_penalty_weights_exactly_zero(self):
        matrix = blobs([(-1, 0), (1, 0)], [1, 2], 10, 0.4, seed=6)
        model = train("logreg", matrix, LogRegParams(penalty="l1", C=1e-9, max_iter=100))
        assert np.all(model.inner.weights == 0.0)

    def test_l1_zeroes_noise_columns(self):
        rng = np.random.default_rng(7)
        signal = np.concatenate([rng.normal(-2, 0.3, 20), rng.normal(2, 0.3, 20)])
        X = np.column_stack([signal, rng.normal(0, 1, 40), rng.normal(0, 1, 40)])
        matrix = matrix_from(X, [1] * 20 + [2] * 20)
        model = train("logreg", matrix, LogRegParams(penalty="l1", C=0.2, max_iter=400))
        weights = model.inner.weights
        assert np.all(weights[:, 1:] == 0.0)
        assert np.all(weights[:, 0] != 0.0)
        assert train_accuracy(model, matrix) == 1.0

    def test_zero_weights_tie_to_lowest_class(self):
        inner = LogisticModel(weights=np.zeros((3, 2)), bias=np.zeros(3))
        model = TrainedModel(
            kind="logreg", params=LogRegParams(), schema=("f0", "f1"), classes=(1, 2, 3), inner=inner, stats=None
        )
        assert predict(model, FeatureVector(("f0", "f1"), np.array([0.3, -4.0]))) == 1

    def test_training_is_deterministic(self):
        matrix = blobs([(0, 0), (2, 2)], [1, 2], 12, 0.5, seed=8)
        a = train("logreg", matrix, LogRegParams(max_iter=150))
        b = train("logreg", matrix, LogRegParams(max_iter=150))
        assert np.array_equal(a.inner.weights, b.inner.weights)
        assert np.array_equal(a.inner.bias, b.inner.bias)


class TestSvm:
    def test_linear_on_axis_separable_data(self):
        matrix = blobs([(-2, 0), (2, 0)], [1, 2], 15, 0.3, seed=1)
        assert oracle_axis_separable(matrix.X.tolist(), matrix.labels.tolist())
        model = train("svm", matrix, SvmParams(kernel="linear", C=1.0, max_iter=1000))
        assert train_accuracy(model, matrix) == 1.0

    def test_linear_three_class_blobs(self):
        matrix = blobs([(0, 0), (5, 0), (0, 5)], [1, 2, 3], 15, 0.4, seed=2)
        model = train("svm", matrix, SvmParams(kernel="linear", C=1.0, max_iter=2000))
        assert train_accuracy(model, matrix) == 1.0

    def test_rbf_solves_concentric_rings(self):
        rng = np.random.default_rng(3)
        inner_angle = rng.uniform(0, 2 * np.pi, 25)
        outer_angle = rng.uniform(0, 2 * np.pi, 25)
        inner_r = rng.uniform(0.0, 0.5, 25)
        outer_r = rng.uniform(1.5, 2.0, 25)
        X = np.concatenate(
            [
                np.column_stack([inner_r * np.cos(inner_angle), inner_r * np.sin(inner_angle)]),
                np.column_stack([outer_r * np.cos(outer_angle), outer_r * np.sin(outer_angle)]),
            ]
        )
        matrix = matrix_from(X, [1] * 25 + [2] * 25)
        rbf = train("svm", matrix, SvmParams(kernel="rbf", C=10.0, max_iter=5000))
        linear = train("svm", matrix, SvmParams(kernel="linear", C=10.0, max_iter=2000))
        rbf_acc = train_accuracy(rbf, matrix)
        assert rbf_acc >= 0.95
        assert rbf_acc > train_accuracy(linear, matrix)

    def test_equal_decisions_tie_to_lowest(self):
        machines = [LinearBinarySvm(w=np.zeros(2), b=0.0) for _ in range(3)]
        from cebread.models.svm import OvrSvm

        inner = OvrSvm(machines=machines)
        model = TrainedModel(
            kind="svm", params=SvmParams(), schema=("f0", "f1"), classes=(1, 2, 3), inner=inner, stats=None
        )
        assert predict(model, FeatureVector(("f0", "f1"), np.array([1.0, -1.0]))) == 1

    def test_gamma_scale_formula(self):
        X = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
        assert resolve_gamma("scale", X) == pytest.approx(1.0 / (2 * X.var()), abs=1e-15)

    def test_gamma_must_be_positive(self):
        with pytest.raises(ModelError):
            resolve_gamma(-0.5, np.ones((3, 2)))

    def test_rbf_iteration_cap_sets_flag(self):
        matrix = blobs([(0, 0), (1, 1)], [1, 2], 20, 0.8, seed=5)
        std, _ = standardize(matrix)
        capped = fit_svm(std.X, np.searchsorted((1, 2), matrix.labels), 2, "rbf", 1.0, "scale", 1)
        assert capped.converged is False

    def test_training_is_deterministic(self):
        matrix = blobs([(0, 0), (2, 2), (4, 0)], [1, 2, 3], 12, 0.6, seed=6)
        probe = matrix_from(np.random.default_rng(7).normal(1, 2, size=(20, 2)), np.ones(20))
        for kernel in ("linear", "rbf"):
            a = train("svm", matrix, SvmParams(kernel=kernel, max_iter=500))
            b = train("svm", matrix, SvmParams(kernel=kernel, max_iter=500))
            assert np.array_equal(predict_many(a, probe), predict_many(b, probe))


class TestTrainPredictContract:
    def test_single_class_rejected(self):
        matrix = matrix_from(np.random.default_rng(0).normal(0, 1, (10, 2)), np.ones(10))
        with pytest.raises(ModelError):
            train("logreg", matrix)

    def test_unknown_kind_rejected(self):
        matrix = blobs([(0,), (2,)], [1, 2], 5, 0.2, seed=0)
        with pytest.raises(ModelError):
            train("boosting", matrix)

    def test_params_kind_mismatch_rejected(self):
        matrix = blobs([(0,), (2,)], [1, 2], 5, 0.2, seed=0)
        with pytest.raises(ModelError):
            train("svm", matrix, ForestParams())

    def test_schema_mismatch_at_predict(self):
        matrix = blobs([(0, 0), (2, 2)], [1, 2], 8, 0.3, seed=1)
        model = train("rforest", matrix, ForestParams(n_estimators=3, seed=0))
        with pytest.raises(ModelError):
            predict(model, FeatureVector(("other", "names"), np.array([0.0, 1.0])))
        with pytest.raises(ModelError):
            predict_many(model, matrix_from(matrix.X, matrix.labels, prefix="g"))

    def test_predicts_only_trained_classes(self):
        matrix = blobs([(0, 0), (4, 4)], [2, 3], 10, 0.4, seed=2)
        model = train("rforest", matrix, ForestParams(n_estimators=9, seed=1))
        probe = matrix_from(np.random.default_rng(3).normal(2, 3, (30, 2)), np.ones(30))
        assert set(predict_many(model, probe)) <= {2, 3}

    def test_make_params_rejects_unknown_keys(self):
        with pytest.raises(ModelError):
            make_params("rforest", {"trees": 5})
        with pytest.raises(ModelError):
            make_params("nope", {})

    def test_hyperparameter_ranges(self):
        with pytest.raises(ModelError):
            LogRegParams(C=0.0)
        with pytest.raises(ModelError):
            LogRegParams(penalty="elastic")
        with pytest.raises(ModelError):
            LogRegParams(penalty="l1", optimizer="gradient-descent")
        with pytest.raises(ModelError):
            SvmParams(kernel="poly")
        with pytest.raises(ModelError):
            SvmParams(gamma=-2.0)
        with pytest.raises(ModelError):
            ForestParams(n_estimators=0)
        with pytest.raises(ModelError):
            ForestParams(max_depth=0)
        with pytest.raises(ModelError):
            ForestParams(max_features="auto")
        assert ForestParams(max_depth=None).max_depth is None

    def test_standardization_internal_to_linear_models(self):
        matrix = blobs([(0, 0), (300, 5)], [1, 2], 12, (1.0), seed=4)
        model = train("logreg", matrix, LogRegParams(max_iter=200))
        assert model.stats is not None
        forest = train("rforest", matrix, ForestParams(n_estimators=3, seed=0))
        assert forest.stats is None

    def test_prestandardized_training_gives_same_predictions(self):
        matrix = blobs([(0, 0), (40, 3), (10, 30)], [1, 2, 3], 12, 2.0, seed=5)
        std_matrix, _ = standardize(matrix)
        for kind, params in (
            ("logreg", LogRegParams(max_iter=200)),
            ("svm", SvmParams(kernel="linear", max_iter=500)),
        ):
            raw_model = train(kind, matrix, params)
            std_model = train(kind, std_matrix, params)
            assert np.array_equal(
                predict_many(raw_model, matrix), predict_many(std_model, std_matrix)
            )


class TestSerialization:
    def roundtrip(self, model, tmp_path, name):
        path = tmp_path / f"{name}.json"
        save_model(model, path)
        return load_model(path)

    def test_predictions_survive_roundtrip(self, tmp_path):
        matrix = blobs([(0, 0), (3, 1), (1, 4)], [1, 2, 3], 15, 0.8, seed=1)
        probe = matrix_from(np.random.default_rng(2).normal(1, 3, size=(40, 2)), np.ones(40))
        for kind, params in (
            ("logreg", LogRegParams(max_iter=150)),
            ("svm", SvmParams(kernel="linear", max_iter=400)),
            ("svm", SvmParams(kernel="rbf", max_iter=2000)),
            ("rforest", ForestParams(n_estimators=12, seed=3)),
        ):
            model = train(kind, matrix, params)
            restored = self.roundtrip(model, tmp_path, f"{kind}-{getattr(params, 'kernel', '')}")
            assert restored.kind == model.kind
            assert restored.schema == model.schema
            assert restored.classes == model.classes
            assert np.array_equal(predict_many(model, probe), predict_many(restored, probe))
            assert np.array_equal(predict_many(model, matrix), predict_many(restored, matrix))

    def test_logreg_weights_exact(self, tmp_path):
        matrix = blobs([(0, 0), (2, 2)], [1, 2], 10, 0.5, seed=3)
        model = train("logreg", matrix, LogRegParams(max_iter=100))
        restored = self.roundtrip(model, tmp_path, "exact")
        assert np.array_equal(model.inner.weights, restored.inner.weights)
        assert np.array_equal(model.inner.bias, restored.inner.bias)

    def test_forest_thresholds_exact(self, tmp_path):
        matrix = blobs([(0, 0), (1, 1)], [1, 2], 15, 0.4, seed=4)
        model = train("rforest", matrix, ForestParams(n_estimators=5, seed=5))
        restored = self.roundtrip(model, tmp_path, "forest")

        def collect(node, out):
            if node.is_leaf:
                return out
            out.append((node.feature, node.threshold, node.gain))
            collect(node.left, out)
            collect(node.right, out)
            return out

        for original, loaded in zip(model.inner.trees, restored.inner.trees):
            assert collect(original.root, []) == collect(loaded.root, [])

    def test_unsupported_version_rejected(self):
        matrix = blobs([(0,), (2,)], [1, 2], 6, 0.2, seed=0)
        payload = model_to_dict(train("rforest", matrix, ForestParams(n_estimators=2, seed=0)))
        payload["format_version"] = 99
        with pytest.raises(ModelError):
            model_from_dict(payload)

    def test_unreadable_file_rejected(self, tmp_path):
        bad = tmp_path / "model.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(ModelError):
            load_model(bad)
        with pytest.raises(ModelError):
            load_model(tmp_path / "missing.json")

    def test_hyperparameters_roundtrip(self, tmp_path):
        matrix = blobs([(0,), (2,)], [1, 2], 6, 0.2, seed=1)
        model = train(
            "rforest", matrix, ForestParams(n_estimators=4, max_features="log2", max_depth=None, seed=9)
        )
        restored = self.roundtrip(model, tmp_path, "hp")
        assert restored.params == model.params
        raw = json.loads((tmp_path / "hp.json").read_text(encoding="utf-8"))
        assert raw["hyperparameters"]["max_depth"] is None
