"""Dataset and base-learner tests: drop semantics, simplex outputs,
determinism, SGD convergence on separable data, and the gradient check."""

import numpy as np
import pytest

from stable_selection.learners import (
    LabeledDataset,
    fit_multinomial_logistic,
    fit_nearest_centroid,
    load_csv,
    make_gaussian_mixture,
    softmax,
    softmax_cross_entropy,
)


def simple_data():
    return LabeledDataset(
        features=np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]),
        labels=np.array([1, 2, 2]),
        num_classes=3,
    )


class TestLabeledDataset:
    def test_validation(self):
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((2, 2)), np.array([1, 4]), num_classes=3)
        with pytest.raises(ValueError):
            LabeledDataset(np.array([[np.inf, 0.0]]), np.array([1]), num_classes=1)
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((0, 2)), np.array([]), num_classes=2)

    def test_arrays_immutable(self):
        data = simple_data()
        with pytest.raises(ValueError):
            data.features[0, 0] = 9.0

    def test_drop_keeps_order_and_class_count(self):
        data = simple_data()
        left = data.drop(1)
        np.testing.assert_array_equal(left.labels, [1, 2])
        np.testing.assert_array_equal(left.features[1], [2.0, 2.0])
        assert left.num_classes == 3  # declared, not inferred

    def test_drop_two_rows(self):
        data = simple_data()
        twice = data.drop(1).drop(1)  # removes original rows 1 then 2
        np.testing.assert_array_equal(twice.features, [[0.0, 0.0]])

    def test_drop_from_pair(self):
        data = LabeledDataset(np.array([[1.0], [2.0]]), np.array([1, 2]), num_classes=2)
        np.testing.assert_array_equal(data.drop(0).features, [[2.0]])

    def test_drop_single_row_rejected(self):
        data = LabeledDataset(np.array([[1.0]]), np.array([1]), num_classes=1)
        with pytest.raises(ValueError):
            data.drop(0)


class TestNearestCentroid:
    def test_single_class_point_dominates_everywhere(self):
        data = LabeledDataset(np.array([[1.0, 0.0]]), np.array([1]), num_classes=3)
        scorer = fit_nearest_centroid(data, 0, temperature=1.0)
        for x in ([0.0, 0.0], [5.0, 5.0], [-3.0, 1.0]):
            scores = scorer(np.asarray(x))
            # classes 2 and 3 share the global-mean centroid, class 1 owns it too
            assert scores[0] >= scores.max() - 1e-12

    def test_mirrored_classes_tie_at_origin(self):
        data = LabeledDataset(
            np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1, 2]), num_classes=2
        )
        scorer = fit_nearest_centroid(data, 0, temperature=1.0)
        np.testing.assert_allclose(scorer(np.zeros(2)), [0.5, 0.5], atol=1e-12)

    def test_outputs_on_simplex_with_absent_class(self):
        data = LabeledDataset(
            np.array([[0.0, 1.0], [0.2, 0.8]]), np.array([1, 1]), num_classes=4
        )
        scores = fit_nearest_centroid(data, 0)(np.array([0.1, 0.9]))
        assert np.all(scores > 0)
        assert scores.sum() == pytest.approx(1.0, abs=1e-9)

    def test_deterministic(self):
        data = make_gaussian_mixture(50, 3, 3, overlap=0.4, seed=1)
        grid = np.random.default_rng(0).standard_normal((10, 3))
        np.testing.assert_array_equal(
            fit_nearest_centroid(data, 0)(grid), fit_nearest_centroid(data, 0)(grid)
        )


class TestMultinomialLogistic:
    def test_zero_epochs_is_uniform(self):
        data = simple_data()
        scores = fit_multinomial_logistic(data, seed=0, epochs=0)(np.array([0.3, 0.7]))
        np.testing.assert_allclose(scores, np.full(3, 1 / 3), atol=1e-9)

    def test_separable_data_reaches_full_accuracy(self):
        rng = np.random.default_rng(2)
        x1 = rng.normal(-2.0, 0.3, (10, 2))
        x2 = rng.normal(2.0, 0.3, (10, 2))
        data = LabeledDataset(
            np.vstack([x1, x2]), np.array([1] * 10 + [2] * 10), num_classes=2
        )
        scorer = fit_multinomial_logistic(data, seed=0, epochs=200, lr=0.5)
        predicted = np.argmax(scorer(data.features), axis=1) + 1
        assert np.mean(predicted == data.labels) == 1.0

    def test_deterministic_given_seed(self):
        data = make_gaussian_mixture(40, 3, 3, overlap=0.5, seed=3)
        grid = np.random.default_rng(1).standard_normal((5, 3))
        one = fit_multinomial_logistic(data, seed=9, epochs=3)(grid)
        two = fit_multinomial_logistic(data, seed=9, epochs=3)(grid)
        np.testing.assert_array_equal(one, two)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(4)
        h = 1e-6
        for _ in range(100):
            L, d = int(rng.integers(2, 6)), int(rng.integers(1, 5))
            W = rng.standard_normal((L, d))
            b = rng.standard_normal(L)
            x = rng.standard_normal(d)
            y = int(rng.integers(1, L + 1))
            _, grad_w, grad_b = softmax_cross_entropy(W, b, x, y)
            for idx in np.ndindex(L, d):
                Wp, Wm = W.copy(), W.copy()
                Wp[idx] += h
                Wm[idx] -= h
                numeric = (
                    softmax_cross_entropy(Wp, b, x, y)[0]
                    - softmax_cross_entropy(Wm, b, x, y)[0]
                ) / (2 * h)
                assert numeric == pytest.approx(
                    grad_w[idx], rel=1e-5, abs=1e-7
                )
            for k in range(L):
                bp, bm = b.copy(), b.copy()
                bp[k] += h
                bm[k] -= h
                numeric = (
                    softmax_cross_entropy(W, bp, x, y)[0]
                    - softmax_cross_entropy(W, bm, x, y)[0]
                ) / (2 * h)
                assert numeric == pytest.approx(grad_b[k], rel=1e-5, abs=1e-7)


class TestSyntheticData:
    def test_shapes_and_labels(self):
        data = make_gaussian_mixture(100, 5, 5, overlap=0.5, seed=0)
        assert data.features.shape == (100, 5)
        assert set(np.unique(data.labels)) <= set(range(1, 6))

    def test_zero_overlap_is_nearly_separable(self):
        data = make_gaussian_mixture(200, 5, 5, overlap=0.0, seed=1)
        scorer = fit_nearest_centroid(data, 0)
        predicted = np.argmax(scorer(data.features), axis=1) + 1
        assert np.mean(predicted == data.labels) > 0.99

    def test_requires_enough_dimensions(self):
        with pytest.raises(ValueError):
            make_gaussian_mixture(10, 2, 3, seed=0)

    def test_seeded(self):
        a = make_gaussian_mixture(30, 4, 3, seed=5)
        b = make_gaussian_mixture(30, 4, 3, seed=5)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)


class TestCsvIngestion:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x1,label,x2\n0.5,1,1.5\n-0.25,2,0.75\n")
        data = load_csv(path, "label")
        assert data.num_classes == 2
        np.testing.assert_allclose(data.features, [[0.5, 1.5], [-0.25, 0.75]])
        np.testing.assert_array_equal(data.labels, [1, 2])

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x1,x2\n0.5,1.5\n")
        with pytest.raises(ValueError):
            load_csv(path, "label")

    def test_bad_value_reports_line(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x1,label\n0.5,1\noops,2\n")
        with pytest.raises(ValueError, match="line 3"):
            load_csv(path, "label")


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(6)
    z = rng.standard_normal((20, 7)) * 30
    p = softmax(z, axis=1)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(p >= 0)
