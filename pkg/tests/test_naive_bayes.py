"""Gaussian Naive Bayes tests, including an independent posterior oracle."""

import math

import numpy as np
import pytest

from modules.errors import InputError
from modules.naive_bayes import (
    VAR_DELTA,
    VAR_EPSILON,
    GaussianNaiveBayes,
    NbModel,
    nb_fit,
    nb_predict,
    nb_predict_many,
)
from modules.training_set import LabeledSample, TrainingSet


def one_feature(groups):
    x, y = [], []
    for label, values in enumerate(groups):
        x += [[v] for v in values]
        y += [label] * len(values)
    return TrainingSet.from_arrays(x, y)


def oracle_class(model: NbModel, point) -> int:
    """Closed-form Gaussian posterior, scored one class at a time."""
    best, best_score = None, -math.inf
    for row, cls in enumerate(model.classes):
        score = math.log(model.priors[row])
        for f, value in enumerate(point):
            var = model.variances[row, f]
            score += -0.5 * math.log(2 * math.pi * var) - (value - model.means[row, f]) ** 2 / (2 * var)
        if score > best_score:
            best, best_score = int(cls), score
    return best


class TestFit:
    def test_closed_form_moments(self):
        model = nb_fit(one_feature([[1, 2, 3], [8, 9, 10]]))
        assert model.means[:, 0].tolist() == pytest.approx([2.0, 9.0])
        assert model.variances[:, 0].tolist() == pytest.approx([2 / 3, 2 / 3])
        assert model.priors.tolist() == pytest.approx([0.5, 0.5])

    def test_constant_class_gets_floor(self):
        data = one_feature([[4, 4, 4], [1, 7]])
        model = nb_fit(data)
        floor = VAR_EPSILON * data.features[:, 0].var() + VAR_DELTA
        assert model.variances[0, 0] == pytest.approx(floor, rel=1e-12)
        assert model.variances[0, 0] > 0

    def test_frequency_priors(self):
        model = nb_fit(one_feature([[1, 2, 3], [9]]))
        assert model.priors.tolist() == pytest.approx([0.75, 0.25])

    def test_priors_sum_to_one(self, rng):
        labels = rng.integers(0, 5, size=300)
        labels[:5] = np.arange(5)
        model = nb_fit(TrainingSet.from_arrays(rng.normal(size=(300, 4)), labels))
        assert abs(model.priors.sum() - 1.0) <= 1e-12

    def test_needs_two_classes(self):
        with pytest.raises(InputError):
            one_feature([[1, 2, 3]])

    def test_from_samples(self):
        samples = [LabeledSample((0.0, 1.0, 2.0, 3.0), 0), LabeledSample((1.0, 1.0, 2.0, 3.0), 1)]
        model = nb_fit(TrainingSet.from_samples(samples))
        assert model.n_features == 4


class TestPredict:
    def test_between_means(self):
        model = nb_fit(one_feature([[1, 2, 3], [8, 9, 10]]))
        label, scores = nb_predict(model, [2.5])
        assert label == 0
        assert scores[0] > scores[1]

    def test_at_own_mean(self):
        model = nb_fit(one_feature([[1, 2, 3], [8, 9, 10]]))
        assert nb_predict(model, [9.0])[0] == 1

    def test_identical_classes_tie_to_smaller_id(self):
        model = NbModel(np.array([0, 1]), np.array([0.5, 0.5]), np.ones((2, 2)), np.ones((2, 2)))
        assert nb_predict(model, [0.3, -2.0])[0] == 0
        assert nb_predict_many(model, np.zeros((3, 2))).tolist() == [0, 0, 0]

    def test_scores_match_formula(self):
        model = nb_fit(one_feature([[1, 2, 3], [8, 9, 10]]))
        _, scores = nb_predict(model, [2.5])
        var = 2 / 3
        expected = math.log(0.5) - 0.5 * math.log(2 * math.pi * var) - (2.5 - 2) ** 2 / (2 * var)
        assert scores[0] == pytest.approx(expected, rel=1e-12)

    def test_feature_count_checked(self):
        model = nb_fit(one_feature([[1, 2, 3], [8, 9, 10]]))
        with pytest.raises(InputError):
            nb_predict(model, [1.0, 2.0])

    def test_scores_finite_far_away(self):
        model = nb_fit(one_feature([[5, 5, 5], [6, 6, 6]]))
        scores = GaussianNaiveBayes.log_posteriors(model, np.array([[1e6], [-1e6], [5.5]]))
        assert np.all(np.isfinite(scores))

    def test_matches_oracle(self, rng):
        for _ in range(1000):
            classes = int(rng.integers(2, 5))
            model = NbModel(
                np.arange(classes),
                rng.dirichlet(np.ones(classes)),
                rng.normal(0.0, 3.0, size=(classes, 4)),
                rng.uniform(0.1, 4.0, size=(classes, 4)),
            )
            point = rng.normal(0.0, 4.0, size=4)
            assert nb_predict(model, point)[0] == oracle_class(model, point)

    def test_affine_invariance(self, rng):
        for _ in range(100):
            train_x = rng.normal(size=(60, 4)) + np.repeat(rng.normal(0, 2, size=(3, 4)), 20, axis=0)
            train_y = np.repeat(np.arange(3), 20)
            test_x = rng.normal(0.0, 2.0, size=(25, 4))
            scale = rng.uniform(0.1, 10.0, size=4)
            shift = rng.normal(0.0, 50.0, size=4)

            plain = nb_predict_many(nb_fit(TrainingSet.from_arrays(train_x, train_y)), test_x)
            moved = nb_predict_many(nb_fit(TrainingSet.from_arrays(train_x * scale + shift, train_y)), test_x * scale + shift)
            assert plain.tolist() == moved.tolist()

    def test_sample_order_does_not_matter(self, rng, make_blobs):
        data = make_blobs(rng)
        order = rng.permutation(len(data))
        queries = rng.normal(0.0, 6.0, size=(50, 4))
        a = nb_predict_many(nb_fit(data), queries)
        b = nb_predict_many(nb_fit(TrainingSet.from_arrays(data.features[order], data.labels[order])), queries)
        assert a.tolist() == b.tolist()
