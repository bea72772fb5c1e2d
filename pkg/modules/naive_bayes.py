"""
Gaussian Naive Bayes
Per-class feature Gaussians with frequency priors, scored in log space.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import InputError
from .training_set import TrainingSet

logger = logging.getLogger(__name__)

VAR_EPSILON = 1e-9
VAR_DELTA = 1e-12
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class NbModel:
    """Trained Gaussian NB state; rows follow `classes` in ascending id order."""

    classes: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


class GaussianNaiveBayes:
    """
    Gaussian Naive Bayes trainer.

    Variances use the population formula and are floored at
    epsilon * (feature variance over all training rows) + delta.
    """

    def __init__(self, epsilon: float = VAR_EPSILON, delta: float = VAR_DELTA):
        self.epsilon = epsilon
        self.delta = delta

    def fit(self, data: TrainingSet) -> NbModel:
        """
        Estimate priors, means and floored variances per class.

        Args:
            data: Labeled samples with at least two classes

        Returns:
            NbModel: Trained model
        """
        x, y = data.features, data.labels
        classes = np.array(data.present_classes, dtype=np.int64)
        floor = self.epsilon * x.var(axis=0) + self.delta

        priors = np.empty(len(classes))
        means = np.empty((len(classes), x.shape[1]))
        variances = np.empty_like(means)
        for row, cls in enumerate(classes):
            members = x[y == cls]
            if members.shape[0] == 0:
                raise InputError(f"Class {cls} has no samples")
            priors[row] = members.shape[0] / x.shape[0]
            means[row] = members.mean(axis=0)
            variances[row] = np.maximum(members.var(axis=0), floor)

        logger.info(f"✅ Naive Bayes trained on {len(data)} samples, {len(classes)} classes")
        return NbModel(classes, priors, means, variances)

    @staticmethod
    def log_posteriors(model: NbModel, x: np.ndarray) -> np.ndarray:
        """
        Unnormalized log-posterior per class.

        Args:
            model: Trained model
            x: Feature rows shaped (n, k)

        Returns:
            np.ndarray: Scores shaped (n, classes)
        """
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != model.n_features:
            raise InputError(f"Expected {model.n_features} features, got {x.shape[1]}")
        log_norm = -0.5 * np.sum(_LOG_2PI + np.log(model.variances), axis=1)
        deviation = (x[:, None, :] - model.means[None, :, :]) ** 2 / (2.0 * model.variances[None, :, :])
        return np.log(model.priors)[None, :] + log_norm[None, :] - deviation.sum(axis=2)

    def predict(self, model: NbModel, x: np.ndarray) -> np.ndarray:
        """Class id per row; argmax ties go to the smaller id."""
        scores = self.log_posteriors(model, x)
        return model.classes[np.argmax(scores, axis=1)]


def nb_fit(data: TrainingSet) -> NbModel:
    """Convenience function to train Gaussian NB with default variance flooring."""
    return GaussianNaiveBayes().fit(data)


def nb_predict(model: NbModel, x) -> Tuple[int, Dict[int, float]]:
    """
    Classify one feature vector.

    Args:
        model: Trained model
        x: Feature vector

    Returns:
        Tuple[int, Dict[int, float]]: (class id, log-posterior score per class)
    """
    scores = GaussianNaiveBayes.log_posteriors(model, x)[0]
    best = int(model.classes[int(np.argmax(scores))])
    return best, {int(c): float(s) for c, s in zip(model.classes, scores)}


def nb_predict_many(model: NbModel, x: np.ndarray) -> np.ndarray:
    """Convenience function to classify a batch of feature rows."""
    return GaussianNaiveBayes().predict(model, x)
