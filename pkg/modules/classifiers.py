"""
Classifier selection: a common train/predict surface over Naive Bayes and SVM,
plus the extraction metadata a trained model carries.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import ConfigMismatchError, InputError
from .glcm import FEATURE_NAMES, OffsetSpec
from .naive_bayes import GaussianNaiveBayes, NbModel, nb_fit
from .svm import SvmModel, SvmParams, svm_fit, svm_predict_many
from .training_set import TrainingSet

logger = logging.getLogger(__name__)

CLASSIFIERS = ("nb", "svm")


@dataclass(frozen=True)
class ModelMetadata:
    """Extraction settings a model was trained under."""

    levels: int
    window: int
    offset: OffsetSpec
    features: Tuple[str, ...] = FEATURE_NAMES

    def check_compatible(self, levels: int, window: int, offset: OffsetSpec) -> None:
        """
        Raise ConfigMismatchError when prediction settings differ from training.
        """
        problems = []
        if levels != self.levels:
            problems.append(f"levels {levels} != {self.levels}")
        if window != self.window:
            problems.append(f"window {window} != {self.window}")
        if offset.canonical() != self.offset.canonical():
            problems.append(f"offset {offset} != {self.offset}")
        if problems:
            raise ConfigMismatchError("Config does not match the model: " + "; ".join(problems))


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: str
    model: Union[NbModel, SvmModel]
    metadata: Optional[ModelMetadata] = None

    @property
    def classes(self) -> np.ndarray:
        return self.model.classes

    def predict(self, x) -> np.ndarray:
        """Class id per feature row."""
        if self.kind == "nb":
            return GaussianNaiveBayes().predict(self.model, x)
        return svm_predict_many(self.model, x)

    def summary(self, class_counts: Optional[dict] = None) -> List[str]:
        lines = [f"classifier: {self.kind}"]
        if class_counts:
            lines.append("class counts: " + ", ".join(f"{c}={n}" for c, n in sorted(class_counts.items())))
        if self.kind == "svm":
            counts = self.model.support_counts()
            lines.append(f"kernel: {self.model.kernel.name}" + (
                f" gamma={self.model.kernel.gamma:.6g}" if self.model.kernel.gamma is not None else ""))
            lines.append("support vectors: " + ", ".join(f"{c}={n}" for c, n in sorted(counts.items())))
            stalled = [p.class_id for p in self.model.problems if not p.converged]
            if stalled:
                lines.append("not converged: " + ", ".join(str(c) for c in stalled))
        return lines


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "nb"
    svm: SvmParams = field(default_factory=SvmParams)

    def __post_init__(self):
        if self.kind not in CLASSIFIERS:
            raise InputError(f"Classifier must be one of {CLASSIFIERS}, got '{self.kind}'")

    def fit(self, data: TrainingSet, metadata: Optional[ModelMetadata] = None) -> TrainedModel:
        if self.kind == "nb":
            return TrainedModel("nb", nb_fit(data), metadata)
        return TrainedModel("svm", svm_fit(data, self.svm), metadata)
