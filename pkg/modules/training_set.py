"""
Labeled feature samples shared by both classifiers and the evaluation harness.
"""

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InputError
from .imaging import ClassMap


class LabeledSample(NamedTuple):
    features: tuple
    label: int


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """
    Feature matrix (n, k) with one class id per row.

    At least two classes must be present. Classes listed in the class map but
    absent from the rows are allowed.
    """

    features: np.ndarray
    labels: np.ndarray
    classes: ClassMap

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64, copy=True)
        y = np.array(self.labels, dtype=np.int64, copy=True)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise InputError(f"Features {x.shape} and labels {y.shape} do not align")
        if not np.all(np.isfinite(x)):
            raise InputError("Feature matrix contains non-finite values")
        known = set(self.classes.ids)
        unknown = sorted(set(y.tolist()) - known)
        if unknown:
            raise InputError(f"Labels {unknown} are not in the class map")
        if len(np.unique(y)) < 2:
            raise InputError("Training data needs at least two classes")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @classmethod
    def from_arrays(cls, features, labels, classes: Optional[ClassMap] = None) -> "TrainingSet":
        labels = np.asarray(labels, dtype=np.int64)
        if classes is None:
            classes = ClassMap.from_ids(labels.tolist())
        return cls(np.asarray(features, dtype=np.float64), labels, classes)

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample], classes: Optional[ClassMap] = None) -> "TrainingSet":
        if not samples:
            raise InputError("Training data is empty")
        return cls.from_arrays([s.features for s in samples], [s.label for s in samples], classes)

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def present_classes(self) -> List[int]:
        return [int(c) for c in np.unique(self.labels)]

    def class_counts(self) -> Dict[int, int]:
        ids, counts = np.unique(self.labels, return_counts=True)
        return {int(c): int(n) for c, n in zip(ids, counts)}

    def subset(self, indices) -> "TrainingSet":
        indices = np.asarray(indices, dtype=np.intp)
        return TrainingSet(self.features[indices], self.labels[indices], self.classes)
