"""
Evaluation Module
Stratified k-fold cross-validation, hold-out evaluation, confusion matrices,
accuracy reports and misclassification overlays.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .classifiers import ClassifierSpec
from .errors import InputError
from .imaging import UNLABELED, ClassMap, GrayImage, RgbImage, WindowSpec
from .training_set import TrainingSet

logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 5
DEFAULT_SEED = 42

RED = np.array([255.0, 0.0, 0.0])
GREEN = np.array([0.0, 255.0, 0.0])
MISS_OPACITY = 0.5
HIT_OPACITY = 0.15


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts with rows = truth and columns = prediction, indexed by `classes`."""

    classes: Tuple[int, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def _index(self, class_id: int) -> int:
        return self.classes.index(class_id)

    def precision(self, class_id: int) -> float:
        col = self.counts[:, self._index(class_id)]
        return float(col[self._index(class_id)] / col.sum()) if col.sum() else 0.0

    def recall(self, class_id: int) -> float:
        row = self.counts[self._index(class_id)]
        return float(row[self._index(class_id)] / row.sum()) if row.sum() else 0.0

    def support(self, class_id: int) -> int:
        return int(self.counts[self._index(class_id)].sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise InputError("Cannot add confusion matrices over different classes")
        return ConfusionMatrix(self.classes, self.counts + other.counts)


def confusion_matrix(truth: Sequence[int], pred: Sequence[int], classes: Optional[Sequence[int]] = None) -> ConfusionMatrix:
    """
    Tally (truth, prediction) pairs.

    Args:
        truth: True class ids
        pred: Predicted class ids
        classes: Known class ids; defaults to those appearing in either sequence

    Raises:
        InputError: Length mismatch or a class id outside `classes`
    """
    truth = np.asarray(truth, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if truth.shape != pred.shape:
        raise InputError(f"truth has {truth.size} entries, predictions have {pred.size}")
    if classes is None:
        classes = sorted(set(truth.tolist()) | set(pred.tolist()))
    classes = tuple(int(c) for c in classes)

    lookup = {c: n for n, c in enumerate(classes)}
    unknown = sorted((set(truth.tolist()) | set(pred.tolist())) - set(lookup))
    if unknown:
        raise InputError(f"Unknown class ids {unknown}")

    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    if truth.size:
        rows = np.array([lookup[t] for t in truth.tolist()])
        cols = np.array([lookup[p] for p in pred.tolist()])
        np.add.at(counts, (rows, cols), 1)
    return ConfusionMatrix(classes, counts)


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Fold index per sample."""

    k: int
    seed: int
    assignment: np.ndarray

    def folds(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """(train indices, held-out indices) per fold, in fold order."""
        for fold in range(self.k):
            held_out = self.assignment == fold
            yield np.flatnonzero(~held_out), np.flatnonzero(held_out)


def kfold_split(data: TrainingSet, k: int = DEFAULT_FOLDS, seed: int = DEFAULT_SEED) -> FoldPlan:
    """
    Stratified fold assignment.

    Each class is shuffled and dealt round-robin, continuing from where the
    previous class stopped, so per-class fold counts differ by at most one.

    Raises:
        InputError: k < 2, or a class with fewer than k samples
    """
    if k < 2:
        raise InputError(f"Fold count must be >= 2, got {k}")
    counts = data.class_counts()
    small = {c: n for c, n in counts.items() if n < k}
    if small:
        raise InputError(f"Classes with fewer than {k} samples: {small}")

    rng = np.random.default_rng(seed)
    assignment = np.empty(len(data), dtype=np.int64)
    start = 0
    for cls in sorted(counts):
        members = rng.permutation(np.flatnonzero(data.labels == cls))
        assignment[members] = (start + np.arange(members.size)) % k
        start = (start + members.size) % k
    return FoldPlan(k, seed, assignment)


@dataclass(frozen=True, eq=False)
class EvaluationResult:
    accuracy: float
    confusion: ConfusionMatrix
    fold_accuracies: Tuple[float, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter((self.accuracy, self.confusion))


def _run_fold(data: TrainingSet, spec: ClassifierSpec, train_idx: np.ndarray, test_idx: np.ndarray) -> ConfusionMatrix:
    trained = spec.fit(data.subset(train_idx))
    predictions = trained.predict(data.features[test_idx])
    return confusion_matrix(data.labels[test_idx], predictions, data.classes.ids)


def cross_validate(
    data: TrainingSet,
    spec: ClassifierSpec,
    k: int = DEFAULT_FOLDS,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> EvaluationResult:
    """
    Stratified k-fold cross-validation.

    Args:
        data: Labeled samples
        spec: Classifier choice and hyperparameters
        k: Fold count
        seed: Fold shuffling seed
        threads: Folds evaluated concurrently

    Returns:
        EvaluationResult: accuracy over all held-out predictions and the
        confusion matrix aggregated over folds
    """
    plan = kfold_split(data, k, seed)
    folds = list(plan.folds())

    def run(fold):
        return _run_fold(data, spec, *fold)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=min(threads, k)) as pool:
            matrices = list(pool.map(run, folds))
    else:
        matrices = [run(fold) for fold in folds]

    confusion = matrices[0]
    for matrix in matrices[1:]:
        confusion = confusion + matrix

    result = EvaluationResult(confusion.accuracy, confusion, tuple(m.accuracy for m in matrices))
    logger.info(f"✅ {k}-fold CV ({spec.kind}): accuracy {result.accuracy:.4f}")
    return result


def holdout_evaluate(train: TrainingSet, test: TrainingSet, spec: ClassifierSpec) -> EvaluationResult:
    """Train on one set, score on a disjoint one."""
    trained = spec.fit(train)
    predictions = trained.predict(test.features)
    classes = sorted(set(train.classes.ids) | set(test.classes.ids))
    confusion = confusion_matrix(test.labels, predictions, classes)
    logger.info(f"✅ Hold-out ({spec.kind}): accuracy {confusion.accuracy:.4f} on {len(test)} samples")
    return EvaluationResult(confusion.accuracy, confusion, (confusion.accuracy,))


def format_report(result: EvaluationResult, class_map: Optional[ClassMap] = None) -> str:
    """
    Plain-text evaluation report: accuracy, per-class precision/recall and
    confusion rows.
    """
    cm = result.confusion
    names = class_map if class_map is not None else ClassMap.from_ids(list(cm.classes))
    lines = [f"accuracy {result.accuracy:.6f}"]
    if len(result.fold_accuracies) > 1:
        lines.append("fold_accuracy " + " ".join(f"{a:.6f}" for a in result.fold_accuracies))
    lines.append("")
    lines.append("class,name,precision,recall,support")
    for c in cm.classes:
        lines.append(f"{c},{names.name(c)},{cm.precision(c):.6f},{cm.recall(c):.6f},{cm.support(c)}")
    lines.append("")
    lines.append("confusion (rows = truth, columns = prediction)")
    lines.append("truth," + ",".join(str(c) for c in cm.classes))
    for c, row in zip(cm.classes, cm.counts):
        lines.append(f"{c}," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def report_json(result: EvaluationResult, class_map: Optional[ClassMap] = None) -> str:
    """Machine-readable counterpart of format_report."""
    cm = result.confusion
    names = class_map if class_map is not None else ClassMap.from_ids(list(cm.classes))
    payload = {
        "accuracy": round(result.accuracy, 12),
        "fold_accuracies": [round(a, 12) for a in result.fold_accuracies],
        "classes": [
            {
                "id": c,
                "name": names.name(c),
                "precision": round(cm.precision(c), 12),
                "recall": round(cm.recall(c), 12),
                "support": cm.support(c),
            }
            for c in cm.classes
        ],
        "confusion": cm.counts.tolist(),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def misclassification_map(
    image: GrayImage,
    windows: Sequence[WindowSpec],
    truths: Sequence[int],
    preds: Sequence[int],
) -> RgbImage:
    """
    Overlay per-window outcomes on the gray image.

    Misclassified windows are tinted red at 50% with a 1-pixel red border,
    correct ones green at 15%; unlabeled windows and pixels outside every
    window keep the gray base.

    Raises:
        InputError: Sequences of different lengths, or a window outside the image
    """
    if not len(windows) == len(truths) == len(preds):
        raise InputError(f"Misaligned inputs: {len(windows)} windows, {len(truths)} truths, {len(preds)} predictions")

    base = np.repeat(image.pixels[..., None].astype(np.float64), 3, axis=2)
    out = base.copy()
    for window, truth, pred in zip(windows, truths, preds):
        if not window.fits(image.width, image.height):
            raise InputError(f"Window {window} lies outside the {image.width}x{image.height} image")
        if truth == UNLABELED:
            continue
        region = (slice(window.origin_y, window.origin_y + window.size),
                  slice(window.origin_x, window.origin_x + window.size))
        if truth == pred:
            out[region] = (1.0 - HIT_OPACITY) * base[region] + HIT_OPACITY * GREEN
            continue
        patch = (1.0 - MISS_OPACITY) * base[region] + MISS_OPACITY * RED
        patch[0, :] = patch[-1, :] = RED
        patch[:, 0] = patch[:, -1] = RED
        out[region] = patch

    return RgbImage(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))
