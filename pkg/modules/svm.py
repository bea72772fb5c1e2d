"""
Support Vector Machine
Soft-margin kernel SVM trained by SMO on standardized features, one binary
problem per class (one-vs-rest), resolved by the largest decision score.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InputError
from .glcm import FeatureVector
from .training_set import TrainingSet

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-12
KERNELS = ("linear", "rbf")
# Multipliers this small relative to C are treated as exactly zero.
ALPHA_EPSILON = 1e-12
# Smallest curvature used for a pair step.
TAU = 1e-12


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-feature mean and floored standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std


def standardize_fit(data: Union[TrainingSet, np.ndarray]) -> Standardizer:
    """
    Fit per-feature moments; std is floored at 1e-12 so constant columns map to 0.

    Args:
        data: TrainingSet or feature matrix with at least two rows
    """
    x = data.features if isinstance(data, TrainingSet) else np.asarray(data, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InputError("Standardization needs at least two samples")
    return Standardizer(x.mean(axis=0), np.maximum(x.std(axis=0), STD_FLOOR))


def standardize_apply(standardizer: Standardizer, x):
    """z = (x - mean) / std; FeatureVector in, FeatureVector out."""
    z = standardizer.apply(x)
    if isinstance(x, FeatureVector):
        return FeatureVector(*(float(v) for v in z))
    return z


@dataclass(frozen=True)
class KernelSpec:
    """Linear kernel, or RBF exp(-gamma * |a - b|^2)."""

    name: str = "rbf"
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.name not in KERNELS:
            raise InputError(f"Kernel must be one of {KERNELS}, got '{self.name}'")
        if self.name == "rbf" and (self.gamma is None or self.gamma <= 0):
            raise InputError(f"RBF kernel needs gamma > 0, got {self.gamma}")

    def gram(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.name == "linear":
            return a @ b.T
        sq_dist = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
        return np.exp(-self.gamma * np.maximum(sq_dist, 0.0))


def default_gamma(z: np.ndarray) -> float:
    """1 / (k * mean feature variance) of standardized data."""
    variance = float(np.mean(z.var(axis=0)))
    k = z.shape[1]
    return 1.0 / (k * variance) if variance > 0 else 1.0 / k


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    kernel: str = "rbf"
    gamma: Optional[float] = None
    tol: float = 1e-3
    max_passes: int = 100
    seed: int = 0
    threads: int = 1


@dataclass(frozen=True, eq=False)
class BinarySvm:
    """One class-vs-rest problem: support rows (standardized), alpha*y and bias."""

    class_id: int
    C: float
    bias: float
    support: np.ndarray
    coef: np.ndarray
    converged: bool = True
    iterations: int = 0

    def decision(self, z: np.ndarray, kernel: KernelSpec) -> np.ndarray:
        if self.support.shape[0] == 0:
            return np.full(z.shape[0], self.bias)
        return kernel.gram(z, self.support) @ self.coef + self.bias


@dataclass(frozen=True, eq=False)
class SvmModel:
    standardizer: Standardizer
    kernel: KernelSpec
    problems: Tuple[BinarySvm, ...]

    @property
    def classes(self) -> np.ndarray:
        return np.array([p.class_id for p in self.problems], dtype=np.int64)

    @property
    def n_features(self) -> int:
        return self.standardizer.mean.shape[0]

    def decision(self, x) -> np.ndarray:
        """Decision scores shaped (n, classes)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.n_features:
            raise InputError(f"Expected {self.n_features} features, got {x.shape[1]}")
        z = self.standardizer.apply(x)
        return np.column_stack([p.decision(z, self.kernel) for p in self.problems])

    def support_counts(self) -> Dict[int, int]:
        return {p.class_id: int(p.support.shape[0]) for p in self.problems}

    def primal_weights(self, class_id: int) -> Tuple[np.ndarray, float]:
        """
        Linear-kernel hyperplane of one problem in raw feature units.

        Returns:
            Tuple[np.ndarray, float]: (w, b) with score = w . x + b
        """
        if self.kernel.name != "linear":
            raise InputError("Primal weights exist only for the linear kernel")
        problem = next((p for p in self.problems if p.class_id == class_id), None)
        if problem is None:
            raise InputError(f"No binary problem for class {class_id}")
        w_z = problem.coef @ problem.support if problem.support.shape[0] else np.zeros(self.n_features)
        w = w_z / self.standardizer.std
        b = problem.bias - float(np.sum(w_z * self.standardizer.mean / self.standardizer.std))
        return w, b


class SmoSolver:
    """
    SMO for the soft-margin dual.

    Each step takes the sample with the largest KKT violation in the "up" set
    and pairs it with a random sample from the "down" set whose violation gap
    exceeds tol, then solves the two-multiplier subproblem analytically.
    Training stops when the maximal violating gap is at most tol, or after
    max_passes * 10 sweeps of n steps.
    """

    def __init__(self, C: float, tol: float, max_passes: int, rng: np.random.Generator):
        self.C = C
        self.tol = tol
        self.max_passes = max_passes
        self.rng = rng

    def _gap(self, alpha: np.ndarray, y: np.ndarray, violation: np.ndarray):
        up = ((y > 0) & (alpha < self.C)) | ((y < 0) & (alpha > 0))
        down = ((y < 0) & (alpha < self.C)) | ((y > 0) & (alpha > 0))
        up_idx, down_idx = np.flatnonzero(up), np.flatnonzero(down)
        if up_idx.size == 0 or down_idx.size == 0:
            return None, None, up_idx, down_idx
        return violation[up_idx].max(), violation[down_idx].min(), up_idx, down_idx

    def _snap(self, a: float) -> float:
        if a < ALPHA_EPSILON * self.C:
            return 0.0
        if a > self.C * (1.0 - ALPHA_EPSILON):
            return self.C
        return a

    def solve(self, K: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float, bool, int]:
        """
        Solve one binary problem.

        Args:
            K: Gram matrix (n, n)
            y: Labels in {-1, +1}

        Returns:
            Tuple of (alpha, bias, converged, iterations)
        """
        n = y.shape[0]
        C = self.C
        alpha = np.zeros(n)
        u = np.zeros(n)
        budget = self.max_passes * 10 * n
        converged = False
        iterations = 0
        # Samples whose last step moved nothing; cleared after any real update.
        stalled = np.zeros(n, dtype=bool)

        while iterations < budget:
            violation = y - u
            top, bottom, up_idx, down_idx = self._gap(alpha, y, violation)
            if top is None or top - bottom <= self.tol:
                converged = True
                break

            up_idx = up_idx[~stalled[up_idx]]
            if up_idx.size == 0:
                break
            i = up_idx[np.argmax(violation[up_idx])]
            candidates = down_idx[violation[down_idx] < violation[i] - self.tol]
            if candidates.size == 0:
                stalled[i] = True
                continue
            j = candidates[self.rng.integers(candidates.size)]

            ai, aj = alpha[i], alpha[j]
            if y[i] != y[j]:
                low, high = max(0.0, aj - ai), min(C, C + aj - ai)
            else:
                low, high = max(0.0, ai + aj - C), min(C, ai + aj)

            eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], TAU)
            err_i, err_j = -violation[i], -violation[j]
            aj_new = self._snap(min(max(aj + y[j] * (err_i - err_j) / eta, low), high))
            ai_new = self._snap(min(max(ai + y[i] * y[j] * (aj - aj_new), 0.0), C))
            iterations += 1

            if ai_new == ai and aj_new == aj:
                stalled[i] = True
                continue
            stalled[:] = False

            u += (ai_new - ai) * y[i] * K[i] + (aj_new - aj) * y[j] * K[j]
            alpha[i], alpha[j] = ai_new, aj_new

            if iterations % 10000 == 0:
                logger.debug(f"SMO step {iterations}: gap {top - bottom:.3g}")

        alpha[alpha < ALPHA_EPSILON * C] = 0.0
        u = K @ (alpha * y)
        violation = y - u
        free = (alpha > 0) & (alpha < C)
        if free.any():
            bias = float(np.mean(violation[free]))
        else:
            top, bottom, _, _ = self._gap(alpha, y, violation)
            bias = 0.0 if top is None else 0.5 * (top + bottom)
        return alpha, bias, converged, iterations


def _fit_problem(
    class_id: int,
    z: np.ndarray,
    labels: np.ndarray,
    K: np.ndarray,
    params: SvmParams,
    seed: np.random.SeedSequence,
) -> BinarySvm:
    y = np.where(labels == class_id, 1.0, -1.0)
    solver = SmoSolver(params.C, params.tol, params.max_passes, np.random.default_rng(seed))
    alpha, bias, converged, iterations = solver.solve(K, y)
    if not converged:
        logger.warning(
            f"⚠️ SMO for class {class_id} stopped after {iterations} steps without reaching tol={params.tol}; "
            "keeping the last iterate"
        )
    support = alpha > 0
    return BinarySvm(
        class_id=class_id,
        C=params.C,
        bias=bias,
        support=z[support],
        coef=alpha[support] * y[support],
        converged=converged,
        iterations=iterations,
    )


def svm_fit(data: TrainingSet, params: SvmParams = SvmParams()) -> SvmModel:
    """
    Train one-vs-rest SVMs on standardized features.

    Args:
        data: Labeled samples with at least two classes
        params: Box constraint, kernel, tolerance, pass limit, seed, worker count

    Returns:
        SvmModel: Standardizer, kernel and one BinarySvm per present class
    """
    if params.C <= 0:
        raise InputError(f"C must be > 0, got {params.C}")
    classes = data.present_classes
    if len(classes) < 2:
        raise InputError("SVM training needs at least two classes")

    standardizer = standardize_fit(data)
    z = standardizer.apply(data.features)
    gamma = None
    if params.kernel == "rbf":
        gamma = params.gamma if params.gamma is not None else default_gamma(z)
    kernel = KernelSpec(params.kernel, gamma)
    K = kernel.gram(z, z)

    seeds = np.random.SeedSequence(params.seed).spawn(len(classes))
    jobs = list(zip(classes, seeds))

    def run(job):
        return _fit_problem(job[0], z, data.labels, K, params, job[1])

    if params.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=min(params.threads, len(jobs))) as pool:
            problems = tuple(pool.map(run, jobs))
    else:
        problems = tuple(run(job) for job in jobs)

    model = SvmModel(standardizer, kernel, problems)
    logger.info(
        f"✅ SVM trained on {len(data)} samples ({kernel.name}, C={params.C}); "
        f"support vectors per class: {model.support_counts()}"
    )
    return model


def pick_class(classes: Sequence[int], scores: Sequence[float]) -> int:
    """Class with the largest score; ties go to the smaller class id."""
    order = np.argsort(np.asarray(classes), kind="stable")
    ranked = np.asarray(scores, dtype=np.float64)[order]
    return int(np.asarray(classes)[order][int(np.argmax(ranked))])


def svm_decision(model: SvmModel, x) -> Dict[int, float]:
    """Per-class decision score of one feature vector."""
    scores = model.decision(x)[0]
    return {int(c): float(s) for c, s in zip(model.classes, scores)}


def svm_predict(model: SvmModel, x) -> int:
    """Class with the largest decision score for one feature vector."""
    return pick_class(model.classes, model.decision(x)[0])


def svm_predict_many(model: SvmModel, x: np.ndarray) -> np.ndarray:
    """Vectorized svm_predict over feature rows; classes are stored in ascending order."""
    scores = model.decision(x)
    return model.classes[np.argmax(scores, axis=1)]
