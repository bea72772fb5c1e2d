"""
Model Store
Versioned line-oriented text format for trained models. Reals are written
with 17 significant digits so a save/load roundtrip is exact.

    texturemap-model v1 <nb|svm>
    levels <G>                      (optional metadata block)
    window <size>
    offset distance=<d> direction=<r> symmetric=<0|1> average_directions=<0|1>
    features homogeneity,contrast,energy,entropy
    ... body ...
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from .classifiers import CLASSIFIERS, ModelMetadata, TrainedModel
from .errors import ModelFormatError
from .glcm import FEATURE_NAMES, OffsetSpec
from .naive_bayes import NbModel
from .svm import BinarySvm, KernelSpec, Standardizer, SvmModel

logger = logging.getLogger(__name__)

MAGIC = "texturemap-model"
VERSION = "v1"


def _real(value: float) -> str:
    return format(float(value), ".17g")


def _reals(values) -> str:
    return " ".join(_real(v) for v in values)


def _metadata_lines(metadata: Optional[ModelMetadata], n_features: int) -> List[str]:
    features = metadata.features if metadata is not None else FEATURE_NAMES[:n_features]
    lines = []
    if metadata is not None:
        off = metadata.offset
        lines += [
            f"levels {metadata.levels}",
            f"window {metadata.window}",
            f"offset distance={off.distance} direction={off.direction} "
            f"symmetric={int(off.symmetric)} average_directions={int(off.average_directions)}",
        ]
    lines.append("features " + ",".join(features))
    return lines


def _nb_lines(model: NbModel) -> List[str]:
    lines = [f"classes {len(model.classes)} {model.n_features}"]
    for row, cls in enumerate(model.classes):
        lines.append(f"class {int(cls)} {_real(model.priors[row])}")
        lines.append("mean " + _reals(model.means[row]))
        lines.append("variance " + _reals(model.variances[row]))
    return lines


def _svm_lines(model: SvmModel) -> List[str]:
    lines = [
        "standardizer_mean " + _reals(model.standardizer.mean),
        "standardizer_std " + _reals(model.standardizer.std),
    ]
    if model.kernel.name == "rbf":
        lines.append(f"kernel rbf {_real(model.kernel.gamma)}")
    else:
        lines.append("kernel linear")
    lines.append(f"problems {len(model.problems)}")
    for problem in model.problems:
        n_sv = problem.support.shape[0]
        lines.append(f"problem {problem.class_id} {_real(problem.C)} {_real(problem.bias)} {n_sv}")
        for coef, row in zip(problem.coef, problem.support):
            lines.append(_real(coef) + " " + _reals(row))
    return lines


def dumps(trained: TrainedModel) -> str:
    """Serialize a trained model to the v1 text format."""
    lines = [f"{MAGIC} {VERSION} {trained.kind}"]
    lines += _metadata_lines(trained.metadata, trained.model.n_features)
    lines += _nb_lines(trained.model) if trained.kind == "nb" else _svm_lines(trained.model)
    return "\n".join(lines) + "\n"


def save_model(trained: TrainedModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(dumps(trained))
    logger.info(f"✅ Saved {trained.kind} model to {path}")
    return path


class _Lines:
    """Cursor over non-empty lines with format-error reporting."""

    def __init__(self, text: str):
        self._lines = [(n + 1, line.split()) for n, line in enumerate(text.splitlines()) if line.strip()]
        self._pos = 0

    def peek(self) -> Optional[List[str]]:
        return self._lines[self._pos][1] if self._pos < len(self._lines) else None

    def take(self, keyword: Optional[str] = None, count: Optional[int] = None) -> List[str]:
        if self._pos >= len(self._lines):
            raise ModelFormatError(f"Unexpected end of model file (expected '{keyword}')")
        number, tokens = self._lines[self._pos]
        self._pos += 1
        if keyword is not None and tokens[0] != keyword:
            raise ModelFormatError(f"Line {number}: expected '{keyword}', found '{tokens[0]}'")
        body = tokens[1:] if keyword is not None else tokens
        if count is not None and len(body) != count:
            raise ModelFormatError(f"Line {number}: expected {count} values, found {len(body)}")
        return body

    def done(self) -> bool:
        return self._pos >= len(self._lines)


def _floats(tokens: List[str]) -> np.ndarray:
    try:
        return np.array([float(t) for t in tokens], dtype=np.float64)
    except ValueError as e:
        raise ModelFormatError(f"Bad number in model file: {e}")


def _ints(tokens: List[str]) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise ModelFormatError(f"Bad integer in model file: {e}")


def _parse_offset(tokens: List[str]) -> OffsetSpec:
    try:
        fields = dict(token.split("=", 1) for token in tokens)
        return OffsetSpec(
            int(fields["distance"]), int(fields["direction"]),
            bool(int(fields["symmetric"])), bool(int(fields["average_directions"])),
        )
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"Bad offset line in model file: {e}")


def _parse_metadata(lines: _Lines) -> Tuple[Optional[ModelMetadata], Tuple[str, ...]]:
    levels = window = offset = None
    while lines.peek() is not None and lines.peek()[0] in ("levels", "window", "offset"):
        key = lines.peek()[0]
        if key == "levels":
            levels = _ints(lines.take("levels", 1))[0]
        elif key == "window":
            window = _ints(lines.take("window", 1))[0]
        else:
            offset = _parse_offset(lines.take("offset", 4))
    features = tuple(lines.take("features", 1)[0].split(","))
    if features != FEATURE_NAMES[:len(features)]:
        raise ModelFormatError(f"Unknown feature order {features}; expected {FEATURE_NAMES}")

    present = [v is not None for v in (levels, window, offset)]
    if any(present) and not all(present):
        raise ModelFormatError("Model metadata must give levels, window and offset together")
    metadata = ModelMetadata(levels, window, offset, features) if all(present) else None
    return metadata, features


def _parse_nb(lines: _Lines) -> NbModel:
    n_classes, n_features = _ints(lines.take("classes", 2))
    classes, priors, means, variances = [], [], [], []
    for _ in range(n_classes):
        header = lines.take("class", 2)
        classes.append(_ints(header[:1])[0])
        priors.append(_floats(header[1:])[0])
        means.append(_floats(lines.take("mean", n_features)))
        variances.append(_floats(lines.take("variance", n_features)))
    if classes != sorted(set(classes)):
        raise ModelFormatError("NB classes must be unique and ascending")
    return NbModel(np.array(classes, dtype=np.int64), np.array(priors), np.array(means), np.array(variances))


def _parse_svm(lines: _Lines) -> SvmModel:
    mean = _floats(lines.take("standardizer_mean"))
    std = _floats(lines.take("standardizer_std", mean.shape[0]))
    kernel_tokens = lines.take("kernel")
    if kernel_tokens == ["linear"]:
        kernel = KernelSpec("linear")
    elif len(kernel_tokens) == 2 and kernel_tokens[0] == "rbf":
        kernel = KernelSpec("rbf", float(_floats(kernel_tokens[1:])[0]))
    else:
        raise ModelFormatError(f"Bad kernel line: {' '.join(kernel_tokens)}")

    n_problems = _ints(lines.take("problems", 1))[0]
    problems = []
    for _ in range(n_problems):
        header = lines.take("problem", 4)
        class_id, n_sv = _ints([header[0], header[3]])
        C, bias = _floats(header[1:3])
        support = np.zeros((n_sv, mean.shape[0]))
        coef = np.zeros(n_sv)
        for row in range(n_sv):
            values = _floats(lines.take(count=mean.shape[0] + 1))
            coef[row], support[row] = values[0], values[1:]
        problems.append(BinarySvm(class_id, float(C), float(bias), support, coef))

    ids = [p.class_id for p in problems]
    if ids != sorted(set(ids)):
        raise ModelFormatError("SVM problems must have unique ascending class ids")
    return SvmModel(Standardizer(mean, std), kernel, tuple(problems))


def loads(text: str) -> TrainedModel:
    """
    Parse a v1 model.

    Raises:
        ModelFormatError: Wrong magic, version or kind, or a malformed body
    """
    lines = _Lines(text)
    header = lines.take(MAGIC, 2)
    version, kind = header
    if version != VERSION:
        raise ModelFormatError(f"Unsupported model version '{version}' (expected {VERSION})")
    if kind not in CLASSIFIERS:
        raise ModelFormatError(f"Unknown model kind '{kind}'")

    metadata, _ = _parse_metadata(lines)
    model = _parse_nb(lines) if kind == "nb" else _parse_svm(lines)
    if not lines.done():
        raise ModelFormatError("Trailing content after model body")
    return TrainedModel(kind, model, metadata)


def load_model(path: Union[str, Path]) -> TrainedModel:
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"Cannot read model file: {path}")
    trained = loads(path.read_text())
    logger.info(f"Loaded {trained.kind} model from {path} ({len(trained.classes)} classes)")
    return trained
