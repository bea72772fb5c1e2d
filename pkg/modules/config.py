"""
Run configuration.
Defaults, then TEXTUREMAP_* environment variables (process env and the project
.env file), then a flat `key = value` config file, then command-line flags.
"""

import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values, load_dotenv

from .classifiers import CLASSIFIERS, ClassifierSpec
from .errors import ConfigError, InputError
from .glcm import DIRECTIONS, OffsetSpec
from .svm import KERNELS, SvmParams

logger = logging.getLogger(__name__)

# Load environment variables from project root
current_dir = Path(__file__).resolve().parent.parent
env_path = current_dir / '.env'
load_dotenv(dotenv_path=env_path)

ENV_PREFIX = "TEXTUREMAP_"
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}
# Short spellings shared with the command-line flags.
_ALIASES = {"avg_directions": "average_directions", "sizes": "windows"}


def _default_threads() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class RunConfig:
    window: int = 50
    windows: Tuple[int, ...] = (50, 70)
    levels: int = 8
    distance: int = 1
    direction: int = 0
    symmetric: bool = True
    average_directions: bool = False
    classifier: str = "nb"
    kernel: str = "rbf"
    C: float = 1.0
    gamma: Optional[float] = None
    tol: float = 1e-3
    max_passes: int = 100
    folds: int = 5
    seed: int = 42
    purity: float = 0.6
    threads: int = field(default_factory=_default_threads)
    keep_unlabeled: bool = False
    repeats: int = 3

    def validate(self) -> "RunConfig":
        """
        Check every field against its allowed range.

        Raises:
            ConfigError: First out-of-range field
        """
        checks = [
            (self.window >= 2, f"window must be >= 2, got {self.window}"),
            (len(self.windows) > 0 and all(w >= 2 for w in self.windows), f"windows must all be >= 2, got {self.windows}"),
            (2 <= self.levels <= 256, f"levels must be in 2..256, got {self.levels}"),
            (self.distance >= 1, f"distance must be >= 1, got {self.distance}"),
            (self.direction in DIRECTIONS, f"direction must be one of {DIRECTIONS}, got {self.direction}"),
            (self.classifier in CLASSIFIERS, f"classifier must be one of {CLASSIFIERS}, got '{self.classifier}'"),
            (self.kernel in KERNELS, f"kernel must be one of {KERNELS}, got '{self.kernel}'"),
            (self.C > 0, f"C must be > 0, got {self.C}"),
            (self.gamma is None or self.gamma > 0, f"gamma must be > 0, got {self.gamma}"),
            (self.tol > 0, f"tol must be > 0, got {self.tol}"),
            (self.max_passes >= 1, f"max_passes must be >= 1, got {self.max_passes}"),
            (self.folds >= 2, f"folds must be >= 2, got {self.folds}"),
            (0 < self.purity <= 1, f"purity must be in (0, 1], got {self.purity}"),
            (self.threads >= 1, f"threads must be >= 1, got {self.threads}"),
            (self.repeats >= 1, f"repeats must be >= 1, got {self.repeats}"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self

    def offset(self) -> OffsetSpec:
        return OffsetSpec(self.distance, self.direction, self.symmetric, self.average_directions)

    def svm_params(self) -> SvmParams:
        return SvmParams(
            C=self.C, kernel=self.kernel, gamma=self.gamma, tol=self.tol,
            max_passes=self.max_passes, seed=self.seed, threads=self.threads,
        )

    def classifier_spec(self) -> ClassifierSpec:
        return ClassifierSpec(self.classifier, self.svm_params())


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: Any) -> Any:
    """Convert a raw string from the environment or a config file to the field's type."""
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = _FIELD_TYPES[name]
    try:
        if name == "windows":
            return tuple(int(part) for part in text.replace(" ", "").split(",") if part)
        if name == "gamma":
            return None if text.lower() in ("", "none", "auto") else float(text)
        if kind in (bool, "bool"):
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(f"not a boolean: {text}")
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
        return text.lower()
    except ValueError as e:
        raise ConfigError(f"Bad value for '{name}': {e}")


def _from_environment(environ: Mapping[str, str]) -> Dict[str, Any]:
    values = {}
    names = [(name, name) for name in _FIELD_TYPES] + [(alias, name) for alias, name in _ALIASES.items()]
    for spelling, name in names:
        key = ENV_PREFIX + spelling.upper()
        if key in environ:
            values[name] = _coerce(name, environ[key])
    return values


def _from_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Cannot read config file: {path}")
    lookup = {name.lower(): name for name in _FIELD_TYPES}
    lookup.update(_ALIASES)
    values = {}
    for key, raw in dotenv_values(path).items():
        normalized = key.strip().lower().replace("-", "_")
        if normalized not in lookup:
            raise ConfigError(f"Unknown config key '{key}' in {path}")
        if raw is None:
            raise ConfigError(f"Config key '{key}' in {path} has no value")
        name = lookup[normalized]
        values[name] = _coerce(name, raw)
    logger.debug(f"Config file {path}: {sorted(values)}")
    return values


def load_config(
    config_file: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Resolve the run configuration.

    Args:
        config_file: Optional flat `key = value` file
        overrides: Values from command-line flags; None entries are ignored
        environ: Environment mapping (defaults to os.environ)

    Returns:
        RunConfig: Validated configuration
    """
    values = _from_environment(os.environ if environ is None else environ)
    if config_file is not None:
        values.update(_from_file(config_file))
    for name, value in (overrides or {}).items():
        if value is not None:
            values[name] = value
    try:
        config = replace(RunConfig(), **values)
    except (TypeError, InputError) as e:
        raise ConfigError(str(e))
    return config.validate()
