"""
Command-line front end for GLCM texture classification of windowed imagery.
Subcommands: extract, train, predict, evaluate, bench, synth.

Exit status: 0 success, 1 computation error, 2 usage or input error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

import numpy as np

from modules.benchmark import benchmark_runtime
from modules.classifiers import ModelMetadata
from modules.config import RunConfig, load_config
from modules.errors import InputError, TableError, TextureMapError
from modules.evaluation import (
    cross_validate,
    format_report,
    holdout_evaluate,
    misclassification_map,
    report_json,
)
from modules.feature_table import (
    TableMetadata,
    build_table,
    extract_table,
    merge_tables,
    read_table,
    write_table,
)
from modules.glcm import image_glcm, render_glcm
from modules.imaging import (
    UNLABELED,
    as_gray,
    load_class_map,
    load_image,
    load_label_raster,
    quantize,
    save_png,
    tile_windows,
    window_label,
)
from modules.model_store import load_model, save_model
from modules.plots import bench_figure, confusion_figure, feature_profile_figure, write_figure
from modules.synthetic import TEXTURE_KINDS, make_benchmark_image, make_mosaic

logger = logging.getLogger("texturemap")


def _configure_logging(verbose: bool, quiet: bool):
    level_name = os.getenv("TEXTUREMAP_LOG_LEVEL", "INFO").upper()
    level = getattr(logging, level_name, logging.INFO)
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def _int_list(text: str) -> tuple:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _common_parser() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; None means 'not given'."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--window", type=int, help="window side in pixels")
    common.add_argument("--levels", type=int, help="gray levels G (2..256)")
    common.add_argument("--distance", type=int, help="GLCM pixel distance d")
    common.add_argument("--direction", type=int, choices=(0, 45, 90, 135), help="GLCM direction in degrees")
    common.add_argument("--symmetric", action=argparse.BooleanOptionalAction, default=None,
                        help="accumulate transposed pairs (default on)")
    common.add_argument("--avg-directions", dest="average_directions", action="store_true", default=None,
                        help="accumulate all four directions")
    common.add_argument("--classifier", choices=("nb", "svm"))
    common.add_argument("--C", dest="C", type=float, help="SVM box constraint")
    common.add_argument("--gamma", type=float, help="RBF gamma (default 1/(k*var))")
    common.add_argument("--kernel", choices=("linear", "rbf"))
    common.add_argument("--tol", type=float, help="SMO KKT tolerance")
    common.add_argument("--max-passes", dest="max_passes", type=int, help="SMO pass limit")
    common.add_argument("--folds", type=int, help="cross-validation folds")
    common.add_argument("--seed", type=int)
    common.add_argument("--purity", type=float, help="minimum modal-class share for a window label")
    common.add_argument("--threads", type=int, help="worker threads (default: CPU count)")
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="texturemap", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    extract = sub.add_parser("extract", parents=[common], help="write a feature table for an image")
    extract.add_argument("image", type=Path)
    extract.add_argument("--labels", type=Path, help="label raster aligned with the image")
    extract.add_argument("--keep-unlabeled", dest="keep_unlabeled", action="store_true", default=None,
                         help="emit windows below purity with label 255")
    extract.add_argument("--glcm-png", type=Path, help="also render the whole-image GLCM")
    extract.add_argument("--plot", type=Path, help="HTML chart of features per window")

    train = sub.add_parser("train", parents=[common], help="train a model from feature tables")
    train.add_argument("tables", type=Path, nargs="+")
    train.add_argument("--classes", type=Path, help="class map file (id,name per line)")

    predict = sub.add_parser("predict", parents=[common], help="classify every window of an image")
    predict.add_argument("model", type=Path)
    predict.add_argument("image", type=Path)
    predict.add_argument("--labels", type=Path, help="ground truth; enables the overlay")
    predict.add_argument("--overlay", type=Path, help="overlay PNG path (default overlay.png)")

    evaluate = sub.add_parser("evaluate", parents=[common], help="cross-validate a classifier")
    evaluate.add_argument("table", type=Path)
    evaluate.add_argument("--test-table", type=Path, help="score on this table instead of cross-validating")
    evaluate.add_argument("--classes", type=Path)
    evaluate.add_argument("--json", type=Path, help="machine-readable report")
    evaluate.add_argument("--plot", type=Path, help="HTML confusion heatmap")

    bench = sub.add_parser("bench", parents=[common], help="time extraction per window size")
    bench.add_argument("image", type=Path, nargs="?")
    bench.add_argument("--synthetic", type=int, metavar="SIDE", help="benchmark a generated SIDE x SIDE image")
    bench.add_argument("--sizes", dest="windows", type=_int_list, help="comma-separated window sizes")
    bench.add_argument("--repeats", type=int)
    bench.add_argument("--plot", type=Path, help="HTML runtime chart")

    synth = sub.add_parser("synth", parents=[common], help="write a synthetic labeled mosaic")
    synth.add_argument("image", type=Path)
    synth.add_argument("labels", type=Path)
    synth.add_argument("--classes-out", type=Path, help="class map output path")
    synth.add_argument("--tiles", type=_int_list, default=(8, 8), help="columns,rows of tiles")
    return parser


_CONFIG_FIELDS = (
    "window", "windows", "levels", "distance", "direction", "symmetric", "average_directions",
    "classifier", "kernel", "C", "gamma", "tol", "max_passes", "folds", "seed", "purity",
    "threads", "keep_unlabeled", "repeats",
)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides = {name: getattr(args, name, None) for name in _CONFIG_FIELDS}
    return load_config(args.config, overrides)


def _open_out(path: Optional[Path]) -> TextIO:
    if path is None:
        return sys.stdout
    try:
        return open(path, "w", newline="")
    except OSError as e:
        raise InputError(f"Cannot write {path}: {e}")


def _emit(text: str, path: Optional[Path]):
    handle = _open_out(path)
    try:
        handle.write(text)
    finally:
        if handle is not sys.stdout:
            handle.close()


def cmd_extract(args: argparse.Namespace, config: RunConfig) -> int:
    """Feature table for every (labeled) window of an image."""
    gray = as_gray(load_image(args.image))
    raster = load_label_raster(args.labels, like=gray) if args.labels else None
    image = quantize(gray, config.levels)
    offset = config.offset()
    windows = tile_windows(image, config.window)

    labels = None
    if raster is not None:
        labels = [window_label(raster, w, config.purity) for w in windows]
        if not config.keep_unlabeled:
            kept = [n for n, label in enumerate(labels) if label != UNLABELED]
            logger.info(f"Dropped {len(windows) - len(kept)} windows below purity {config.purity}")
            windows = [windows[n] for n in kept]
            labels = [labels[n] for n in kept]

    features = extract_table(image, windows, offset, config.threads)
    table = build_table(windows, features, labels, TableMetadata(config.levels, offset))

    if args.out is None:
        write_table(table, sys.stdout)
    else:
        write_table(table, args.out)
    if args.glcm_png:
        save_png(render_glcm(image_glcm(image, offset)), args.glcm_png)
    if args.plot:
        write_figure(feature_profile_figure(table), args.plot)
    logger.info(f"✅ {len(table)} feature rows from {args.image} ({config.window}x{config.window}, G={config.levels})")
    return 0


def cmd_train(args: argparse.Namespace, config: RunConfig) -> int:
    """Train and persist a model; print a training summary."""
    if args.out is None:
        raise InputError("train needs --out for the model file")
    table = merge_tables([read_table(path) for path in args.tables])
    if len(table) == 0:
        raise TableError("Feature table is empty")
    classes = load_class_map(args.classes) if args.classes else None
    data = table.training_set(classes)

    if table.metadata is not None:
        metadata = ModelMetadata(table.metadata.levels, table.window_size(), table.metadata.offset)
    else:
        logger.warning("⚠️ Feature table carries no extraction metadata; using the run config")
        metadata = ModelMetadata(config.levels, table.window_size(), config.offset())

    trained = config.classifier_spec().fit(data, metadata)
    save_model(trained, args.out)

    summary = [f"samples: {len(data)}"] + trained.summary(data.class_counts())
    print("\n".join(summary))
    return 0


def cmd_predict(args: argparse.Namespace, config: RunConfig) -> int:
    """Per-window class ids, plus an overlay when ground truth is given."""
    trained = load_model(args.model)
    offset = config.offset()
    if trained.metadata is not None:
        trained.metadata.check_compatible(config.levels, config.window, offset)
    else:
        logger.warning("⚠️ Model carries no extraction metadata; skipping the config check")

    gray = as_gray(load_image(args.image))
    raster = load_label_raster(args.labels, like=gray) if args.labels else None
    image = quantize(gray, config.levels)
    windows = tile_windows(image, config.window)
    features = extract_table(image, windows, offset, config.threads)
    preds = trained.predict(np.array(features)) if windows else np.zeros(0, dtype=np.int64)

    lines = ["origin_x,origin_y,size,class_id"]
    lines += [f"{w.origin_x},{w.origin_y},{w.size},{int(p)}" for w, p in zip(windows, preds)]
    _emit("\n".join(lines) + "\n", args.out)

    if raster is not None:
        truths = [window_label(raster, w, config.purity) for w in windows]
        overlay_path = args.overlay or Path("overlay.png")
        save_png(misclassification_map(gray, windows, truths, [int(p) for p in preds]), overlay_path)
        scored = [(t, int(p)) for t, p in zip(truths, preds) if t != UNLABELED]
        if scored:
            hits = sum(t == p for t, p in scored)
            logger.info(f"Accuracy on {len(scored)} labeled windows: {hits / len(scored):.4f}")
        logger.info(f"✅ Overlay written to {overlay_path}")
    return 0


def cmd_evaluate(args: argparse.Namespace, config: RunConfig) -> int:
    """Cross-validation (or hold-out) report."""
    classes = load_class_map(args.classes) if args.classes else None
    table = read_table(args.table)
    if len(table) == 0:
        raise TableError("Feature table is empty")
    data = table.training_set(classes)
    spec = config.classifier_spec()

    if args.test_table:
        test = read_table(args.test_table).training_set(classes or data.classes)
        result = holdout_evaluate(data, test, spec)
    else:
        result = cross_validate(data, spec, config.folds, config.seed, config.threads)

    class_map = classes or data.classes
    _emit(format_report(result, class_map), args.out)
    if args.json:
        _emit(report_json(result, class_map), args.json)
    if args.plot:
        write_figure(confusion_figure(result.confusion, class_map), args.plot)
    return 0


def cmd_bench(args: argparse.Namespace, config: RunConfig) -> int:
    """Median runtime per window size."""
    if args.synthetic:
        gray = make_benchmark_image(args.synthetic, config.seed)
    elif args.image:
        gray = as_gray(load_image(args.image))
    else:
        raise InputError("bench needs an image path or --synthetic SIDE")

    image = quantize(gray, config.levels)
    report = benchmark_runtime(image, config.windows, config.repeats, config.offset(), config.threads)
    _emit(report.to_text(), args.out)
    if args.plot:
        write_figure(bench_figure(report), args.plot)
    return 0


def cmd_synth(args: argparse.Namespace, config: RunConfig) -> int:
    """Synthetic mosaic with its label raster and class map."""
    if len(args.tiles) != 2:
        raise InputError(f"--tiles expects columns,rows, got {args.tiles}")
    rng = np.random.default_rng(config.seed)
    image, labels, class_map = make_mosaic(TEXTURE_KINDS, args.tiles, config.window, rng)
    save_png(image, args.image)
    save_png(labels, args.labels)
    if args.classes_out:
        _emit("".join(f"{cid},{name}\n" for cid, name in class_map.entries), args.classes_out)
    logger.info(f"✅ Wrote {image.width}x{image.height} mosaic to {args.image}")
    return 0


COMMANDS = {
    "extract": cmd_extract,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "synth": cmd_synth,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.quiet)

    try:
        config = _resolve_config(args)
        return COMMANDS[args.command](args, config)
    except TextureMapError as e:
        logger.error(f"❌ {e}")
        print(f"texturemap {args.command}: {e}", file=sys.stderr)
        return e.exit_status
    except Exception as e:
        logger.error(f"❌ Unexpected error: {e}", exc_info=True)
        print(f"texturemap {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
