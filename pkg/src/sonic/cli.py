"""Command-line front door wiring the pipeline stages together.

Subcommands: ``segment`` (CSV records -> labeled segment tensors),
``spectrogram`` (segments -> prepared image tensors), ``crossval``
(stratified k-fold training and evaluation -> metrics JSON plus per-fold
checkpoints), ``report`` (metrics JSONs -> comparison table), and
``export-repr`` (checkpoint -> penultimate-layer representations for
external embedding plots).

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .checkpoint import load_classifier, save_classifier
from .config import ConfigError, PipelineConfig, load_config
from .dsp import RealSignal, SignalTooShortError, compute_spectrogram
from .estimators import BackboneClassifier, SonicClassifier
from .evaluation import cross_validate
from .image import prepare_image
from .ingest import AffectLabel, CsvParseError, load_record, segment_record
from .tensorfile import TensorFormatError, read_tensor, write_tensor

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class DataError(ValueError):
    """Input data is missing, malformed, or inconsistent."""


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="ascii") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DataError(f"missing file: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def cmd_segment(cfg: PipelineConfig) -> int:
    data_dir = Path(cfg.data_dir)
    if not data_dir.is_dir():
        raise DataError(f"data directory not found: {data_dir}")
    csv_paths = sorted(data_dir.glob("*.csv"))
    if not csv_paths:
        raise DataError(f"no .csv record files in {data_dir}")

    seg_cfg = cfg.segmentation_config()
    out_dir = Path(cfg.output_dir) / "segments"
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    index = 0
    for path in csv_paths:
        record = load_record(path, cfg.sample_rate_hz, skip_header=cfg.header)
        for segment in segment_record(record, seg_cfg):
            filename = f"seg_{index:06d}.spt"
            write_tensor(out_dir / filename, segment.samples)
            rows.append({
                "subject": segment.subject_id,
                "start": segment.start_index,
                "label": int(segment.label),
                "file": filename,
            })
            index += 1

    manifest = {
        "sample_rate_hz": cfg.sample_rate_hz,
        "window_samples": seg_cfg.window_samples(cfg.sample_rate_hz),
        "segments": rows,
    }
    _write_json(out_dir / "manifest.json", manifest)
    print(f"wrote {len(rows)} segments from {len(csv_paths)} record(s) to {out_dir}")
    return EXIT_OK


def cmd_spectrogram(cfg: PipelineConfig) -> int:
    seg_dir = Path(cfg.output_dir) / "segments"
    manifest = _read_json(seg_dir / "manifest.json")
    stft_cfg = cfg.stft_config()
    mode = cfg.normalize_mode()
    sample_rate = manifest["sample_rate_hz"]

    out_dir = Path(cfg.output_dir) / "images"
    out_dir.mkdir(parents=True, exist_ok=True)

    items = []
    for i, row in enumerate(manifest["segments"]):
        samples = read_tensor(seg_dir / row["file"])
        spec = compute_spectrogram(RealSignal(samples, sample_rate), stft_cfg)
        image = prepare_image(spec, mode).astype(cfg.dtype)
        filename = f"img_{i:06d}.spt"
        write_tensor(out_dir / filename, image)
        items.append({
            "subject": row["subject"],
            "start": row["start"],
            "label": row["label"],
            "file": filename,
        })

    _write_json(out_dir / "manifest.json", {
        "normalize": cfg.normalize,
        "stft": {"window_len": cfg.window_len, "hop": cfg.hop,
                 "nfft": cfg.nfft, "window": cfg.window},
        "items": items,
    })
    print(f"wrote {len(items)} image tensors to {out_dir}")
    return EXIT_OK


def _load_images(cfg: PipelineConfig):
    img_dir = Path(cfg.output_dir) / "images"
    manifest = _read_json(img_dir / "manifest.json")
    items = manifest["items"]
    if not items:
        raise DataError(f"{img_dir}: image manifest lists no items")
    scheme = cfg.task_scheme()
    first = read_tensor(img_dir / items[0]["file"])
    X = np.empty((len(items),) + first.shape, dtype=first.dtype)
    y = np.empty(len(items), dtype=np.int64)
    subjects = []
    for i, row in enumerate(items):
        X[i] = read_tensor(img_dir / row["file"])
        try:
            y[i] = scheme.class_index(AffectLabel(row["label"]))
        except ValueError:
            raise DataError(
                f"{img_dir}: item {i} has non-target label code {row['label']}"
            ) from None
        subjects.append(row["subject"])
    return X, y, np.array(subjects)


def _build_estimator(cfg: PipelineConfig):
    common = dict(epochs=cfg.epochs, batch_size=cfg.batch_size,
                  learning_rate=cfg.learning_rate, dropout=cfg.dropout,
                  random_state=cfg.seed, dtype=cfg.dtype)
    if cfg.mode == "sonic":
        return SonicClassifier(backbones=("plain", "residual"), **common)
    return BackboneClassifier(backbone=cfg.mode, **common)


def cmd_crossval(cfg: PipelineConfig) -> int:
    X, y, subjects = _load_images(cfg)
    estimator = _build_estimator(cfg)
    out_dir = Path(cfg.output_dir)
    ckpt_root = out_dir / "checkpoints" / f"{cfg.task}_{cfg.mode}"

    def save_fold(fold: int, fitted) -> None:
        save_classifier(fitted, ckpt_root / f"fold{fold}")

    report = cross_validate(
        estimator, X, y,
        n_folds=cfg.folds,
        seed=cfg.seed,
        task=cfg.task,
        groups=subjects if cfg.group_by_subject else None,
        config_echo=cfg.echo_dict(),
        fold_callback=save_fold,
    )
    metrics_path = out_dir / f"metrics_{cfg.task}_{cfg.mode}.json"
    _write_json(metrics_path, report)
    print(f"mean accuracy {report['mean_accuracy']:.2f}% | "
          f"mean macro-F1 {report['mean_macro_f1']:.2f}% -> {metrics_path}")
    return EXIT_OK


def _model_label(echo: dict) -> str:
    mode = echo.get("run", {}).get("mode", "?")
    if mode == "sonic":
        return "sonic (plain+residual)"
    return mode


def render_report_table(reports: list[dict]) -> str:
    """Comparison table: one row per model, accuracy and macro-F1 columns
    for both tasks, sorted by 2-class accuracy ascending."""
    rows: dict[str, dict[str, tuple[float, float]]] = {}
    for report in reports:
        task = report.get("task")
        if task not in ("2class", "3class"):
            raise DataError(f"metrics JSON has unknown task {task!r}")
        label = _model_label(report.get("config_echo", {}))
        rows.setdefault(label, {})[task] = (
            float(report["mean_accuracy"]), float(report["mean_macro_f1"]))

    def sort_key(item):
        two = item[1].get("2class")
        return two[0] if two else float("-inf")

    def cell(value) -> str:
        return f"{value:.2f}" if value is not None else "------"

    width = max([len(label) for label in rows] + [len("Model")])
    header = f"{'Model':<{width}}  {'A(2)':>7} {'F(2)':>7} {'A(3)':>7} {'F(3)':>7}"
    lines = [header, "-" * len(header)]
    for label, by_task in sorted(rows.items(), key=sort_key):
        two = by_task.get("2class", (None, None))
        three = by_task.get("3class", (None, None))
        lines.append(
            f"{label:<{width}}  {cell(two[0]):>7} {cell(two[1]):>7} "
            f"{cell(three[0]):>7} {cell(three[1]):>7}"
        )
    return "\n".join(lines)


def cmd_report(paths: list[str], out: str | None) -> int:
    reports = [_read_json(Path(p)) for p in paths]
    table = render_report_table(reports)
    if out:
        Path(out).write_text(table + "\n", encoding="ascii")
    print(table)
    return EXIT_OK


def cmd_export_repr(cfg: PipelineConfig, checkpoint: str, out: str) -> int:
    ckpt = Path(checkpoint)
    if not ckpt.is_dir():
        raise DataError(f"checkpoint directory not found: {ckpt}")
    try:
        estimator = load_classifier(ckpt)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot load checkpoint {ckpt}: {exc}") from None
    X, _, _ = _load_images(cfg)
    representations = estimator.penultimate(X)
    write_tensor(out, representations)
    print(f"wrote {representations.shape[0]}x{representations.shape[1]} "
          f"representation matrix to {out}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sonic-ecg",
        description="Signal-to-spectrogram stress classification pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="path to the INI configuration file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output directory override")

    p_seg = sub.add_parser("segment", help="cut CSV records into labeled segments")
    add_common(p_seg)
    p_seg.add_argument("--data-dir", help="directory of <subject>.csv files")
    p_seg.add_argument("--header", action="store_true",
                       help="skip the first line of every CSV")

    p_spec = sub.add_parser("spectrogram", help="segments -> prepared image tensors")
    add_common(p_spec)

    p_cv = sub.add_parser("crossval", help="stratified k-fold train/evaluate")
    add_common(p_cv)
    p_cv.add_argument("--task", choices=["2class", "3class"])
    p_cv.add_argument("--mode", choices=["sonic", "plain", "residual"])
    p_cv.add_argument("--group-by-subject", action="store_true",
                      help="assign whole subjects to folds")

    p_rep = sub.add_parser("report", help="render a comparison table from metrics JSONs")
    p_rep.add_argument("metrics", nargs="+", help="metrics JSON files")
    p_rep.add_argument("--out", help="also write the table to this file")

    p_exp = sub.add_parser("export-repr",
                           help="export penultimate-layer representations")
    p_exp.add_argument("--config", help="path to the INI configuration file")
    p_exp.add_argument("--checkpoint", required=True, help="checkpoint directory")
    p_exp.add_argument("--out", help="output tensor file for the representation matrix")

    return parser


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None and args.command in (
            "segment", "spectrogram", "crossval"):
        cfg.output_dir = Path(args.out)
    if getattr(args, "data_dir", None) is not None:
        cfg.data_dir = Path(args.data_dir)
    if getattr(args, "header", False):
        cfg.header = True
    if getattr(args, "task", None) is not None:
        cfg.task = args.task
    if getattr(args, "mode", None) is not None:
        cfg.mode = args.mode
    if getattr(args, "group_by_subject", False):
        cfg.group_by_subject = True
    return cfg.validate()


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args.metrics, args.out)
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "segment":
            return cmd_segment(cfg)
        if args.command == "spectrogram":
            return cmd_spectrogram(cfg)
        if args.command == "crossval":
            return cmd_crossval(cfg)
        if args.command == "export-repr":
            out = args.out or str(Path(cfg.output_dir) / "representations.spt")
            return cmd_export_repr(cfg, args.checkpoint, out)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, CsvParseError, TensorFormatError, SignalTooShortError,
            FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FloatingPointError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
