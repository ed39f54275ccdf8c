"""Loading labeled ECG records from CSV and cutting them into segments.

The on-disk contract is one CSV per subject (``<subject_id>.csv``), two
comma-separated columns per line: a decimal sample value and an integer
label code 0-7. Codes 1, 2, 3 are the target classes (baseline, stress,
amusement); every other code marks material that never yields a segment.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp import RealSignal

__all__ = [
    "AffectLabel",
    "TaskScheme",
    "EcgRecord",
    "SegmentationConfig",
    "Segment",
    "CsvParseError",
    "load_record",
    "segment_record",
    "map_task_labels",
]

DEFAULT_SAMPLE_RATE_HZ = 700.0

_MIN_LABEL_CODE = 0
_MAX_LABEL_CODE = 7


class CsvParseError(ValueError):
    """Raised for malformed record files; the message names file and line."""


class AffectLabel(enum.IntEnum):
    """Target affect classes, valued by their file label codes."""

    BASELINE = 1
    STRESS = 2
    AMUSEMENT = 3


class TaskScheme(enum.Enum):
    """Classification task: stress-vs-rest or all three affect classes."""

    TWO_CLASS = "2class"
    THREE_CLASS = "3class"

    @property
    def n_classes(self) -> int:
        return 2 if self is TaskScheme.TWO_CLASS else 3

    def class_index(self, label: AffectLabel) -> int:
        if self is TaskScheme.TWO_CLASS:
            return 1 if label is AffectLabel.STRESS else 0
        return {AffectLabel.BASELINE: 0, AffectLabel.STRESS: 1, AffectLabel.AMUSEMENT: 2}[label]


@dataclass
class EcgRecord:
    subject_id: str
    signal: RealSignal
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (len(self.signal),):
            raise ValueError(
                f"labels length {self.labels.size} != signal length {len(self.signal)}"
            )


@dataclass(frozen=True)
class SegmentationConfig:
    window_seconds: float = 5.0
    stride_seconds: float = 2.0

    def __post_init__(self) -> None:
        if not self.window_seconds > 0:
            raise ValueError(f"window_seconds must be > 0, got {self.window_seconds}")
        if not self.stride_seconds > 0:
            raise ValueError(f"stride_seconds must be > 0, got {self.stride_seconds}")

    def window_samples(self, sample_rate_hz: float) -> int:
        n = round(self.window_seconds * sample_rate_hz)
        if n < 1:
            raise ValueError("window_seconds is below one sample at this rate")
        return n

    def stride_samples(self, sample_rate_hz: float) -> int:
        n = round(self.stride_seconds * sample_rate_hz)
        if n < 1:
            raise ValueError("stride_seconds is below one sample at this rate")
        return n


@dataclass
class Segment:
    samples: np.ndarray
    label: AffectLabel
    subject_id: str
    start_index: int


def load_record(
    path: str | Path,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
    skip_header: bool = False,
) -> EcgRecord:
    """Parse one subject CSV into an :class:`EcgRecord`.

    Raises :class:`CsvParseError` (naming the offending line) for missing
    files, malformed rows, non-finite samples, or label codes outside 0-7.
    """
    path = Path(path)
    if not path.is_file():
        raise CsvParseError(f"{path}: no such file")

    samples: list[float] = []
    codes: list[int] = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1 and skip_header:
                continue
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise CsvParseError(
                    f"{path}:{lineno}: expected 'sample,label', got {line!r}"
                )
            try:
                value = float(parts[0])
            except ValueError:
                raise CsvParseError(
                    f"{path}:{lineno}: sample {parts[0]!r} is not a number"
                ) from None
            if not math.isfinite(value):
                raise CsvParseError(f"{path}:{lineno}: sample {parts[0]!r} is not finite")
            try:
                code = int(parts[1])
            except ValueError:
                raise CsvParseError(
                    f"{path}:{lineno}: label {parts[1]!r} is not an integer"
                ) from None
            if not _MIN_LABEL_CODE <= code <= _MAX_LABEL_CODE:
                raise CsvParseError(
                    f"{path}:{lineno}: label code {code} outside "
                    f"{_MIN_LABEL_CODE}-{_MAX_LABEL_CODE}"
                )
            samples.append(value)
            codes.append(code)

    if not samples:
        raise CsvParseError(f"{path}: file contains no data rows")
    return EcgRecord(
        subject_id=path.stem,
        signal=RealSignal(np.array(samples), sample_rate_hz),
        labels=np.array(codes),
    )


def segment_record(
    record: EcgRecord, cfg: SegmentationConfig = SegmentationConfig()
) -> list[Segment]:
    """Cut a record into fixed-length segments at regular strides.

    Candidate windows start at 0, s, 2s, ...; a window is kept only if
    every sample in it carries the same target-class label code. Mixed or
    non-target windows are dropped. A record shorter than one window
    yields an empty list.
    """
    fs = record.signal.sample_rate_hz
    window = cfg.window_samples(fs)
    stride = cfg.stride_samples(fs)
    n = len(record.signal)
    if n < window:
        return []

    target_codes = {int(label) for label in AffectLabel}
    segments = []
    for start in range(0, n - window + 1, stride):
        window_codes = record.labels[start : start + window]
        first = int(window_codes[0])
        if first not in target_codes:
            continue
        if not np.all(window_codes == first):
            continue
        segments.append(
            Segment(
                samples=record.signal.samples[start : start + window].copy(),
                label=AffectLabel(first),
                subject_id=record.subject_id,
                start_index=start,
            )
        )
    return segments


def map_task_labels(
    segments: list[Segment], scheme: TaskScheme
) -> list[tuple[Segment, int]]:
    """Pair each segment with its class index under ``scheme``, in order."""
    return [(seg, scheme.class_index(seg.label)) for seg in segments]
