"""Time-series ingest: CSV loading, fixed-length overlapping windows,
per-window per-channel features, and train/test splits.

Feature columns are grouped contiguously by channel (mean, std, min, max per
channel), so masking a channel out removes exactly one contiguous block of
columns.
"""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    EmptyFile,
    EmptySplit,
    EmptyWindowSet,
    MissingColumn,
    NonNumericCell,
    NonPositiveStride,
    WindowLargerThanRecording,
)

FEATURES_PER_CHANNEL = 4
FEATURE_NAMES = ("mean", "std", "min", "max")


@dataclass(frozen=True)
class DatasetSchema:
    """Descriptor for a time-series CSV (one row per sample)."""

    sampling_rate_hz: float
    label_column: str
    channel_columns: tuple[str, ...]
    window_seconds: float
    overlap_seconds: float
    classes: tuple[str, ...] = ()
    segment_column: str | None = None

    @classmethod
    def from_json(cls, path) -> "DatasetSchema":
        with open(path) as fh:
            doc = json.load(fh)
        return cls(
            sampling_rate_hz=float(doc["sampling_rate_hz"]),
            label_column=doc["label_column"],
            channel_columns=tuple(doc["channel_columns"]),
            window_seconds=float(doc["window_seconds"]),
            overlap_seconds=float(doc["overlap_seconds"]),
            classes=tuple(doc.get("classes", ())),
            segment_column=doc.get("segment_column"),
        )


@dataclass
class RawRecording:
    """Aligned multichannel samples with per-sample class labels."""

    channel_names: list[str]
    sampling_rate: float
    samples: np.ndarray  # shape (n_channels, T)
    labels: np.ndarray  # shape (T,), int class ids
    segment_ids: np.ndarray | None = None  # shape (T,), optional

    def __post_init__(self):
        if self.sampling_rate <= 0:
            raise ValueError("sampling_rate must be > 0")
        if self.samples.ndim != 2 or self.samples.shape[0] != len(self.channel_names):
            raise ValueError("samples must be an (n_channels, T) array")
        if self.labels.shape[0] != self.samples.shape[1]:
            raise ValueError("labels must align with samples")

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


@dataclass
class WindowedSamples:
    """Raw sample windows before feature extraction."""

    windows: np.ndarray  # shape (W, n_channels, L)
    labels: np.ndarray  # shape (W,)
    segment_ids: np.ndarray  # shape (W,)
    channel_names: list[str]
    sampling_rate: float
    window_seconds: float
    overlap_seconds: float


@dataclass
class WindowedFeatureSet:
    """Per-window feature matrix, channel-major column layout."""

    features: np.ndarray  # shape (W, n_channels * FEATURES_PER_CHANNEL)
    labels: np.ndarray  # shape (W,)
    segment_ids: np.ndarray  # shape (W,)
    channel_names: list[str]
    window_seconds: float
    overlap_seconds: float
    features_per_channel: int = FEATURES_PER_CHANNEL

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    @property
    def n_windows(self) -> int:
        return self.features.shape[0]

    def columns_for(self, channel_index: int) -> slice:
        fpc = self.features_per_channel
        return slice(channel_index * fpc, (channel_index + 1) * fpc)


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split policy: a seeded random fraction or explicit segments."""

    train_fraction: float | None = None
    seed: int = 0
    train_segments: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.train_fraction is None) == (self.train_segments is None):
            raise ValueError("specify exactly one of train_fraction or train_segments")
        if self.train_fraction is not None and not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0,1)")

    def split(
        self, labels: np.ndarray, segment_ids: np.ndarray | None = None
    ) -> tuple[np.ndarray, np.ndarray]:
        count = labels.shape[0]
        if self.train_fraction is not None:
            rng = np.random.default_rng(self.seed)
            perm = rng.permutation(count)
            n_train = int(round(self.train_fraction * count))
            train_idx, test_idx = np.sort(perm[:n_train]), np.sort(perm[n_train:])
        else:
            if segment_ids is None:
                raise EmptySplit("segment split requested but windows carry no segment ids")
            mask = np.isin(segment_ids, self.train_segments)
            train_idx = np.flatnonzero(mask)
            test_idx = np.flatnonzero(~mask)
        if train_idx.size == 0 or test_idx.size == 0:
            raise EmptySplit(f"split left train={train_idx.size}, test={test_idx.size} windows")
        return train_idx, test_idx


def _majority(values: np.ndarray) -> int:
    # ties break toward the lowest id
    counts = Counter(values.tolist())
    top = max(counts.values())
    return min(v for v, c in counts.items() if c == top)


def window_signal(
    rec: RawRecording, window_seconds: float, overlap_seconds: float
) -> WindowedSamples:
    """Segment a recording into overlapping windows; trailing partial windows
    are dropped. Window labels are the majority sample label."""
    if not 0 <= overlap_seconds < window_seconds:
        raise NonPositiveStride(
            f"need 0 <= overlap ({overlap_seconds}) < window ({window_seconds})"
        )
    rate = rec.sampling_rate
    win_len_f = window_seconds * rate
    stride_f = (window_seconds - overlap_seconds) * rate
    if abs(win_len_f - round(win_len_f)) > 1e-9 or abs(stride_f - round(stride_f)) > 1e-9:
        raise ValueError("window and stride must cover a whole number of samples")
    win_len = int(round(win_len_f))
    stride = int(round(stride_f))
    total = rec.n_samples
    if win_len > total:
        raise WindowLargerThanRecording(
            f"window of {win_len} samples exceeds recording of {total}"
        )
    count = (total - win_len) // stride + 1
    windows = np.empty((count, rec.n_channels, win_len), dtype=float)
    labels = np.empty(count, dtype=int)
    segments = np.zeros(count, dtype=int)
    for w in range(count):
        start = w * stride
        windows[w] = rec.samples[:, start : start + win_len]
        labels[w] = _majority(rec.labels[start : start + win_len])
        if rec.segment_ids is not None:
            segments[w] = _majority(rec.segment_ids[start : start + win_len])
    return WindowedSamples(
        windows=windows,
        labels=labels,
        segment_ids=segments,
        channel_names=list(rec.channel_names),
        sampling_rate=rate,
        window_seconds=window_seconds,
        overlap_seconds=overlap_seconds,
    )


def extract_features(ws: WindowedSamples) -> WindowedFeatureSet:
    """Per channel per window: mean, population std, min, max."""
    if ws.windows.shape[0] == 0:
        raise EmptyWindowSet("no windows to extract features from")
    stats = np.stack(
        [
            ws.windows.mean(axis=2),
            ws.windows.std(axis=2),  # population convention (divide by N)
            ws.windows.min(axis=2),
            ws.windows.max(axis=2),
        ],
        axis=2,
    )  # (W, n, F) with F-contiguous per channel
    count, n_channels, _ = stats.shape
    features = stats.reshape(count, n_channels * FEATURES_PER_CHANNEL)
    return WindowedFeatureSet(
        features=features,
        labels=ws.labels.copy(),
        segment_ids=ws.segment_ids.copy(),
        channel_names=list(ws.channel_names),
        window_seconds=ws.window_seconds,
        overlap_seconds=ws.overlap_seconds,
    )


def load_csv(path, schema: DatasetSchema) -> RawRecording:
    """Load a one-row-per-sample CSV per the schema; missing values rejected."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path} is empty")
        header = [h.strip() for h in header]
        for col in (schema.label_column, *schema.channel_columns):
            if col not in header:
                raise MissingColumn(col)
        if schema.segment_column is not None and schema.segment_column not in header:
            raise MissingColumn(schema.segment_column)
        chan_idx = [header.index(c) for c in schema.channel_columns]
        label_idx = header.index(schema.label_column)
        seg_idx = header.index(schema.segment_column) if schema.segment_column else None

        columns: list[list[float]] = [[] for _ in chan_idx]
        labels: list[int] = []
        segments: list[int] = []
        class_ids = {name: i for i, name in enumerate(schema.classes)}
        for row_no, row in enumerate(reader):
            if not row or all(not cell.strip() for cell in row):
                continue
            for pos, col in zip(chan_idx, schema.channel_columns):
                try:
                    value = float(row[pos])
                except (ValueError, IndexError):
                    raise NonNumericCell(row_no, col) from None
                if not math.isfinite(value):
                    raise NonNumericCell(row_no, col)
                columns[schema.channel_columns.index(col)].append(value)
            raw_label = row[label_idx].strip()
            if raw_label in class_ids:
                labels.append(class_ids[raw_label])
            else:
                try:
                    labels.append(int(raw_label))
                except ValueError:
                    raise NonNumericCell(row_no, schema.label_column) from None
            if seg_idx is not None:
                try:
                    segments.append(int(row[seg_idx]))
                except ValueError:
                    raise NonNumericCell(row_no, schema.segment_column) from None
    if not labels:
        raise EmptyFile(f"{path} has no data rows")
    return RawRecording(
        channel_names=list(schema.channel_columns),
        sampling_rate=schema.sampling_rate_hz,
        samples=np.asarray(columns, dtype=float),
        labels=np.asarray(labels, dtype=int),
        segment_ids=np.asarray(segments, dtype=int) if segments else None,
    )
