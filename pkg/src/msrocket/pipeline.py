"""Signal preprocessing and epoching.

Records are resampled to 64 Hz behind a zero-phase FIR anti-alias filter,
robustly normalized with training-set median/IQR, cut into 2-second
(128-sample) windows at the training or testing hop, and labeled per epoch:
training epochs keep only near-pure windows (dominant class fraction
strictly above the threshold), test epochs are labeled by sample majority
so every test window is scoreable.

Anti-alias design: Kaiser-window FIR, 70 dB design attenuation, passband
edge at 25.6 Hz (80% of the new Nyquist) with a 6.4 Hz transition, applied
forward-backward (scipy filtfilt), so the effective stopband rejection is
roughly doubled.

Record interchange format: ``<subject_id>.csv`` with header
``time_s,value,label`` (label in {B, IB, U}) plus a JSON sidecar
``<subject_id>.json`` holding {"subject_id", "sample_rate"}.
"""

import csv
import functools
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.signal

from .errors import (
    DataError,
    DegenerateSignalError,
    InvalidArgumentError,
    UnsupportedRateError,
)

TARGET_RATE_HZ = 64
EPOCH_SECONDS = 2.0
EPOCH_SAMPLES = 128

#: Per-sample annotation / per-epoch label codes.
BURST = -1
INTER_BURST = 1
UNLABELED = 0
DROPPED = 0

TRAIN_HOP_S = 0.5
TEST_HOP_S = 0.125
LABEL_THRESHOLD = 0.9

_LABEL_TO_CODE = {"B": BURST, "IB": INTER_BURST, "U": UNLABELED}
_CODE_TO_LABEL = {BURST: "B", INTER_BURST: "IB", UNLABELED: "U"}


@dataclass
class AnnotatedRecord:
    """One subject's continuous signal with per-sample annotations."""

    subject_id: str
    samples: np.ndarray
    sample_rate: float
    annotations: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.annotations = np.asarray(self.annotations, dtype=np.int8)
        if self.samples.ndim != 1 or self.annotations.ndim != 1:
            raise InvalidArgumentError("samples and annotations must be 1-D")
        if self.samples.shape[0] != self.annotations.shape[0]:
            raise InvalidArgumentError(
                f"{self.subject_id}: {self.samples.shape[0]} samples but "
                f"{self.annotations.shape[0]} annotations"
            )
        if not self.sample_rate > 0:
            raise InvalidArgumentError("sample_rate must be > 0")

    @property
    def duration_s(self):
        return self.samples.shape[0] / self.sample_rate


@dataclass
class EpochedDataset:
    """Fixed-length windows with labels and provenance."""

    epochs: np.ndarray
    labels: np.ndarray
    subject_ids: list
    epoch_start_times: np.ndarray

    def __len__(self):
        return self.epochs.shape[0]

    def select(self, mask):
        mask = np.asarray(mask)
        ids = [sid for sid, keep in zip(self.subject_ids, mask) if keep]
        return EpochedDataset(
            epochs=self.epochs[mask],
            labels=self.labels[mask],
            subject_ids=ids,
            epoch_start_times=self.epoch_start_times[mask],
        )

    def labeled(self):
        """Subset with a burst/inter-burst label (drops DROPPED epochs)."""
        return self.select(self.labels != DROPPED)


def concatenate_datasets(datasets):
    """Stack epoch datasets; all must share the epoch length."""
    datasets = [d for d in datasets if len(d) > 0]
    if not datasets:
        return EpochedDataset(
            epochs=np.empty((0, EPOCH_SAMPLES)),
            labels=np.empty(0, dtype=np.int8),
            subject_ids=[],
            epoch_start_times=np.empty(0),
        )
    ids = []
    for d in datasets:
        ids.extend(d.subject_ids)
    return EpochedDataset(
        epochs=np.concatenate([d.epochs for d in datasets], axis=0),
        labels=np.concatenate([d.labels for d in datasets]),
        subject_ids=ids,
        epoch_start_times=np.concatenate(
            [d.epoch_start_times for d in datasets]
        ),
    )


@dataclass
class NormStats:
    """Robust normalization statistics captured on the training set."""

    median: float
    iqr: float

    def __post_init__(self):
        if not self.iqr > 0:
            raise DegenerateSignalError(f"IQR must be > 0, got {self.iqr}")


@functools.lru_cache(maxsize=8)
def _antialias_taps(rate):
    """Kaiser FIR low-pass taps for decimation from `rate` to 64 Hz."""
    nyquist = rate / 2.0
    cutoff_hz = 0.8 * (TARGET_RATE_HZ / 2.0)
    transition_hz = (TARGET_RATE_HZ / 2.0) - cutoff_hz
    numtaps, beta = scipy.signal.kaiserord(70.0, transition_hz / nyquist)
    numtaps |= 1
    return scipy.signal.firwin(
        numtaps, cutoff_hz, window=("kaiser", beta), fs=rate
    )


def resample_to_64hz(record):
    """Anti-alias filter then integer-decimate a record to 64 Hz.

    Annotations are decimated by the same factor, keeping them aligned with
    the surviving samples. A record already at 64 Hz is returned unchanged.
    """
    rate = float(record.sample_rate)
    if not (rate / TARGET_RATE_HZ).is_integer():
        raise UnsupportedRateError(
            f"{record.subject_id}: sample rate {rate} Hz is not an integer "
            f"multiple of {TARGET_RATE_HZ} Hz"
        )
    factor = int(rate / TARGET_RATE_HZ)
    if factor == 1:
        return record
    taps = _antialias_taps(rate)
    padlen = min(3 * len(taps), record.samples.shape[0] - 1)
    filtered = scipy.signal.filtfilt(taps, [1.0], record.samples,
                                     padlen=padlen)
    return AnnotatedRecord(
        subject_id=record.subject_id,
        samples=filtered[::factor],
        sample_rate=float(TARGET_RATE_HZ),
        annotations=record.annotations[::factor],
    )


def compute_norm_stats(training_samples):
    """Median and interquartile range via linear-interpolation quantiles."""
    x = np.asarray(training_samples, dtype=np.float64).ravel()
    if x.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 samples for statistics")
    if not np.isfinite(x).all():
        raise DataError("training samples contain non-finite values")
    q25, q50, q75 = np.quantile(x, [0.25, 0.5, 0.75])
    return NormStats(median=float(q50), iqr=float(q75 - q25))


def normalize(x, stats):
    """(x - median) / IQR, element-wise."""
    return (np.asarray(x, dtype=np.float64) - stats.median) / stats.iqr


def normalize_record(record, stats):
    """Record with normalized samples; annotations untouched."""
    return AnnotatedRecord(
        subject_id=record.subject_id,
        samples=normalize(record.samples, stats),
        sample_rate=record.sample_rate,
        annotations=record.annotations,
    )


def epoch_signal(record, hop_seconds):
    """Cut a 64 Hz record into 128-sample windows at the given hop.

    Starts lie at multiples of the hop; a trailing partial window is
    discarded. Labels are left unset (DROPPED) for label_epochs to fill.
    """
    if record.sample_rate != TARGET_RATE_HZ:
        raise InvalidArgumentError(
            f"{record.subject_id}: epoching expects {TARGET_RATE_HZ} Hz, "
            f"got {record.sample_rate}"
        )
    hop = hop_seconds * TARGET_RATE_HZ
    hop_samples = int(round(hop))
    if hop_samples < 1 or abs(hop - hop_samples) > 1e-9:
        raise InvalidArgumentError(
            f"hop of {hop_seconds} s is not a whole number of samples "
            f"at {TARGET_RATE_HZ} Hz"
        )
    n = record.samples.shape[0]
    if n < EPOCH_SAMPLES:
        warnings.warn(
            f"{record.subject_id}: record shorter than one epoch; "
            "empty dataset returned"
        )
        starts = np.empty(0, dtype=np.int64)
    else:
        starts = np.arange(0, n - EPOCH_SAMPLES + 1, hop_samples,
                           dtype=np.int64)
    epochs = record.samples[starts[:, None] + np.arange(EPOCH_SAMPLES)]
    return EpochedDataset(
        epochs=epochs.reshape(len(starts), EPOCH_SAMPLES),
        labels=np.zeros(len(starts), dtype=np.int8),
        subject_ids=[record.subject_id] * len(starts),
        epoch_start_times=starts / float(TARGET_RATE_HZ),
    )


def label_epochs(dataset, annotations, threshold=LABEL_THRESHOLD,
                 mode="train"):
    """Assign per-epoch labels from per-sample annotations.

    train mode: an epoch is labeled with the class whose sample fraction
    strictly exceeds `threshold`, otherwise it is DROPPED.

    test mode: each epoch is labeled by majority over its burst and
    inter-burst samples; a tie goes to inter-burst (the detection class),
    and an epoch with no labeled samples at all is DROPPED since it cannot
    be scored.
    """
    if mode not in ("train", "test"):
        raise InvalidArgumentError(f"mode must be 'train' or 'test', got {mode!r}")
    if not (0.5 < threshold <= 1.0):
        raise InvalidArgumentError(
            f"threshold must lie in (0.5, 1], got {threshold}"
        )
    annotations = np.asarray(annotations, dtype=np.int8)
    starts = np.round(dataset.epoch_start_times * TARGET_RATE_HZ).astype(
        np.int64
    )
    if len(starts) and starts.max() + EPOCH_SAMPLES > annotations.shape[0]:
        raise InvalidArgumentError("annotations shorter than the epoch span")
    windows = annotations[starts[:, None] + np.arange(EPOCH_SAMPLES)]
    windows = windows.reshape(len(starts), EPOCH_SAMPLES)
    n_burst = (windows == BURST).sum(axis=1)
    n_inter = (windows == INTER_BURST).sum(axis=1)

    labels = np.full(len(starts), DROPPED, dtype=np.int8)
    if mode == "train":
        labels[n_burst > threshold * EPOCH_SAMPLES] = BURST
        labels[n_inter > threshold * EPOCH_SAMPLES] = INTER_BURST
    else:
        labels[n_burst > n_inter] = BURST
        labels[(n_inter >= n_burst) & (n_inter > 0)] = INTER_BURST
    return EpochedDataset(
        epochs=dataset.epochs,
        labels=labels,
        subject_ids=list(dataset.subject_ids),
        epoch_start_times=dataset.epoch_start_times,
    )


def write_record(record, directory):
    """Write the CSV + JSON sidecar pair; returns the CSV path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{record.subject_id}.csv"
    sidecar_path = directory / f"{record.subject_id}.json"
    rate = record.sample_rate
    values = record.samples.tolist()
    codes = record.annotations.tolist()
    lines = ["time_s,value,label\n"]
    for i, (value, code) in enumerate(zip(values, codes)):
        lines.append(f"{i / rate:.8f},{value!r},{_CODE_TO_LABEL[code]}\n")
    with open(csv_path, "w", encoding="ascii") as fh:
        fh.writelines(lines)
    sidecar = {"subject_id": record.subject_id, "sample_rate": rate}
    with open(sidecar_path, "w", encoding="ascii") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")
    return csv_path


def read_record(csv_path):
    """Read one CSV + sidecar pair back into an AnnotatedRecord."""
    csv_path = Path(csv_path)
    sidecar_path = csv_path.with_suffix(".json")
    if not sidecar_path.exists():
        raise DataError(f"{csv_path}: missing sidecar {sidecar_path.name}")
    try:
        with open(sidecar_path, "r", encoding="ascii") as fh:
            sidecar = json.load(fh)
        subject_id = str(sidecar["subject_id"])
        sample_rate = float(sidecar["sample_rate"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{sidecar_path}: malformed sidecar: {exc}") from exc

    values = []
    labels = []
    with open(csv_path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["time_s", "value", "label"]:
            raise DataError(
                f"{csv_path}, line 1: expected header 'time_s,value,label'"
            )
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise DataError(
                    f"{csv_path}, line {lineno}: expected 3 fields, "
                    f"got {len(row)}"
                )
            try:
                values.append(float(row[1]))
            except ValueError:
                raise DataError(
                    f"{csv_path}, line {lineno}: bad value {row[1]!r}"
                ) from None
            code = _LABEL_TO_CODE.get(row[2])
            if code is None:
                raise DataError(
                    f"{csv_path}, line {lineno}: unknown label {row[2]!r}"
                )
            labels.append(code)
    return AnnotatedRecord(
        subject_id=subject_id,
        samples=np.array(values, dtype=np.float64),
        sample_rate=sample_rate,
        annotations=np.array(labels, dtype=np.int8),
    )


def read_cohort(directory):
    """Read every record pair in a directory, sorted by subject id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"cohort directory {directory} does not exist")
    csv_paths = sorted(directory.glob("*.csv"))
    records = [read_record(p) for p in csv_paths]
    if not records:
        raise DataError(f"no record files found in {directory}")
    records.sort(key=lambda r: r.subject_id)
    return records
