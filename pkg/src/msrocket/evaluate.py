"""Subject-wise evaluation: MCC, exact Wilcoxon signed-rank, and the
leave-one-subject-out cross-validation loop.

Each fold trains on all other subjects (training hop, purity-thresholded
labels, pooled median/IQR statistics, ridge with the configured alpha) and
scores the held-out subject densely at the testing hop. MCC is computed
from the held-out subject's own confusion counts. Variant comparisons pair
per-subject MCC values by subject id and use the exact signed-rank null
distribution up to n = 25 non-zero differences (sign-flip enumeration with
mid-ranks), switching to the tie- and continuity-corrected normal
approximation above that.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.stats

from .classifier import fit_ridge, predict
from .config import RunConfig
from .errors import (
    InvalidArgumentError,
    InvalidConfigurationError,
    UndefinedTestError,
)
from .kernels import generate_kernels
from .pipeline import (
    EPOCH_SAMPLES,
    INTER_BURST,
    compute_norm_stats,
    concatenate_datasets,
    epoch_signal,
    label_epochs,
    normalize_record,
    resample_to_64hz,
)
from .transform import transform_dataset
from .variants import Variant, parse_variant

_REPORT_FORMAT = "msrocket-cv-report"
_REPORT_VERSION = 1

#: Inter-burst is the detection target and therefore the positive class.
POSITIVE_CLASS = INTER_BURST


@dataclass
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"{name} must be >= 0")

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, y_true, y_pred, positive=POSITIVE_CLASS):
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        if y_true.shape != y_pred.shape:
            raise InvalidArgumentError("prediction/truth length mismatch")
        t = y_true == positive
        p = y_pred == positive
        return cls(
            tp=int(np.count_nonzero(t & p)),
            fp=int(np.count_nonzero(~t & p)),
            tn=int(np.count_nonzero(~t & ~p)),
            fn=int(np.count_nonzero(t & ~p)),
        )


def mcc(counts):
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    if counts.total == 0:
        raise InvalidArgumentError("confusion counts are all zero")
    tp, fp, tn, fn = counts.tp, counts.fp, counts.tn, counts.fn
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return float((tp * tn - fp * fn) / math.sqrt(denom))


def _exact_two_sided_p(doubled_ranks, doubled_w):
    """P(|W - E[W]| >= |w - E[W]|) by sign-flip convolution.

    Works on doubled ranks so mid-ranks stay on an integer grid. The W+
    null distribution is symmetric about half the rank total, so the
    two-sided mass is the two matching tails.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        shifted = counts.copy()
        shifted[r:] += counts[: total + 1 - r]
        counts = shifted
    lo = min(doubled_w, total - doubled_w)
    hi = total - lo
    mass = counts[: lo + 1].sum() + counts[hi:].sum()
    return min(1.0, float(mass) / float(counts.sum()))


def wilcoxon_signed_rank(a, b):
    """Two-sided paired signed-rank p-value.

    Zero differences are removed; ties get mid-ranks. Exact enumeration is
    used for up to 25 non-zero differences, the corrected normal
    approximation beyond.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise InvalidArgumentError("paired samples must have equal length")
    d = a - b
    d = d[d != 0.0]
    n = d.shape[0]
    if n == 0:
        raise UndefinedTestError("all paired differences are zero")
    if n < 5:
        raise InvalidArgumentError(
            f"need at least 5 non-zero differences, got {n}"
        )
    ranks = scipy.stats.rankdata(np.abs(d))
    w_pos = float(ranks[d > 0].sum())
    if n <= 25:
        doubled = np.round(2.0 * ranks).astype(np.int64)
        return _exact_two_sided_p(doubled, int(round(2.0 * w_pos)))
    mu = ranks.sum() / 2.0
    sigma = math.sqrt(float((ranks ** 2).sum()) / 4.0)
    delta = abs(w_pos - mu) - 0.5
    if delta <= 0.0:
        return 1.0
    return min(1.0, math.erfc(delta / sigma / math.sqrt(2.0)))


def summarize_mcc(values):
    """Median, IQR bounds and range of a set of per-subject MCCs."""
    arr = np.asarray(sorted(values), dtype=np.float64)
    if arr.size == 0:
        raise InvalidArgumentError("no values to summarize")
    q25, q50, q75 = np.quantile(arr, [0.25, 0.5, 0.75])
    return {
        "median": float(q50),
        "iqr_low": float(q25),
        "iqr_high": float(q75),
        "min": float(arr.min()),
        "max": float(arr.max()),
    }


@dataclass
class CvReport:
    """Per-subject MCCs for one variant plus their summary statistics."""

    variant: Variant
    per_subject_mcc: dict
    summary: dict
    degenerate_subjects: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def subject_ids(self):
        return sorted(self.per_subject_mcc)

    def to_json(self):
        doc = {
            "format": _REPORT_FORMAT,
            "version": _REPORT_VERSION,
            "variant": self.variant.value,
            "per_subject_mcc": {
                k: self.per_subject_mcc[k] for k in sorted(self.per_subject_mcc)
            },
            "summary": self.summary,
            "degenerate_subjects": sorted(self.degenerate_subjects),
            "config": self.config,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("format") != _REPORT_FORMAT:
            raise InvalidArgumentError("not a CV report file")
        if doc.get("version") != _REPORT_VERSION:
            raise InvalidArgumentError(
                f"unsupported report version {doc.get('version')!r}"
            )
        return cls(
            variant=parse_variant(doc["variant"]),
            per_subject_mcc={
                str(k): float(v) for k, v in doc["per_subject_mcc"].items()
            },
            summary={str(k): float(v) for k, v in doc["summary"].items()},
            degenerate_subjects=list(doc.get("degenerate_subjects", [])),
            config=doc.get("config", {}),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def write_csv(self, path):
        """Per-subject MCC table for plotting."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("subject_id,variant,mcc\n")
            for sid in self.subject_ids():
                fh.write(f"{sid},{self.variant.value},"
                         f"{self.per_subject_mcc[sid]!r}\n")


def leave_one_out(cohort, config=None, artifacts_dir=None):
    """Leave-one-subject-out CV over a cohort of AnnotatedRecords.

    With `artifacts_dir` set, the kernel set plus each fold's trained
    model and held-out feature matrix are written there in their
    versioned file formats.
    """
    if config is None:
        config = RunConfig()
    if len(cohort) < 2:
        raise InvalidConfigurationError(
            f"leave-one-out needs at least 2 subjects, got {len(cohort)}"
        )
    ids = [r.subject_id for r in cohort]
    if len(set(ids)) != len(ids):
        raise InvalidConfigurationError("duplicate subject ids in cohort")

    records = [resample_to_64hz(r) for r in cohort]
    kernel_set = generate_kernels(
        config.n_kernels, EPOCH_SAMPLES, config.seed, config.variant
    )
    tag = config.variant.value
    if artifacts_dir is not None:
        artifacts_dir = Path(artifacts_dir)
        artifacts_dir.mkdir(parents=True, exist_ok=True)
        kernel_set.save(artifacts_dir / f"kernels_{tag}.json")

    per_subject = {}
    degenerate = []
    for i, held_out in enumerate(records):
        train_records = records[:i] + records[i + 1:]
        stats = compute_norm_stats(
            np.concatenate([r.samples for r in train_records])
        )

        train_parts = []
        for rec in train_records:
            ds = epoch_signal(normalize_record(rec, stats), config.train_hop_s)
            ds = label_epochs(ds, rec.annotations, config.label_threshold,
                              mode="train")
            train_parts.append(ds.labeled())
        train_ds = concatenate_datasets(train_parts)
        features = transform_dataset(train_ds, kernel_set, config.variant,
                                     workers=config.workers)
        model = fit_ridge(features, train_ds.labels, alpha=config.alpha)

        test_ds = epoch_signal(normalize_record(held_out, stats),
                               config.test_hop_s)
        test_ds = label_epochs(test_ds, held_out.annotations,
                               config.label_threshold, mode="test").labeled()
        test_features = transform_dataset(test_ds, kernel_set, config.variant,
                                          workers=config.workers)
        predicted, _ = predict(model, test_features)
        if artifacts_dir is not None:
            sid = held_out.subject_id
            model.save(artifacts_dir / f"model_{tag}_{sid}.npz")
            test_features.save(artifacts_dir / f"features_{tag}_{sid}.bin")

        truth = test_ds.labels
        if np.unique(truth).size < 2:
            degenerate.append(held_out.subject_id)
        counts = ConfusionCounts.from_predictions(truth, predicted)
        per_subject[held_out.subject_id] = mcc(counts)

    # Echo only result-affecting parameters: worker counts and paths must
    # not change report bytes.
    echoed = {
        k: v for k, v in config.to_dict().items()
        if k not in ("workers", "cohort_dir", "out_dir")
    }
    return CvReport(
        variant=config.variant,
        per_subject_mcc=per_subject,
        summary=summarize_mcc(list(per_subject.values())),
        degenerate_subjects=degenerate,
        config=echoed,
    )


@dataclass
class ComparisonResult:
    """Pairwise signed-rank p-values over a common subject set."""

    labels: list
    summaries: dict
    p_values: dict

    def to_json(self):
        doc = {
            "format": "msrocket-comparison",
            "version": 1,
            "labels": self.labels,
            "summaries": self.summaries,
            "p_values": [
                {"a": a, "b": b, "p": p}
                for (a, b), p in sorted(self.p_values.items())
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("variant_a,variant_b,p_value\n")
            for (a, b), p in sorted(self.p_values.items()):
                fh.write(f"{a},{b},{p!r}\n")

    def format_text(self):
        lines = ["model                      MCC median (IQR)          range"]
        for label in self.labels:
            s = self.summaries[label]
            lines.append(
                f"{label:<26} {s['median']:.3f} ({s['iqr_low']:.3f} to "
                f"{s['iqr_high']:.3f})   ({s['min']:.3f} to {s['max']:.3f})"
            )
        lines.append("")
        lines.append("pairwise Wilcoxon signed-rank p-values:")
        for (a, b), p in sorted(self.p_values.items()):
            lines.append(f"  {a} vs {b}: p = {p:.6g}")
        return "\n".join(lines)


def compare_variants(reports):
    """Pairwise Wilcoxon comparison of CV reports, paired by subject id."""
    if len(reports) < 2:
        raise InvalidArgumentError("need at least 2 reports to compare")
    subject_sets = [set(r.per_subject_mcc) for r in reports]
    base = subject_sets[0]
    for r, subjects in zip(reports[1:], subject_sets[1:]):
        if subjects != base:
            missing = sorted(base ^ subjects)
            raise InvalidArgumentError(
                f"subject sets differ between reports; mismatched ids: "
                f"{missing}"
            )
    order = sorted(base)

    labels = []
    for i, r in enumerate(reports):
        label = r.variant.value
        if label in labels:
            label = f"{label}#{i}"
        labels.append(label)

    summaries = {
        label: summarize_mcc(list(r.per_subject_mcc.values()))
        for label, r in zip(labels, reports)
    }
    p_values = {}
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            a = [reports[i].per_subject_mcc[s] for s in order]
            b = [reports[j].per_subject_mcc[s] for s in order]
            p_values[(labels[i], labels[j])] = wilcoxon_signed_rank(a, b)
    return ComparisonResult(labels=labels, summaries=summaries,
                            p_values=p_values)
