"""Ridge regression on the feature table with a sign decision rule.

Features are z-scored with training statistics (MAX and PPV live on very
different scales and alpha=1 is scale-sensitive). Targets are {-1,+1}; the
intercept is unpenalized and, on centered features, equals the target mean.
When features outnumber samples the Gram (dual) system is solved instead of
the normal equations; both give the same model.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DataError,
    InvalidArgumentError,
    InvalidTrainingSetError,
)

_FORMAT_NAME = "msrocket-ridge"
_FORMAT_VERSION = 1


@dataclass
class RidgeModel:
    """Trained weights plus the training-time normalization statistics."""

    weights: np.ndarray
    intercept: float
    alpha: float
    feature_means: np.ndarray
    feature_scales: np.ndarray

    @property
    def n_features(self):
        return self.weights.shape[0]

    def save(self, path):
        np.savez(
            path,
            format=np.array(_FORMAT_NAME),
            version=np.array(_FORMAT_VERSION),
            weights=self.weights,
            intercept=np.array(self.intercept),
            alpha=np.array(self.alpha),
            feature_means=self.feature_means,
            feature_scales=self.feature_scales,
        )

    @classmethod
    def load(cls, path):
        with np.load(path, allow_pickle=False) as doc:
            if str(doc["format"]) != _FORMAT_NAME:
                raise InvalidArgumentError(f"{path}: not a ridge-model file")
            if int(doc["version"]) != _FORMAT_VERSION:
                raise InvalidArgumentError(
                    f"{path}: unsupported model version {int(doc['version'])}"
                )
            return cls(
                weights=doc["weights"],
                intercept=float(doc["intercept"]),
                alpha=float(doc["alpha"]),
                feature_means=doc["feature_means"],
                feature_scales=doc["feature_scales"],
            )


def _as_matrix(X):
    values = getattr(X, "values", X)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise InvalidArgumentError("feature matrix must be 2-D")
    return values


def standardize_stats(X):
    """Per-column mean and standard deviation (population, ddof=0).

    Constant columns get their own value as the mean and scale 1, so they
    standardize to exactly 0 and cannot affect the fit.
    """
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    constant = X.max(axis=0) == X.min(axis=0)
    means[constant] = X[0, constant]
    scales[constant | (scales == 0.0)] = 1.0
    return means, scales


def fit_ridge(X, y, alpha=1.0, solver="auto"):
    """Fit the ridge model on features X and labels y in {-1,+1}.

    solver: "auto" picks dual when features > samples, else primal;
    "primal"/"dual" force one path (they agree to rounding).
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be > 0, got {alpha}")
    if solver not in ("auto", "primal", "dual"):
        raise InvalidArgumentError(f"unknown solver {solver!r}")
    n, p = X.shape
    if n != y.shape[0]:
        raise InvalidArgumentError(
            f"{n} feature rows but {y.shape[0]} labels"
        )
    if n < 2:
        raise InvalidTrainingSetError("need at least 2 training samples")
    if not np.isfinite(X).all():
        raise DataError("feature matrix contains non-finite values")
    present = np.unique(y)
    if not np.isin(present, (-1.0, 1.0)).all():
        raise InvalidArgumentError("labels must be -1 or +1")
    if present.shape[0] < 2:
        raise InvalidTrainingSetError("training labels contain a single class")

    means, scales = standardize_stats(X)
    Z = (X - means) / scales
    intercept = y.mean()
    r = y - intercept

    if solver == "auto":
        solver = "dual" if p > n else "primal"
    if solver == "dual":
        G = Z @ Z.T
        G[np.diag_indices_from(G)] += alpha
        coef = scipy.linalg.cho_solve(scipy.linalg.cho_factor(G), r)
        w = Z.T @ coef
    else:
        A = Z.T @ Z
        A[np.diag_indices_from(A)] += alpha
        w = scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), Z.T @ r)

    return RidgeModel(
        weights=w,
        intercept=float(intercept),
        alpha=float(alpha),
        feature_means=means,
        feature_scales=scales,
    )


def predict(model, X):
    """Labels in {-1,+1} and raw scores; a score of exactly 0 maps to -1."""
    X = _as_matrix(X)
    if X.shape[1] != model.n_features:
        raise InvalidArgumentError(
            f"model expects {model.n_features} features, got {X.shape[1]}"
        )
    Z = (X - model.feature_means) / model.feature_scales
    scores = Z @ model.weights + model.intercept
    labels = np.where(scores > 0.0, 1, -1).astype(np.int8)
    return labels, scores
