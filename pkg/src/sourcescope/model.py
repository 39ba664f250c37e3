"""Logit reliability model: scoring, maximum-likelihood fitting, slopes.

The model maps the five binary site features to the probability that the
site is a fake-news source.  Fitting is plain Newton/IRLS on the binomial
log-likelihood with explicit rank, separation and convergence checks; no
regularization is applied, so the estimate is the exact MLE.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    ConvergenceError,
    EmptyDataError,
    MissingFeatureError,
    ModelDocumentError,
    NonFiniteValueError,
    SeparationError,
    SingularDesignError,
    UnknownFeatureError,
)
from .features import FEATURE_NAMES, FeatureVector

__all__ = [
    "LogitModel",
    "LabeledDataset",
    "FitOptions",
    "FitResult",
    "MODEL_I",
    "MODEL_II",
    "FEATURE_SUBSETS",
    "predict_probability",
    "log_likelihood",
    "fit_logit",
    "fit_intercept_only",
    "marginal_effects",
    "save_model",
    "load_model",
    "save_model_file",
    "load_model_file",
]

_DOCUMENT_KEYS = {"version", "intercept", "coefficients", "metadata"}
_DOCUMENT_VERSION = "1"


def sigmoid(z):
    """Numerically stable logistic; never exponentiates a large positive."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class LogitModel:
    """Intercept plus named coefficients over a subset of the five features."""

    intercept: float
    coefficients: Mapping[str, float]
    metadata: Optional[str] = None

    def __post_init__(self):
        coeffs = dict(self.coefficients)
        if not coeffs:
            raise ValueError("model needs at least one feature coefficient")
        for name in coeffs:
            if name not in FEATURE_NAMES:
                raise UnknownFeatureError(
                    f"unknown feature {name!r}; expected a subset of {FEATURE_NAMES}")
        if not math.isfinite(self.intercept):
            raise NonFiniteValueError("intercept is not finite")
        for name, value in coeffs.items():
            if not math.isfinite(value):
                raise NonFiniteValueError(f"coefficient {name!r} is not finite")
        # canonical feature order, regardless of input order
        ordered = {name: float(coeffs[name]) for name in FEATURE_NAMES if name in coeffs}
        object.__setattr__(self, "coefficients", ordered)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(self.coefficients)

    def linear_predictor(self, x: Union[FeatureVector, Mapping[str, int]]) -> float:
        values = x.as_dict() if isinstance(x, FeatureVector) else dict(x)
        z = self.intercept
        for name, beta in self.coefficients.items():
            if name not in values:
                raise MissingFeatureError(f"input lacks feature {name!r}")
            z += beta * values[name]
        return z


# Reference coefficient sets shipped with the package.  model2 (four
# predictors) is the default scorer; model1 keeps all five for comparison.
MODEL_II = LogitModel(
    intercept=3.8405,
    coefficients={"padlock": -2.3141, "contact": -1.1682,
                  "telephone": -1.7179, "terms": -1.4569},
    metadata="builtin model2 (default): four-predictor reference fit",
)
MODEL_I = LogitModel(
    intercept=3.7723,
    coefficients={"padlock": -2.3133, "contact": -1.3385, "telephone": -1.7285,
                  "about": 0.3744, "terms": -1.5144},
    metadata="builtin model1: five-predictor reference fit",
)
FEATURE_SUBSETS = {
    "model1": FEATURE_NAMES,
    "model2": ("padlock", "contact", "telephone", "terms"),
}


@dataclass(frozen=True)
class LabeledDataset:
    """Rows of (features, label) with label 1 meaning fake."""

    rows: tuple[tuple[FeatureVector, int], ...]
    provenance: Optional[str] = None

    def __post_init__(self):
        if not self.rows:
            raise EmptyDataError("dataset is empty")
        for i, (features, label) in enumerate(self.rows):
            if label not in (0, 1):
                raise ValueError(f"row {i}: label must be 0 or 1, got {label!r}")
            if not isinstance(features, FeatureVector):
                raise TypeError(f"row {i}: expected FeatureVector")
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.rows], dtype=float)

    def feature_matrix(self, features: Sequence[str]) -> np.ndarray:
        return np.array(
            [[fv.get(name) for name in features] for fv, _ in self.rows], dtype=float)

    def class_counts(self) -> tuple[int, int]:
        """(n fake, n reliable)."""
        ones = sum(label for _, label in self.rows)
        return ones, len(self.rows) - ones


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 100
    tolerance: float = 1e-8           # on the max absolute score component
    separation_bound: float = 30.0    # |beta| beyond this flags separation

    def __post_init__(self):
        for name in ("max_iterations", "tolerance", "separation_bound"):
            if getattr(self, name) <= 0:
                raise ValueError(f"FitOptions.{name} must be strictly positive")


@dataclass(frozen=True)
class FitResult:
    model: LogitModel
    log_likelihood: float
    iterations: int


_P_FLOOR = math.nextafter(0.0, 1.0)
_P_CEIL = math.nextafter(1.0, 0.0)


def predict_probability(model: LogitModel,
                        x: Union[FeatureVector, Mapping[str, int]]) -> float:
    """Probability the site is a fake-news source under the logit model.

    Clamped to the open interval: extreme linear predictors round to the
    nearest representable value inside (0, 1) instead of 0 or 1 exactly.
    """
    p = float(sigmoid(model.linear_predictor(x)))
    return min(max(p, _P_FLOOR), _P_CEIL)


def _log_likelihood_from_z(z: np.ndarray, y: np.ndarray) -> float:
    # y*ln p + (1-y)*ln(1-p) without ever forming p
    return float(-(np.logaddexp(0.0, -z) * y + np.logaddexp(0.0, z) * (1.0 - y)).sum())


def log_likelihood(model: LogitModel, data: LabeledDataset) -> float:
    """Binomial log-likelihood of the dataset under the model."""
    X = data.feature_matrix(model.features)
    z = model.intercept + X @ np.array(list(model.coefficients.values()))
    return _log_likelihood_from_z(z, data.labels())


def _design_matrix(data: LabeledDataset, features: Sequence[str]) -> np.ndarray:
    X = data.feature_matrix(features)
    return np.column_stack([np.ones(len(data)), X])


def fit_logit(data: LabeledDataset, features: Sequence[str],
              opts: Optional[FitOptions] = None) -> FitResult:
    """Maximum-likelihood logit fit via Newton steps on the score.

    Converged when every score component is below ``opts.tolerance``.
    Raises ``SingularDesignError`` for rank-deficient designs,
    ``SeparationError`` when a coefficient diverges, ``ConvergenceError``
    when the iteration budget runs out.
    """
    features = tuple(features)
    if not features:
        raise ValueError("need at least one feature; see fit_intercept_only for the null fit")
    return _fit(data, features, opts or FitOptions())


def fit_intercept_only(data: LabeledDataset,
                       opts: Optional[FitOptions] = None) -> tuple[float, float]:
    """Closed-form null fit: (intercept, log-likelihood)."""
    ones, zeros = data.class_counts()
    if ones == 0 or zeros == 0:
        raise SeparationError("single-class data: null log-odds are infinite")
    n = len(data)
    intercept = math.log(ones / zeros)
    lnl = ones * math.log(ones / n) + zeros * math.log(zeros / n)
    return intercept, lnl


def _fit(data: LabeledDataset, features: tuple[str, ...], opts: FitOptions) -> FitResult:
    X = _design_matrix(data, features)
    y = data.labels()
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularDesignError(
            f"design matrix is rank deficient over features {features}")

    beta = np.zeros(X.shape[1])
    lnl = _log_likelihood_from_z(X @ beta, y)
    for iteration in range(opts.max_iterations):
        z = X @ beta
        p = sigmoid(z)
        score = X.T @ (y - p)
        if np.max(np.abs(score)) < opts.tolerance:
            return FitResult(_as_model(beta, features), lnl, iteration)

        w = p * (1.0 - p)
        hessian = (X * w[:, None]).T @ X
        try:
            step = np.linalg.solve(hessian, score)
        except np.linalg.LinAlgError:
            raise SingularDesignError(
                "weighted normal equations are singular (degenerate fit)") from None

        # step-halving keeps the likelihood monotone on awkward data
        new_beta = beta + step
        new_lnl = _log_likelihood_from_z(X @ new_beta, y)
        halvings = 0
        while new_lnl < lnl and halvings < 20:
            step *= 0.5
            new_beta = beta + step
            new_lnl = _log_likelihood_from_z(X @ new_beta, y)
            halvings += 1
        beta, lnl = new_beta, new_lnl

        if np.max(np.abs(beta)) > opts.separation_bound:
            raise SeparationError(
                f"separation detected: |coefficient| exceeded {opts.separation_bound}")

    raise ConvergenceError(f"no convergence after {opts.max_iterations} iterations")


def _as_model(beta: np.ndarray, features: tuple[str, ...]) -> LogitModel:
    return LogitModel(
        intercept=float(beta[0]),
        coefficients={name: float(b) for name, b in zip(features, beta[1:])},
    )


def marginal_effects(model: LogitModel, data: LabeledDataset,
                     convention: str = "at-means") -> dict[str, float]:
    """Discrete probability change from flipping each dummy 0 -> 1.

    ``at-means`` holds the other features at their sample means;
    ``average`` averages the per-row discrete difference.
    """
    if convention not in ("at-means", "average"):
        raise ValueError(f"convention must be 'at-means' or 'average', got {convention!r}")
    if len(data) == 0:
        raise EmptyDataError("marginal effects need data")
    features = model.features
    X = data.feature_matrix(features)
    beta = np.array(list(model.coefficients.values()))
    means = X.mean(axis=0)
    slopes: dict[str, float] = {}
    for j, name in enumerate(features):
        if convention == "at-means":
            x1, x0 = means.copy(), means.copy()
            x1[j], x0[j] = 1.0, 0.0
            slopes[name] = float(sigmoid(model.intercept + x1 @ beta)
                                 - sigmoid(model.intercept + x0 @ beta))
        else:
            x1, x0 = X.copy(), X.copy()
            x1[:, j], x0[:, j] = 1.0, 0.0
            slopes[name] = float(np.mean(sigmoid(model.intercept + x1 @ beta)
                                         - sigmoid(model.intercept + x0 @ beta)))
    return slopes


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def save_model(model: LogitModel) -> dict:
    """Model as a plain JSON-able document."""
    return {
        "version": _DOCUMENT_VERSION,
        "intercept": model.intercept,
        "coefficients": dict(model.coefficients),
        "metadata": model.metadata,
    }


def load_model(document: Mapping) -> LogitModel:
    """Rebuild a model from a document, rejecting anything off-schema."""
    if not isinstance(document, Mapping):
        raise ModelDocumentError("model document must be a JSON object")
    unknown = set(document) - _DOCUMENT_KEYS
    if unknown:
        raise ModelDocumentError(f"unknown document fields: {sorted(unknown)}")
    for required in ("intercept", "coefficients"):
        if required not in document:
            raise ModelDocumentError(f"document lacks {required!r}")
    coefficients = document["coefficients"]
    if not isinstance(coefficients, Mapping):
        raise ModelDocumentError("'coefficients' must be an object")
    version = document.get("version", _DOCUMENT_VERSION)
    if str(version) != _DOCUMENT_VERSION:
        raise ModelDocumentError(f"unsupported document version {version!r}")

    def _num(value, what: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ModelDocumentError(f"{what} must be a number")
        if not math.isfinite(value):
            raise NonFiniteValueError(f"{what} is not finite")
        return float(value)

    intercept = _num(document["intercept"], "intercept")
    coeffs = {name: _num(value, f"coefficient {name!r}")
              for name, value in coefficients.items()}
    metadata = document.get("metadata")
    if metadata is not None and not isinstance(metadata, str):
        raise ModelDocumentError("'metadata' must be a string or null")
    return LogitModel(intercept=intercept, coefficients=coeffs, metadata=metadata)


def _parse_constant(token: str):
    raise NonFiniteValueError(f"non-finite number {token!r} in model document")


def load_model_file(path: str | Path) -> LogitModel:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"),
                              parse_constant=_parse_constant)
    except json.JSONDecodeError as exc:
        raise ModelDocumentError(f"{path}: not valid JSON ({exc})") from None
    return load_model(document)


def save_model_file(model: LogitModel, path: str | Path) -> None:
    """Write atomically: the target appears complete or not at all."""
    path = Path(path)
    document = save_model(model)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(document, handle, indent=2)
            handle.write("\n")
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
