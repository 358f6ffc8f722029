"""Built-in learners: an undesired-outcome classifier and an effect estimator.

The classifier is L2-regularized logistic regression trained by full-batch
gradient descent (the intercept is never penalized), so training is exactly
reproducible from (data order, config) on any platform. The effect
estimator is a two-model design: one classifier per treatment arm, with the
effect read as control probability minus treated probability. Positive
values therefore mean the intervention reduces the undesired-outcome
probability. Both stay behind small interfaces so externally trained
models or imported score tables can stand in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DataError,
    DegenerateLabelsError,
    InsufficientArmError,
    SchemaError,
)

PROB_EPS = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    iterations: int = 500
    l2_strength: float = 1e-3
    seed: int = 0
    standardize_features: bool = True

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be > 0")
        if self.iterations < 0:
            raise ConfigurationError("iterations must be >= 0")
        if self.l2_strength < 0:
            raise ConfigurationError("l2_strength must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> TrainConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown training config keys: {sorted(unknown)}")
        return cls(**data)


def sigmoid(logits: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(logits, -500.0, 500.0)))


def loss_and_gradient(
    weights: np.ndarray,
    intercept: float,
    x: np.ndarray,
    y: np.ndarray,
    l2_strength: float,
) -> tuple[float, np.ndarray, float]:
    """Mean regularized negative log-likelihood and its analytic gradient."""
    logits = x @ weights + intercept
    # mean(log(1 + exp(logit)) - y * logit), computed stably
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    loss += 0.5 * l2_strength * float(weights @ weights)
    residual = sigmoid(logits) - y
    grad_w = x.T @ residual / len(y) + l2_strength * weights
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


@dataclass
class OutcomeModel:
    weights: np.ndarray
    intercept: float
    feature_means: np.ndarray | None
    feature_scales: np.ndarray | None
    training_meta: dict
    loss_history: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def width(self) -> int:
        return len(self.weights)

    def to_dict(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "intercept": float(self.intercept),
            "feature_means": None
            if self.feature_means is None
            else [float(v) for v in self.feature_means],
            "feature_scales": None
            if self.feature_scales is None
            else [float(v) for v in self.feature_scales],
            "training_meta": self.training_meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> OutcomeModel:
        means = data.get("feature_means")
        scales = data.get("feature_scales")
        return cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            intercept=float(data["intercept"]),
            feature_means=None if means is None else np.asarray(means, dtype=np.float64),
            feature_scales=None if scales is None else np.asarray(scales, dtype=np.float64),
            training_meta=dict(data.get("training_meta", {})),
        )


def train_outcome_classifier(
    x: np.ndarray, y: np.ndarray, cfg: TrainConfig
) -> OutcomeModel:
    """Fit the logistic classifier; deterministic given (x, y, cfg).

    Raises :class:`DegenerateLabelsError` when only one label is present
    and :class:`DataError` on non-finite features.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(x) != len(y):
        raise DataError(f"expected matching 2-D features and labels, got {x.shape} / {y.shape}")
    if len(y) < 2 or len(np.unique(y)) < 2:
        raise DegenerateLabelsError("training data must contain both outcome labels")
    if not np.isfinite(x).all():
        raise DataError("features contain non-finite values")

    means = scales = None
    if cfg.standardize_features:
        means = x.mean(axis=0)
        scales = x.std(axis=0)
        scales = np.where(scales == 0.0, 1.0, scales)
        x = (x - means) / scales

    weights = np.zeros(x.shape[1], dtype=np.float64)
    intercept = 0.0
    history = []
    for _ in range(cfg.iterations):
        loss, grad_w, grad_b = loss_and_gradient(weights, intercept, x, y, cfg.l2_strength)
        history.append(loss)
        weights = weights - cfg.learning_rate * grad_w
        intercept = intercept - cfg.learning_rate * grad_b
    final_loss, _, _ = loss_and_gradient(weights, intercept, x, y, cfg.l2_strength)
    history.append(final_loss)

    meta = {
        "iterations": cfg.iterations,
        "learning_rate": cfg.learning_rate,
        "l2_strength": cfg.l2_strength,
        "seed": cfg.seed,
        "standardize_features": cfg.standardize_features,
        "n_samples": int(len(y)),
    }
    return OutcomeModel(weights, intercept, means, scales, meta, tuple(history))


def _standardized(model: OutcomeModel, x: np.ndarray) -> np.ndarray:
    if model.feature_means is None or model.feature_scales is None:
        return x
    return (x - model.feature_means) / model.feature_scales


def predict_uout(model: OutcomeModel, x: np.ndarray) -> float:
    """Undesired-outcome probability for one encoded prefix; always in (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.width,):
        raise SchemaError(f"feature width {x.shape} does not match model width {model.width}")
    logit = float(_standardized(model, x) @ model.weights + model.intercept)
    return float(np.clip(sigmoid(np.asarray(logit)), PROB_EPS, 1.0 - PROB_EPS))


def predict_uout_batch(model: OutcomeModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.width:
        raise SchemaError(f"feature width {x.shape} does not match model width {model.width}")
    probs = sigmoid(_standardized(model, x) @ model.weights + model.intercept)
    return np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)


@dataclass(frozen=True)
class CausalDataset:
    """Per-sample (x, t, y) arrays; ``w`` carries confounders for estimators
    that model treatment assignment (the built-in two-model learner does not)."""

    x: np.ndarray
    t: np.ndarray
    y: np.ndarray
    w: np.ndarray | None = None


def drop_confounders(
    dataset: CausalDataset, feature_names: tuple[str, ...], drop: list[str]
) -> CausalDataset:
    """Remove named columns from the confounder matrix (default w = x)."""
    unknown = [name for name in drop if name not in feature_names]
    if unknown:
        raise ConfigurationError(f"unknown confounder names: {unknown}")
    w = dataset.w if dataset.w is not None else dataset.x
    keep = [i for i, name in enumerate(feature_names) if name not in set(drop)]
    return CausalDataset(dataset.x, dataset.t, dataset.y, w[:, keep])


@dataclass
class CateModel:
    treated_model: OutcomeModel
    control_model: OutcomeModel
    training_meta: dict

    @property
    def width(self) -> int:
        return self.treated_model.width

    def to_dict(self) -> dict:
        return {
            "treated_model": self.treated_model.to_dict(),
            "control_model": self.control_model.to_dict(),
            "training_meta": self.training_meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> CateModel:
        return cls(
            treated_model=OutcomeModel.from_dict(data["treated_model"]),
            control_model=OutcomeModel.from_dict(data["control_model"]),
            training_meta=dict(data.get("training_meta", {})),
        )


def train_cate(dataset: CausalDataset, cfg: TrainConfig) -> CateModel:
    """Fit one outcome classifier per treatment arm.

    Raises :class:`InsufficientArmError` naming the empty arm; each arm must
    also contain both outcome labels.
    """
    t = np.asarray(dataset.t)
    treated_mask = t == 1
    control_mask = t == 0
    if not treated_mask.any():
        raise InsufficientArmError("treatment arm (t=1) is empty")
    if not control_mask.any():
        raise InsufficientArmError("control arm (t=0) is empty")
    treated = train_outcome_classifier(dataset.x[treated_mask], dataset.y[treated_mask], cfg)
    control = train_outcome_classifier(dataset.x[control_mask], dataset.y[control_mask], cfg)
    meta = {
        "n_treated": int(treated_mask.sum()),
        "n_control": int(control_mask.sum()),
        "seed": cfg.seed,
    }
    return CateModel(treated, control, meta)


def estimate_cate(model: CateModel, x: np.ndarray) -> float:
    """Estimated reduction of the undesired-outcome probability under treatment."""
    return predict_uout(model.control_model, x) - predict_uout(model.treated_model, x)


def estimate_cate_batch(model: CateModel, x: np.ndarray) -> np.ndarray:
    return predict_uout_batch(model.control_model, x) - predict_uout_batch(
        model.treated_model, x
    )


def auc_score(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Rank-based AUC with midrank tie handling."""
    y_true = np.asarray(y_true, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(y_true.sum())
    n_neg = len(y_true) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("AUC needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = float(ranks[y_true == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def model_to_json(model: OutcomeModel | CateModel, schema_fingerprint: str) -> str:
    payload = {"schema_fingerprint": schema_fingerprint, "model": model.to_dict()}
    return json.dumps(payload, indent=2, sort_keys=True)


def outcome_model_from_json(text: str) -> tuple[OutcomeModel, str]:
    payload = json.loads(text)
    return OutcomeModel.from_dict(payload["model"]), payload["schema_fingerprint"]


def cate_model_from_json(text: str) -> tuple[CateModel, str]:
    payload = json.loads(text)
    return CateModel.from_dict(payload["model"]), payload["schema_fingerprint"]
