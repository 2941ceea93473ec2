"""Trainable models: the NIL max-margin classifier and the location-type
classifiers (Naive Bayes and Maximum Entropy).

All training is deterministic given the seed: data shuffles use a seeded
generator, and both iterative trainers only accept steps that do not
increase their objective (reverting and halving the step size otherwise),
so the recorded loss curve is non-increasing by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..geomodel import LocationType
from .features import WindowExample

PLACE_LABEL = "place"
NIL_LABEL = "nil"

ALL_TYPE_LABELS = tuple(t.label for t in LocationType)


class DegenerateLabels(Exception):
    """Training data with a single class cannot define a margin."""


class MissingClass(Exception):
    """Raised when required classes have no training examples."""

    def __init__(self, absent):
        self.absent = tuple(absent)
        super().__init__(f"no training examples for: {', '.join(self.absent)}")


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


# ---------------------------------------------------------------------------
# NIL detection: linear max-margin classifier


@dataclass
class LinearModel:
    """Hinge-trained linear separator with the train-set scaling baked in."""

    weights: np.ndarray
    bias: float
    feature_min: np.ndarray
    feature_max: np.ndarray
    loss_curve: list[float] = field(default_factory=list)

    def scale(self, x: np.ndarray) -> np.ndarray:
        span = self.feature_max - self.feature_min
        safe = np.where(span > 0, span, 1.0)
        scaled = (np.asarray(x, dtype=np.float64) - self.feature_min) / safe
        return np.where(span > 0, scaled, 0.0)

    def margin(self, x: np.ndarray) -> float:
        return float(self.weights @ self.scale(x) + self.bias)

    def score(self, x: np.ndarray) -> float:
        """Sigmoid-calibrated margin in (0, 1)."""
        return sigmoid(self.margin(x))

    def predict(self, x: np.ndarray) -> str:
        return PLACE_LABEL if self.margin(x) >= 0.0 else NIL_LABEL

    def to_json(self) -> dict:
        return {
            "kind": "nil-linear",
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "feature_min": self.feature_min.tolist(),
            "feature_max": self.feature_max.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LinearModel":
        return cls(
            weights=np.asarray(obj["weights"], dtype=np.float64),
            bias=float(obj["bias"]),
            feature_min=np.asarray(obj["feature_min"], dtype=np.float64),
            feature_max=np.asarray(obj["feature_max"], dtype=np.float64),
        )


def _hinge_objective(w, b, X, y, lam):
    margins = y * (X @ w + b)
    return float(np.maximum(0.0, 1.0 - margins).mean() + 0.5 * lam * (w @ w))


def train_nil(
    examples,
    lam: float = 1e-2,
    epochs: int = 200,
    seed: int = 13,
) -> LinearModel:
    """Stochastic subgradient descent on L2-regularized hinge loss.

    ``examples`` is a sequence of (8-feature vector, label) pairs with
    labels "place" (positive) and "nil" (negative). The learning rate
    follows 1/(lambda*t); an epoch whose full objective got worse is
    reverted and the step scale halved, so the epoch-average loss curve
    never increases.
    """
    vectors = np.array([np.asarray(x, dtype=np.float64) for x, _ in examples])
    labels = np.array([1.0 if lbl == PLACE_LABEL else -1.0 for _, lbl in examples])
    classes = set(labels.tolist())
    if len(classes) < 2:
        raise DegenerateLabels(f"only one label present: {classes}")

    feature_min = vectors.min(axis=0)
    feature_max = vectors.max(axis=0)
    span = feature_max - feature_min
    safe = np.where(span > 0, span, 1.0)
    X = np.where(span > 0, (vectors - feature_min) / safe, 0.0)

    rng = np.random.default_rng(seed)
    n, dim = X.shape
    w = np.zeros(dim)
    b = 0.0
    t = 0
    eta_scale = 1.0
    curve = [_hinge_objective(w, b, X, labels, lam)]
    for _ in range(epochs):
        w_prev, b_prev, t_prev = w.copy(), b, t
        for i in rng.permutation(n):
            t += 1
            eta = eta_scale / (lam * t)
            if labels[i] * (w @ X[i] + b) < 1.0:
                w = (1.0 - eta * lam) * w + eta * labels[i] * X[i]
                b += eta * labels[i]
            else:
                w = (1.0 - eta * lam) * w
        obj = _hinge_objective(w, b, X, labels, lam)
        if obj > curve[-1]:
            w, b, t = w_prev, b_prev, t_prev
            eta_scale *= 0.5
            curve.append(curve[-1])
        else:
            curve.append(obj)
    return LinearModel(w, b, feature_min, feature_max, loss_curve=curve)


# ---------------------------------------------------------------------------
# location type classification


@dataclass
class NaiveBayesModel:
    """Multinomial NB with Laplace smoothing over window-token bags.

    Classes with no training examples still get probability mass: priors
    are Laplace-smoothed over all seven types, and unseen tokens fall
    back to the smoothing term.
    """

    alpha: float
    vocab: dict[str, int]
    class_token_counts: dict[str, np.ndarray]
    class_example_counts: dict[str, int]
    total_examples: int

    kind = "nb"

    def log_posteriors(self, bag) -> dict[str, float]:
        V = len(self.vocab)
        scores = {}
        for label in ALL_TYPE_LABELS:
            n_c = self.class_example_counts.get(label, 0)
            counts = self.class_token_counts.get(label)
            total_tokens = float(counts.sum()) if counts is not None else 0.0
            log_p = math.log((n_c + self.alpha) / (self.total_examples + self.alpha * 7))
            denom = total_tokens + self.alpha * V
            for token in bag:
                idx = self.vocab.get(token)
                count = float(counts[idx]) if (counts is not None and idx is not None) else 0.0
                log_p += math.log((count + self.alpha) / denom)
            scores[label] = log_p
        return scores

    def classify(self, window: WindowExample) -> dict[str, float]:
        scores = self.log_posteriors(window.bag())
        peak = max(scores.values())
        exp = {lbl: math.exp(s - peak) for lbl, s in scores.items()}
        total = sum(exp.values())
        return {lbl: v / total for lbl, v in exp.items()}

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "vocab": self.vocab,
            "class_token_counts": {k: v.tolist() for k, v in self.class_token_counts.items()},
            "class_example_counts": self.class_example_counts,
            "total_examples": self.total_examples,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NaiveBayesModel":
        return cls(
            alpha=float(obj["alpha"]),
            vocab={k: int(v) for k, v in obj["vocab"].items()},
            class_token_counts={
                k: np.asarray(v, dtype=np.float64) for k, v in obj["class_token_counts"].items()
            },
            class_example_counts={k: int(v) for k, v in obj["class_example_counts"].items()},
            total_examples=int(obj["total_examples"]),
        )


@dataclass
class MaxEntModel:
    """Multinomial logistic regression over bag-of-window-token counts.

    Classes absent from training are excluded and the softmax renormalizes
    over the present ones; absent classes report probability zero.
    """

    classes: tuple[str, ...]
    vocab: dict[str, int]
    weights: np.ndarray  # (C, V)
    biases: np.ndarray  # (C,)
    loss_curve: list[float] = field(default_factory=list)

    kind = "maxent"

    def _vectorize(self, bag) -> np.ndarray:
        x = np.zeros(len(self.vocab), dtype=np.float64)
        for token in bag:
            idx = self.vocab.get(token)
            if idx is not None:
                x[idx] += 1.0
        return x

    def classify(self, window: WindowExample) -> dict[str, float]:
        scores = self.weights @ self._vectorize(window.bag()) + self.biases
        scores -= scores.max()
        exp = np.exp(scores)
        probs = exp / exp.sum()
        result = {lbl: 0.0 for lbl in ALL_TYPE_LABELS}
        result.update({lbl: float(p) for lbl, p in zip(self.classes, probs)})
        return result

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "classes": list(self.classes),
            "vocab": self.vocab,
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MaxEntModel":
        return cls(
            classes=tuple(obj["classes"]),
            vocab={k: int(v) for k, v in obj["vocab"].items()},
            weights=np.asarray(obj["weights"], dtype=np.float64),
            biases=np.asarray(obj["biases"], dtype=np.float64),
        )


TypeModel = NaiveBayesModel | MaxEntModel


def maxent_loss_grad(weights, biases, X, labels, lam):
    """Mean NLL with L2 on the weights (biases unregularized), plus its
    analytic gradient. Exposed separately so tests can check the gradient
    against finite differences."""
    n = X.shape[0]
    scores = X @ weights.T + biases
    scores -= scores.max(axis=1, keepdims=True)
    exp = np.exp(scores)
    probs = exp / exp.sum(axis=1, keepdims=True)
    nll = -np.log(probs[np.arange(n), labels] + 1e-300).mean()
    loss = nll + 0.5 * lam * float((weights * weights).sum())
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    grad_w = delta.T @ X / n + lam * weights
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


def _build_vocab(examples) -> dict[str, int]:
    vocab: dict[str, int] = {}
    for ex in examples:
        for token in ex.bag():
            if token not in vocab:
                vocab[token] = len(vocab)
    return {tok: i for i, tok in enumerate(sorted(vocab))}


def _present_classes(examples) -> list[str]:
    present = {ex.label for ex in examples}
    return [lbl for lbl in ALL_TYPE_LABELS if lbl in present]


def train_type(
    examples: list[WindowExample],
    variant: str = "nb",
    alpha: float = 1.0,
    lam: float = 1e-3,
    iterations: int = 500,
    rate: float = 0.1,
    require_all_classes: bool = False,
) -> TypeModel:
    """Train a location-type classifier on labeled context windows.

    NB parameters are closed-form counts; MaxEnt runs batch gradient
    descent with backtracking (halving the rate whenever a step would
    increase the loss), so its loss decreases monotonically.
    """
    if not examples or any(ex.label is None for ex in examples):
        raise ValueError("training needs labeled window examples")
    unknown = {ex.label for ex in examples} - set(ALL_TYPE_LABELS)
    if unknown:
        raise ValueError(f"unknown location type labels: {sorted(unknown)}")
    if require_all_classes:
        absent = [lbl for lbl in ALL_TYPE_LABELS if lbl not in {e.label for e in examples}]
        if absent:
            raise MissingClass(absent)

    vocab = _build_vocab(examples)
    classes = _present_classes(examples)

    if variant == "nb":
        token_counts = {lbl: np.zeros(len(vocab), dtype=np.float64) for lbl in classes}
        example_counts = {lbl: 0 for lbl in classes}
        for ex in examples:
            example_counts[ex.label] += 1
            for token in ex.bag():
                token_counts[ex.label][vocab[token]] += 1.0
        return NaiveBayesModel(
            alpha=alpha,
            vocab=vocab,
            class_token_counts=token_counts,
            class_example_counts=example_counts,
            total_examples=len(examples),
        )

    if variant != "maxent":
        raise ValueError(f"unknown classifier variant: {variant!r}")

    class_index = {lbl: i for i, lbl in enumerate(classes)}
    X = np.zeros((len(examples), len(vocab)), dtype=np.float64)
    labels = np.zeros(len(examples), dtype=np.int64)
    for row, ex in enumerate(examples):
        labels[row] = class_index[ex.label]
        for token in ex.bag():
            X[row, vocab[token]] += 1.0

    weights = np.zeros((len(classes), len(vocab)), dtype=np.float64)
    biases = np.zeros(len(classes), dtype=np.float64)
    loss, grad_w, grad_b = maxent_loss_grad(weights, biases, X, labels, lam)
    curve = [loss]
    step = rate
    for _ in range(iterations):
        accepted = False
        for _ in range(60):  # backtracking: halve on increase
            cand_w = weights - step * grad_w
            cand_b = biases - step * grad_b
            cand_loss, cand_gw, cand_gb = maxent_loss_grad(cand_w, cand_b, X, labels, lam)
            if cand_loss <= loss:
                weights, biases = cand_w, cand_b
                loss, grad_w, grad_b = cand_loss, cand_gw, cand_gb
                accepted = True
                break
            step *= 0.5
        curve.append(loss)
        if not accepted:
            break  # stalled at numerical precision
    return MaxEntModel(
        classes=tuple(classes), vocab=vocab, weights=weights, biases=biases, loss_curve=curve
    )


def classify_type(window: WindowExample, model: TypeModel) -> dict[str, float]:
    """Distribution over all seven location types; sums to one."""
    return model.classify(window)


# ---------------------------------------------------------------------------
# persistence


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json(), fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_type_model(path) -> TypeModel:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("kind") == "nb":
        return NaiveBayesModel.from_json(obj)
    if obj.get("kind") == "maxent":
        return MaxEntModel.from_json(obj)
    raise ValueError(f"{path}: not a type model")


def load_nil_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("kind") != "nil-linear":
        raise ValueError(f"{path}: not a NIL model")
    return LinearModel.from_json(obj)
