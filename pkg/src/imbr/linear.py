"""Class weights, weighted cross-entropy, softmax regression and multinomial naive Bayes."""

from dataclasses import dataclass, field

import numpy as np

from imbr.errors import ConfigError, DimensionMismatch, EmptyClass, NegativeFeature, NonFiniteLoss

EPS = 1e-12


def class_weights(class_counts):
    """Inverse-frequency weights ``N / (C * n_c)``; all ones when balanced."""
    if isinstance(class_counts, dict):
        class_counts = [class_counts[c] for c in class_counts]
    counts = np.asarray(class_counts, dtype=float)
    if counts.size == 0:
        raise EmptyClass("no classes given")
    if np.any(counts < 1):
        raise EmptyClass(f"every class needs at least one instance, got counts {counts.astype(int).tolist()}")
    return counts.sum() / (counts.size * counts)


def present_class_weights(labels, n_classes):
    """``class_weights`` over the classes that occur; absent classes get weight 1."""
    counts = np.bincount(labels, minlength=n_classes)
    weights = np.ones(n_classes)
    present = counts > 0
    weights[present] = class_weights(counts[present])
    return weights


def weighted_ce(probabilities, true_class, weights):
    p = np.clip(float(np.asarray(probabilities)[true_class]), EPS, 1.0)
    return -float(weights[true_class]) * np.log(p)


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(W, b, X, y, class_w):
    """Mean weighted cross-entropy of ``softmax(X W^T + b)`` and its gradients."""
    probs = softmax(X @ W.T + b)
    m = X.shape[0]
    rows = np.arange(m)
    w = class_w[y]
    loss = float(np.sum(-w * np.log(np.clip(probs[rows, y], EPS, 1.0))) / m)
    delta = probs
    delta[rows, y] -= 1.0
    delta *= (w / m)[:, None]
    return loss, delta.T @ X, delta.sum(axis=0)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.05
    seed: int = 0
    use_class_weights: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not self.learning_rate >= 0:
            raise ConfigError("learning_rate must be >= 0")


def _check_dim(rows, dim):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != dim:
        raise DimensionMismatch(f"model expects {dim} features, got {rows.shape[1]}")
    return rows


@dataclass(frozen=True)
class SoftmaxModel:
    weights: np.ndarray
    bias: np.ndarray
    metadata: dict = field(default_factory=dict)

    kind = "softmax"

    @property
    def n_classes(self):
        return self.weights.shape[0]

    def predict_proba(self, rows):
        rows = _check_dim(rows, self.weights.shape[1])
        return softmax(rows @ self.weights.T + self.bias)

    def predict(self, rows):
        return np.argmax(self.predict_proba(rows), axis=1)


def _descend(W, b, X, y, weights, config, rng, history):
    n = X.shape[0]
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, gW, gb = loss_and_grad(W, b, X[batch], y[batch], weights)
            if not np.isfinite(loss) or not (np.all(np.isfinite(gW)) and np.all(np.isfinite(gb))):
                raise NonFiniteLoss("loss diverged; lower the learning rate")
            W -= config.learning_rate * gW
            b -= config.learning_rate * gb
            epoch_loss += loss * len(batch)
        history.append(epoch_loss / max(n, 1))


def train_softmax(matrix, config=None, weights=None, n_classes=None):
    """Mini-batch gradient descent on the mean weighted cross-entropy.

    Parameters start at zero. Each epoch reshuffles rows with a generator
    seeded from ``config.seed`` and walks consecutive batches, the last one
    possibly short.
    """
    config = config or TrainConfig()
    n_classes = n_classes or int(matrix.labels.max()) + 1
    if len(np.unique(matrix.labels)) < 2 and n_classes < 2:
        raise ConfigError("softmax training needs at least two classes")
    if weights is None:
        weights = present_class_weights(matrix.labels, n_classes) if config.use_class_weights else np.ones(n_classes)
    weights = np.asarray(weights, dtype=float)
    X, y = matrix.rows, matrix.labels
    W = np.zeros((n_classes, matrix.dim))
    b = np.zeros(n_classes)
    rng = np.random.default_rng(config.seed)
    history = []
    with np.errstate(over="ignore", invalid="ignore"):
        _descend(W, b, X, y, weights, config, rng, history)
    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
        raise NonFiniteLoss("parameters became non-finite")
    meta = {
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "learning_rate": config.learning_rate,
        "seed": config.seed,
        "use_class_weights": config.use_class_weights,
        "class_weights": weights.tolist(),
        "loss_history": history,
    }
    return SoftmaxModel(W, b, meta)


@dataclass(frozen=True)
class NaiveBayesModel:
    """Multinomial naive Bayes. Classes unseen in training have log prior -inf."""

    log_prior: np.ndarray
    log_likelihood: np.ndarray
    alpha: float = 1.0

    kind = "nb"

    @property
    def n_classes(self):
        return self.log_prior.shape[0]

    def predict_proba(self, rows):
        rows = _check_dim(rows, self.log_likelihood.shape[1])
        joint = rows @ self.log_likelihood.T + self.log_prior
        return softmax(joint)

    def predict(self, rows):
        return np.argmax(self.predict_proba(rows), axis=1)


def train_nb(matrix, alpha=1.0, n_classes=None):
    """Laplace-smoothed multinomial NB over non-negative count features."""
    if not alpha > 0:
        raise ConfigError("alpha must be > 0")
    if np.any(matrix.rows < 0):
        raise NegativeFeature("naive Bayes needs non-negative feature values")
    n_classes = n_classes or int(matrix.labels.max()) + 1
    counts = np.bincount(matrix.labels, minlength=n_classes).astype(float)
    feature_counts = np.zeros((n_classes, matrix.dim))
    np.add.at(feature_counts, matrix.labels, matrix.rows)
    smoothed = feature_counts + alpha
    log_likelihood = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    with np.errstate(divide="ignore"):
        log_prior = np.log(counts / counts.sum())
    return NaiveBayesModel(log_prior, log_likelihood, float(alpha))


def predict_proba(model, rows):
    return model.predict_proba(rows)


def predict(model, rows):
    """Argmax class id per row; ties go to the smaller id."""
    return model.predict(rows)


@dataclass(frozen=True)
class ClassifierSpec:
    """What to train inside each cross-validation fold."""

    kind: str = "softmax"
    train: TrainConfig = field(default_factory=TrainConfig)
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in ("softmax", "nb"):
            raise ConfigError(f"unknown classifier {self.kind!r}; choose softmax or nb")

    def __call__(self, matrix, n_classes):
        if self.kind == "nb":
            return train_nb(matrix, self.alpha, n_classes)
        return train_softmax(matrix, self.train, n_classes=n_classes)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "nb":
            d["alpha"] = self.alpha
        else:
            d.update(
                epochs=self.train.epochs,
                batch_size=self.train.batch_size,
                learning_rate=self.train.learning_rate,
                seed=self.train.seed,
                use_class_weights=self.train.use_class_weights,
            )
        return d
