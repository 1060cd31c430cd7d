"""Stratified K-fold cross-validation, confusion matrices and classification metrics."""

import dataclasses
import warnings
from dataclasses import dataclass, field

import numpy as np

from imbr.errors import ClassOutOfRange, LengthMismatch, TooFewRows
from imbr.resample import resample_with_provenance

METRIC_COLUMNS = ("Accuracy", "Precision", "Recall", "F1")


@dataclass(frozen=True)
class FoldPlan:
    assignments: np.ndarray
    n_folds: int
    seed: int

    def test_index(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_index(self, fold):
        return np.flatnonzero(self.assignments != fold)


def stratified_kfold(labels, n_folds=5, seed=0):
    """Shuffle each class with a seeded generator and deal it round-robin.

    Dealing continues across classes where the previous class stopped, so
    overall fold sizes also differ by at most one.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if labels.size < n_folds:
        raise TooFewRows(f"{labels.size} rows cannot fill {n_folds} folds")
    rng = np.random.default_rng(seed)
    assignments = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < n_folds:
            warnings.warn(
                f"class {c} has {members.size} members, fewer than {n_folds} folds; some folds will lack it",
                stacklevel=2,
            )
        members = rng.permutation(members)
        assignments[members] = (offset + np.arange(members.size)) % n_folds
        offset = (offset + members.size) % n_folds
    return FoldPlan(assignments, n_folds, seed)


def confusion(y_true, y_pred, n_classes):
    """Counts with rows = true class and columns = predicted class."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise LengthMismatch(f"{y_true.size} true labels vs {y_pred.size} predictions")
    for arr in (y_true, y_pred):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ClassOutOfRange(f"class ids must lie in [0, {n_classes})")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def _ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


@dataclass
class EvalReport:
    """Metrics for one evaluation.

    For cross-validation the scalar headline values (accuracy and the
    macro/micro/weighted averages) are unweighted means over folds; the
    per-class arrays and ``confusion`` come from the pooled confusion
    matrix, which is also summarized in ``pooled``.
    """

    confusion: np.ndarray
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro: dict
    micro: dict
    weighted: dict
    folds: list = field(default_factory=list)
    pooled: "EvalReport | None" = None
    audits: list = field(default_factory=list)

    @property
    def headline(self):
        return (self.accuracy, self.macro["precision"], self.macro["recall"], self.macro["f1"])

    def to_dict(self):
        d = {
            "accuracy": float(self.accuracy),
            "macro": {k: float(v) for k, v in self.macro.items()},
            "micro": {k: float(v) for k, v in self.micro.items()},
            "weighted": {k: float(v) for k, v in self.weighted.items()},
            "per_class": {
                "precision": self.precision.tolist(),
                "recall": self.recall.tolist(),
                "f1": self.f1.tolist(),
                "support": self.support.tolist(),
            },
            "confusion": self.confusion.tolist(),
        }
        if self.folds:
            d["folds"] = [f.to_dict() for f in self.folds]
        if self.pooled is not None:
            d["pooled"] = self.pooled.to_dict()
        if self.audits:
            d["synthetic_rows"] = [a.n_synthetic for a in self.audits]
        return d


def metrics(cm):
    """Accuracy and per-class / averaged precision, recall and F1.

    Undefined ratios count as 0. Macro averages run over the classes that
    occur in the true labels.
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = cm.sum()
    tp = np.diag(cm).astype(float)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    precision = _ratio(tp, predicted)
    recall = _ratio(tp, support)
    f1 = _ratio(2 * precision * recall, precision + recall)
    accuracy = float(_ratio(tp.sum(), total))
    present = support > 0
    if present.any():
        macro = {
            "precision": float(precision[present].mean()),
            "recall": float(recall[present].mean()),
            "f1": float(f1[present].mean()),
        }
        w = support / support.sum()
        weighted = {
            "precision": float(np.dot(w, precision)),
            "recall": float(np.dot(w, recall)),
            "f1": float(np.dot(w, f1)),
        }
    else:
        macro = {"precision": 0.0, "recall": 0.0, "f1": 0.0}
        weighted = dict(macro)
    # single-label multiclass: micro P = micro R = micro F1 = accuracy
    micro = {"precision": accuracy, "recall": accuracy, "f1": accuracy}
    return EvalReport(cm, accuracy, precision, recall, f1, support, macro, micro, weighted)


@dataclass(frozen=True)
class FoldAudit:
    """Where each fold's rows came from, for leakage checks.

    Synthetic rows get ids ``n, n+1, ...`` above every original row id.
    ``sources`` lists the original row ids each synthetic row was built from.
    """

    fold: int
    train_ids: np.ndarray
    test_ids: np.ndarray
    synthetic_ids: np.ndarray
    sources: np.ndarray

    @property
    def n_synthetic(self):
        return int(self.synthetic_ids.size)


def _fold_seed(seed, fold):
    return int(np.random.SeedSequence([int(seed) % (1 << 64), fold]).generate_state(1, np.uint64)[0])


def _mean_dicts(dicts):
    return {k: float(np.mean([d[k] for d in dicts])) for k in dicts[0]}


def cross_validate(matrix, resample, classifier, n_folds=5, seed=0, n_classes=None, plan=None):
    """K-fold evaluation with oversampling confined to the training partition.

    ``classifier`` is called as ``classifier(train_matrix, n_classes)`` and
    must return an object with ``predict(rows)``. ``resample`` is a
    ``ResampleConfig`` or ``None``; its seed is re-derived per fold.
    A precomputed ``plan`` replaces the stratified split drawn from ``seed``.
    """
    n_classes = n_classes or int(matrix.labels.max()) + 1
    if plan is None:
        plan = stratified_kfold(matrix.labels, n_folds, seed)
    n_folds = plan.n_folds
    fold_reports = []
    audits = []
    pooled = np.zeros((n_classes, n_classes), dtype=np.int64)
    for fold in range(n_folds):
        train_ids = plan.train_index(fold)
        test_ids = plan.test_index(fold)
        train = matrix.subset(train_ids)
        synthetic_ids = np.empty(0, np.int64)
        sources = np.empty((0, 2), np.int64)
        if resample is not None:
            cfg = dataclasses.replace(resample, seed=_fold_seed(resample.seed, fold))
            train, batches = resample_with_provenance(train, cfg)
            if batches:
                synthetic_ids = matrix.n + np.arange(sum(len(b) for b in batches))
                local = np.vstack([np.column_stack([b.centers, b.neighbors]) for b in batches])
                sources = train_ids[local]
        model = classifier(train, n_classes)
        test = matrix.subset(test_ids)
        cm = confusion(test.labels, model.predict(test.rows), n_classes)
        pooled += cm
        fold_reports.append(metrics(cm))
        audits.append(FoldAudit(fold, train_ids, test_ids, synthetic_ids, sources))

    pooled_report = metrics(pooled)
    return EvalReport(
        confusion=pooled,
        accuracy=float(np.mean([r.accuracy for r in fold_reports])),
        precision=pooled_report.precision,
        recall=pooled_report.recall,
        f1=pooled_report.f1,
        support=pooled_report.support,
        macro=_mean_dicts([r.macro for r in fold_reports]),
        micro=_mean_dicts([r.micro for r in fold_reports]),
        weighted=_mean_dicts([r.weighted for r in fold_reports]),
        folds=fold_reports,
        pooled=pooled_report,
        audits=audits,
    )


def majority_classifier(matrix, n_classes):
    """Baseline that always predicts the most frequent training class."""
    top = int(np.argmax(np.bincount(matrix.labels, minlength=n_classes)))

    class _Constant:
        def predict(self, rows):
            return np.full(np.atleast_2d(rows).shape[0], top, dtype=np.int64)

    return _Constant()

