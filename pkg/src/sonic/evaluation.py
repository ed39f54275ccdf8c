"""Confusion matrices, accuracy / macro-F1, and stratified cross-validation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import clone

__all__ = [
    "Metrics",
    "confusion_matrix",
    "metrics_from_confusion",
    "stratified_kfold",
    "group_kfold",
    "fold_seed",
    "cross_validate",
]


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    macro_f1: float
    per_class_f1: tuple[float, ...]


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Count matrix with rows = true class, columns = predicted class."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError("y_true and y_pred must be 1-D and the same length")
    if y_true.size == 0:
        raise ValueError("cannot build a confusion matrix from no samples")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise ValueError(f"{name} contains labels outside 0..{n_classes - 1}")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def metrics_from_confusion(cm: np.ndarray) -> Metrics:
    """Accuracy and per-class / macro F1 from a confusion matrix.

    Any 0/0 in precision, recall, or F1 (a class never predicted or never
    present) contributes 0 for that quantity.
    """
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] < 1:
        raise ValueError(f"confusion matrix must be square, got shape {cm.shape}")
    total = cm.sum()
    if total == 0:
        raise ValueError("confusion matrix is empty")

    tp = np.diag(cm).astype(np.float64)
    predicted = cm.sum(axis=0).astype(np.float64)
    actual = cm.sum(axis=1).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)
    return Metrics(
        accuracy=float(tp.sum() / total),
        macro_f1=float(f1.mean()),
        per_class_f1=tuple(float(v) for v in f1),
    )


def stratified_kfold(labels, n_folds: int = 5, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Class-stratified folds: seeded shuffle within each class, then
    round-robin assignment, so per-class test counts differ by at most 1.

    Returns a list of (train_indices, test_indices) pairs whose test sets
    partition the dataset. Deterministic for a given seed.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-D array")
    if n_folds < 2:
        raise ValueError(f"n_folds must be >= 2, got {n_folds}")

    rng = np.random.default_rng(seed)
    fold_of = np.empty(labels.size, dtype=np.intp)
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < n_folds:
            raise ValueError(
                f"class {cls} has only {members.size} sample(s); "
                f"{n_folds}-fold cross-validation needs at least {n_folds}"
            )
        rng.shuffle(members)
        fold_of[members] = np.arange(members.size) % n_folds

    everything = np.arange(labels.size)
    splits = []
    for fold in range(n_folds):
        test = everything[fold_of == fold]
        train = everything[fold_of != fold]
        splits.append((train, test))
    return splits


def group_kfold(groups, n_folds: int = 5, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Leakage-safe alternative: whole groups (subjects) are assigned to
    folds, so no group appears in both train and test."""
    groups = np.asarray(groups)
    if groups.ndim != 1 or groups.size == 0:
        raise ValueError("groups must be a non-empty 1-D array")
    unique = np.unique(groups)
    if unique.size < n_folds:
        raise ValueError(
            f"{n_folds}-fold grouping needs at least {n_folds} distinct "
            f"groups, got {unique.size}"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(unique.size)
    fold_of_group = {unique[g]: i % n_folds for i, g in enumerate(order)}
    fold_of = np.array([fold_of_group[g] for g in groups])

    everything = np.arange(groups.size)
    return [
        (everything[fold_of != fold], everything[fold_of == fold])
        for fold in range(n_folds)
    ]


def fold_seed(master_seed: int, fold: int, n_folds: int) -> int:
    """Stable per-fold seed derived from the master seed."""
    children = np.random.SeedSequence(master_seed).spawn(n_folds)
    return int(children[fold].generate_state(1)[0])


def _percent(value: float) -> float:
    return round(100.0 * value, 2)


def cross_validate(estimator, X, y, n_folds: int = 5, seed: int = 0,
                   task: str = "", groups=None, config_echo: dict | None = None,
                   fold_callback=None) -> dict:
    """Train a fresh clone of ``estimator`` per fold and evaluate it on the
    held-out fold.

    Each clone gets a fold-specific ``random_state`` derived from ``seed``
    (when the estimator exposes one). Returns the report dictionary with
    per-fold and aggregate metrics as percentages with two decimals.
    """
    X = np.asarray(X)
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or y.size != X.shape[0]:
        raise ValueError("y must be 1-D with one label per sample")
    if y.min() < 0:
        raise ValueError("class indices must be nonnegative")
    n_classes = int(y.max()) + 1

    if groups is not None:
        splits = group_kfold(groups, n_folds, seed)
    else:
        splits = stratified_kfold(y, n_folds, seed)

    fold_rows = []
    accuracies = []
    macro_f1s = []
    for fold, (train_idx, test_idx) in enumerate(splits):
        model = clone(estimator)
        if "random_state" in model.get_params():
            model.set_params(random_state=fold_seed(seed, fold, n_folds))
        model.fit(X[train_idx], y[train_idx])
        predictions = np.asarray(model.predict(X[test_idx]))
        cm = confusion_matrix(y[test_idx], predictions, n_classes)
        m = metrics_from_confusion(cm)
        accuracies.append(m.accuracy)
        macro_f1s.append(m.macro_f1)
        fold_rows.append({
            "fold": fold,
            "accuracy": _percent(m.accuracy),
            "macro_f1": _percent(m.macro_f1),
            "confusion": cm.tolist(),
        })
        if fold_callback is not None:
            fold_callback(fold, model)

    accuracies = np.array(accuracies)
    macro_f1s = np.array(macro_f1s)
    return {
        "task": task,
        "folds": fold_rows,
        "mean_accuracy": _percent(accuracies.mean()),
        "mean_macro_f1": _percent(macro_f1s.mean()),
        "std_accuracy": _percent(accuracies.std()),
        "std_macro_f1": _percent(macro_f1s.std()),
        "config_echo": dict(config_echo or {}),
    }
