"""Classifiers over meme feature vectors.

Two model kinds are provided: Gaussian naive Bayes and a bagged ensemble
of CART-style trees with Gini splits. Both are stored as plain arrays so a
model serializes to JSON and can be evaluated without this module.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import FEATURE_NAMES, feature_matrix
from .io import SCHEMA_VERSION, csv_text, dump_json

NAIVE_BAYES = "naive_bayes"
TREE_ENSEMBLE = "tree_ensemble"
KINDS = (NAIVE_BAYES, TREE_ENSEMBLE)
N_TREES = 100
N_REPEATS = 10
VAR_FLOOR = 1e-9
TIE_EPS = 1e-12
CLASS_NAMES = ("Unsuccessful", "Successful")


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray                 # 1 = Successful, 0 = Unsuccessful
    feature_names: tuple = FEATURE_NAMES
    ids: tuple = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError("X must be (n, d) with one label per row")
        if X.shape[1] != len(self.feature_names):
            raise ValueError(f"X has {X.shape[1]} columns but {len(self.feature_names)} feature names")
        if not np.all(np.isfinite(X)):
            raise ValueError("feature values must be finite")
        if np.any((y != 0) & (y != 1)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "ids", tuple(self.ids))

    @classmethod
    def from_vectors(cls, vectors) -> "Dataset":
        """Build from FeatureVectors, dropping Excluded memes."""
        X, y, ids = feature_matrix(vectors)
        return cls(X, y, FEATURE_NAMES, tuple(ids))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        ids = tuple(self.ids[i] for i in idx) if self.ids else ()
        return Dataset(self.X[idx], self.y[idx], self.feature_names, ids)

    def check_trainable(self):
        if self.n == 0 or np.unique(self.y).shape[0] < 2:
            raise ValueError("training data must contain both classes")


@dataclass(eq=False)
class TrainedModel:
    kind: str
    params: dict
    feature_names: tuple
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "feature_names": list(self.feature_names),
            "parameters": self.params,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainedModel":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ModelFormatError(f"model schema_version {doc.get('schema_version')!r}, expected {SCHEMA_VERSION}")
        kind = doc.get("kind")
        if kind not in KINDS:
            raise ModelFormatError(f"unknown model kind {kind!r}")
        model = cls(kind, doc["parameters"], tuple(doc["feature_names"]), doc.get("metadata", {}))
        _check_params(model)
        return model

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        return cls.from_dict(json.loads(text))


def _check_params(model: TrainedModel):
    d = len(model.feature_names)
    p = model.params
    if model.kind == NAIVE_BAYES:
        if np.shape(p["mean"]) != (2, d) or np.shape(p["var"]) != (2, d) or len(p["prior"]) != 2:
            raise ModelFormatError("naive Bayes parameters do not match the feature count")
    else:
        for t in p["trees"]:
            if any(f >= d for f in t["feature"]):
                raise ModelFormatError("tree refers to a feature outside the model")


def balanced(data: Dataset, rng_seed: int = 0, per_class: int | None = None) -> Dataset:
    """Random equal-size subsample of both classes, in original row order.

    ``per_class`` defaults to the minority class size.
    """
    data.check_trainable()
    counts = np.bincount(data.y, minlength=2)
    k = int(counts.min()) if per_class is None else int(per_class)
    if not 1 <= k <= counts.min():
        raise ValueError(f"per_class must lie in [1, {int(counts.min())}]")
    rng = np.random.default_rng(np.random.SeedSequence([rng_seed, 0xBA1]))
    keep = np.concatenate([rng.choice(np.flatnonzero(data.y == c), k, replace=False) for c in (0, 1)])
    return data.subset(np.sort(keep))


# -- naive Bayes ------------------------------------------------------------

def train_nb(data: Dataset, var_floor: float = VAR_FLOOR) -> TrainedModel:
    """Gaussian naive Bayes with class priors from label frequencies.

    Per-class variances are floored at ``var_floor * (global variance + 1e-12)``
    per feature so constant features leave the decision to the priors.
    """
    data.check_trainable()
    X, y = data.X, data.y
    floor = var_floor * (X.var(axis=0) + 1e-12)
    mean = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
    var = np.stack([np.maximum(X[y == c].var(axis=0), floor) for c in (0, 1)])
    prior = np.bincount(y, minlength=2) / y.shape[0]
    params = {"mean": mean.tolist(), "var": var.tolist(), "prior": prior.tolist()}
    return TrainedModel(NAIVE_BAYES, params, data.feature_names,
                        {"hyperparameters": {"var_floor": var_floor}, "n_train": data.n})


def _nb_scores(params: dict, X: np.ndarray) -> np.ndarray:
    mean = np.asarray(params["mean"])
    var = np.asarray(params["var"])
    prior = np.asarray(params["prior"])
    with np.errstate(divide="ignore"):
        logp = np.log(prior)
    terms = np.stack([-0.5 * (np.log(2 * np.pi * var[c]) + (X - mean[c]) ** 2 / var[c]) for c in (0, 1)], axis=1)
    # centre each feature across classes so identical huge terms cancel exactly
    terms -= terms.max(axis=1, keepdims=True)
    ll = logp[None, :] + terms.sum(axis=2)
    # P(class 1 | x) by a stable softmax
    top = ll.max(axis=1, keepdims=True)
    w = np.exp(ll - top)
    return w[:, 1] / w.sum(axis=1)


# -- trees ------------------------------------------------------------------

def _gini(n1, n):
    p = n1 / n
    return 2.0 * p * (1.0 - p)


def _best_split(X: np.ndarray, y: np.ndarray):
    """``(feature, threshold)`` maximising Gini decrease, or ``None``.

    Candidates are midpoints between consecutive distinct values. Gains
    within 1e-12 of the best are tied; the lowest ``(feature, threshold)``
    among them wins.
    """
    n, d = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    ys = y[order].astype(np.float64)
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    l1 = np.cumsum(ys, axis=0)[:-1]
    r1 = ys.sum(axis=0)[None, :] - l1
    child = (nl * _gini(l1, nl) + nr * _gini(r1, nr)) / n
    gain = _gini(float(y.sum()), n) - child
    gain = np.where(valid, gain, -np.inf)
    best = gain.max()
    # feature-major scan: column f, ascending threshold
    ok = (gain >= best - TIE_EPS).T
    f, pos = np.unravel_index(int(np.argmax(ok)), ok.shape)
    lo, hi = xs[pos, f], xs[pos + 1, f]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:      # adjacent floats: the midpoint rounds up to hi
        thr = lo
    return int(f), float(thr)


def fit_tree(X: np.ndarray, y: np.ndarray, max_depth: int | None = None) -> dict:
    """Fit one classification tree; returns flat arrays.

    ``feature[i] == -1`` marks a leaf whose class is ``value[i]``. Rows with
    ``x[feature] <= threshold`` go left. Impure nodes are split while any
    split exists and ``max_depth`` allows.
    """
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yi = y[idx]
        n1 = int(yi.sum())
        value[node] = int(n1 > idx.shape[0] - n1)
        if n1 == 0 or n1 == idx.shape[0] or (max_depth is not None and depth >= max_depth):
            continue
        split = _best_split(X[idx], yi)
        if split is None:
            continue
        f, thr = split
        go_left = X[idx, f] <= thr
        feature[node], threshold[node] = f, thr
        left[node], right[node] = new_node(), new_node()
        stack.append((right[node], idx[~go_left], depth + 1))
        stack.append((left[node], idx[go_left], depth + 1))
    return {"feature": feature, "threshold": threshold, "left": left, "right": right, "value": value}


def tree_predict(tree: dict, X: np.ndarray) -> np.ndarray:
    feature = np.asarray(tree["feature"], dtype=np.int64)
    threshold = np.asarray(tree["threshold"], dtype=np.float64)
    left = np.asarray(tree["left"], dtype=np.int64)
    right = np.asarray(tree["right"], dtype=np.int64)
    value = np.asarray(tree["value"], dtype=np.int64)
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    while True:
        f = feature[node]
        inner = f >= 0
        if not inner.any():
            return value[node]
        r, nd = rows[inner], node[inner]
        goes_left = X[r, f[inner]] <= threshold[nd]
        node[inner] = np.where(goes_left, left[nd], right[nd])


def train_ensemble(data: Dataset, n_trees: int = N_TREES, max_depth: int | None = None,
                   rng_seed: int = 0, bootstrap: bool = True) -> TrainedModel:
    """Bagged Gini trees; tree ``i`` draws its bootstrap from spawned stream ``i``."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if max_depth is not None and max_depth < 1:
        raise ValueError("max_depth must be >= 1 or None")
    data.check_trainable()
    n = data.n
    trees = []
    for child in np.random.SeedSequence([rng_seed, 0x7EE5]).spawn(n_trees):
        idx = np.random.default_rng(child).integers(0, n, n) if bootstrap else np.arange(n)
        trees.append(fit_tree(data.X[idx], data.y[idx], max_depth))
    hyper = {"n_trees": n_trees, "max_depth": max_depth, "bootstrap": bootstrap}
    return TrainedModel(TREE_ENSEMBLE, {"trees": trees}, data.feature_names,
                        {"rng_seed": rng_seed, "hyperparameters": hyper, "n_train": n})


def train(data: Dataset, kind: str, rng_seed: int = 0, **hyper) -> TrainedModel:
    if kind == NAIVE_BAYES:
        return train_nb(data, **hyper)
    if kind == TREE_ENSEMBLE:
        return train_ensemble(data, rng_seed=rng_seed, **hyper)
    raise ValueError(f"unknown model kind {kind!r}")


# -- prediction -------------------------------------------------------------

def predict_scores(model: TrainedModel, X) -> np.ndarray:
    """Score in [0, 1] per row: P(Successful) for NB, vote share for trees."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != len(model.feature_names):
        raise ValueError(f"expected {len(model.feature_names)} features, got {X.shape[1]}")
    if model.kind == NAIVE_BAYES:
        return _nb_scores(model.params, X)
    votes = np.zeros(X.shape[0])
    for t in model.params["trees"]:
        votes += tree_predict(t, X)
    return votes / len(model.params["trees"])


def predict_labels(model: TrainedModel, X) -> np.ndarray:
    return (predict_scores(model, X) >= 0.5).astype(np.int64)


def predict(model: TrainedModel, features: Sequence[float]):
    """``(label, score)`` for one feature vector."""
    s = float(predict_scores(model, np.asarray(features, dtype=np.float64)[None, :])[0])
    return CLASS_NAMES[int(s >= 0.5)], s


def accuracy(model: TrainedModel, data: Dataset) -> float:
    return float(np.mean(predict_labels(model, data.X) == data.y))


# -- evaluation -------------------------------------------------------------

def stratified_folds(y, k_folds: int, rng_seed: int = 0) -> np.ndarray:
    """Fold id per row: each class is shuffled, then dealt round-robin.

    The deal continues across classes, so fold sizes differ by at most one.
    """
    y = np.asarray(y)
    n = y.shape[0]
    if k_folds < 2:
        raise ValueError("k_folds must be >= 2")
    if n < k_folds:
        raise ValueError(f"too few rows ({n}) for {k_folds} folds")
    counts = np.bincount(y, minlength=2)
    if counts.min() < 2:
        raise ValueError("each class needs at least two rows for stratified folds")
    rng = np.random.default_rng(np.random.SeedSequence([rng_seed, 0xF01D]))
    folds = np.empty(n, dtype=np.int64)
    start = 0
    for c in (0, 1):
        idx = rng.permutation(np.flatnonzero(y == c))
        folds[idx] = (start + np.arange(idx.shape[0])) % k_folds
        start += idx.shape[0]
    return folds


@dataclass(frozen=True)
class CVResult:
    model_kind: str
    accuracy: float
    fold_accuracies: tuple
    folds: np.ndarray
    oof_scores: np.ndarray
    importance: tuple = ()      # (name, importance) ranked, from held-out folds

    def to_csv(self) -> str:
        rows = [(i, a) for i, a in enumerate(self.fold_accuracies)]
        rows.append(("mean", self.accuracy))
        return csv_text(("fold", "accuracy"), rows, comment=f"cross-validation model={self.model_kind}")


def cross_validate(data: Dataset, model_kind: str, k_folds: int = 10, rng_seed: int = 0,
                   importance: bool = False, n_repeats: int = N_REPEATS, **hyper) -> CVResult:
    """Stratified k-fold accuracy; overall accuracy is the mean of the folds.

    With ``importance=True`` permutation importance is measured on each
    held-out fold and averaged.
    """
    folds = stratified_folds(data.y, k_folds, rng_seed)
    accs = []
    oof = np.empty(data.n)
    imp = np.zeros(len(data.feature_names))
    for f in range(k_folds):
        test = np.flatnonzero(folds == f)
        train_idx = np.flatnonzero(folds != f)
        model = train(data.subset(train_idx), model_kind, rng_seed=rng_seed + f, **hyper)
        held = data.subset(test)
        oof[test] = predict_scores(model, held.X)
        accs.append(float(np.mean((oof[test] >= 0.5) == held.y)))
        if importance:
            imp += _permutation_drops(model, held, n_repeats, rng_seed + f)
    ranked = _rank(data.feature_names, imp / k_folds) if importance else ()
    return CVResult(model_kind, math.fsum(accs) / k_folds, tuple(accs), folds, oof, ranked)


def _permutation_drops(model: TrainedModel, data: Dataset, n_repeats: int, rng_seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([rng_seed, 0x1A7]))
    base = accuracy(model, data)
    drops = np.zeros(data.X.shape[1])
    for j in range(data.X.shape[1]):
        Xp = data.X.copy()
        diffs = []
        for _ in range(n_repeats):
            Xp[:, j] = rng.permutation(data.X[:, j])
            diffs.append(base - float(np.mean(predict_labels(model, Xp) == data.y)))
        drops[j] = math.fsum(diffs) / n_repeats
    return drops


def _rank(names, values) -> tuple:
    order = sorted(range(len(names)), key=lambda j: (-values[j], names[j]))
    return tuple((names[j], float(values[j])) for j in order)


def feature_importance(model: TrainedModel, data: Dataset, n_repeats: int = N_REPEATS,
                       rng_seed: int = 0) -> tuple:
    """Permutation importance: mean accuracy drop when one column is shuffled.

    Ranked by decreasing importance; ties keep column order.
    """
    if tuple(data.feature_names) != tuple(model.feature_names):
        raise ValueError("dataset features do not match the model")
    return _rank(data.feature_names, _permutation_drops(model, data, n_repeats, rng_seed))
