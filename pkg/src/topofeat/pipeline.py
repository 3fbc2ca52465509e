"""Experiment harness: barcode combination strategies and classification.

Per subject, one barcode pair (dim 0, dim 1) per slice or per landmark
pattern.  Two ways to a final vector: aggregate the barcodes per dimension
and vectorize once, or vectorize each barcode and concatenate.  The rest is
a fixed deterministic pipeline: stratified split, z-score standardization
fit on training rows, L1-logistic feature selection by proximal gradient,
then logistic regression or k-nearest-neighbors with the usual binary
metrics.
"""

from __future__ import annotations

import csv
import io
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .barcode import Barcode, Range, aggregate, bounds, EMPTY_BOUNDS
from .imaging import DatasetManifest, ManifestRecord, load_image_file
from .persistence import AUTO, cubical_persistence, rips_persistence
from .ulbp import select_landmarks
from .vectorize import (DEFAULT_GAMMA, DEFAULT_LEVELS, DEFAULT_TROPICAL_R,
                        FeatureVector, METHODS, SamplingGrid, vectorize)


class ShapeError(ValueError):
    """Subjects disagree on slice count or feature layout."""


class StratificationError(ValueError):
    """A class is too small to split."""


class SingleClassError(ValueError):
    """Operation needs both classes present."""


class ParameterError(ValueError):
    """Invalid learner parameter (e.g. k exceeding the training size)."""


@dataclass(frozen=True)
class SubjectBarcodes:
    """Ordered per-slice (or per-pattern) barcode pairs of one subject."""

    id: str
    label: str
    per_slice: tuple[tuple[Barcode, Barcode], ...]

    def __post_init__(self) -> None:
        if not self.per_slice:
            raise ValueError(f"subject {self.id!r} has no barcodes")


@dataclass(frozen=True)
class ExperimentConfig:
    filtration: str = "cubical"
    ulbp_patterns: tuple[tuple[int, int], ...] = ()
    vectorizer: str = "bc"
    combine: str = "aggregate"
    gamma: int = DEFAULT_GAMMA
    levels: int = DEFAULT_LEVELS
    r: int = DEFAULT_TROPICAL_R
    test_fraction: float = 0.2
    seed: int = 0
    classifier: str = "logreg"
    selection: str = "lasso"

    def __post_init__(self) -> None:
        if self.filtration not in ("cubical", "rips"):
            raise ValueError(f"unknown filtration {self.filtration!r}")
        if self.filtration == "rips" and not self.ulbp_patterns:
            raise ValueError("rips filtration needs at least one ULBP pattern")
        if self.vectorizer not in METHODS:
            raise ValueError(f"unknown vectorizer {self.vectorizer!r}")
        if self.combine not in ("aggregate", "concat"):
            raise ValueError(f"unknown combine mode {self.combine!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0,1), got {self.test_fraction}")
        if self.classifier not in ("logreg", "knn"):
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.selection not in ("none", "lasso"):
            raise ValueError(f"unknown selection {self.selection!r}")


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    auc: float
    recall: float
    precision: float
    f1: float

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "auc": self.auc, "recall": self.recall,
                "precision": self.precision, "f1": self.f1}


# ---------------------------------------------------------------------------
# Barcode extraction and shared grids

def subject_barcodes(record: ManifestRecord, base_dir: str | Path,
                     filtration: str, patterns: tuple[tuple[int, int], ...] = ()) -> SubjectBarcodes:
    """Compute the ordered barcode pairs of one manifest record.

    Cubical: one pair per image, in manifest order.  Rips: one pair per
    (image, pattern), slice-major with patterns in (geometry, rotation)
    lexicographic order.
    """
    base = Path(base_dir)
    pairs: list[tuple[Barcode, Barcode]] = []
    for rel in record.images:
        img = load_image_file(base / rel, id=record.id)
        if filtration == "cubical":
            pairs.append(cubical_persistence(img))
        else:
            for g, r in sorted(patterns):
                cloud = select_landmarks(img, g, r)
                pairs.append(rips_persistence(cloud, AUTO))
    return SubjectBarcodes(record.id, record.label, tuple(pairs))


def shared_grids(subjects: list[SubjectBarcodes], gamma: int,
                 ids: set[str] | None = None) -> dict[int, SamplingGrid]:
    """One sampling grid per dimension spanning the global barcode bounds.

    ``ids`` restricts the bounds computation (training subjects only); the
    grid itself is then reused unchanged for every subject.
    """
    grids: dict[int, SamplingGrid] = {}
    for dim in (0, 1):
        lo, hi = np.inf, -np.inf
        for s in subjects:
            if ids is not None and s.id not in ids:
                continue
            for pair in s.per_slice:
                r = bounds(pair[dim])
                if len(pair[dim]):
                    lo, hi = min(lo, r.t_min), max(hi, r.t_max)
        rng = EMPTY_BOUNDS if lo > hi else Range(float(lo), float(hi))
        grids[dim] = SamplingGrid(rng, gamma)
    return grids


def _vectorize_one(b: Barcode, cfg: ExperimentConfig, grids: dict[int, SamplingGrid]) -> FeatureVector:
    return vectorize(b, cfg.vectorizer, grid=grids[b.dim], levels=cfg.levels, r=cfg.r)


def features_aggregate(s: SubjectBarcodes, cfg: ExperimentConfig,
                       grids: dict[int, SamplingGrid]) -> FeatureVector:
    """Aggregate the barcodes per dimension, then vectorize once per dimension."""
    agg0 = aggregate([pair[0] for pair in s.per_slice])
    agg1 = aggregate([pair[1] for pair in s.per_slice])
    v0, v1 = _vectorize_one(agg0, cfg, grids), _vectorize_one(agg1, cfg, grids)
    return FeatureVector(v0.values + v1.values, v0.labels + v1.labels)


def features_concat(s: SubjectBarcodes, cfg: ExperimentConfig,
                    grids: dict[int, SamplingGrid]) -> FeatureVector:
    """Vectorize every barcode, then concatenate: dim-0 blocks in slice order,
    followed by dim-1 blocks.  Labels gain a slice prefix ``s{k}_``."""
    values: list[float] = []
    labels: list[str] = []
    for dim in (0, 1):
        for k, pair in enumerate(s.per_slice):
            v = _vectorize_one(pair[dim], cfg, grids)
            values.extend(v.values)
            labels.extend(f"s{k:02d}_{lab}" for lab in v.labels)
    return FeatureVector(tuple(values), tuple(labels))


def subject_features(s: SubjectBarcodes, cfg: ExperimentConfig,
                     grids: dict[int, SamplingGrid]) -> FeatureVector:
    if cfg.combine == "aggregate":
        return features_aggregate(s, cfg, grids)
    return features_concat(s, cfg, grids)


def build_feature_matrix(subjects: list[SubjectBarcodes], cfg: ExperimentConfig,
                         grids: dict[int, SamplingGrid]):
    """Stack per-subject features; returns (ids, labels, X, feature_names)."""
    slices = len(subjects[0].per_slice)
    for s in subjects:
        if len(s.per_slice) != slices:
            raise ShapeError(
                f"subject {s.id!r} has {len(s.per_slice)} slices, expected {slices}")
    rows, names = [], None
    for s in subjects:
        v = subject_features(s, cfg, grids)
        if names is None:
            names = list(v.labels)
        elif list(v.labels) != names:
            raise ShapeError(f"subject {s.id!r} produced a different feature layout")
        rows.append(v.array())
    ids = [s.id for s in subjects]
    labels = [s.label for s in subjects]
    return ids, labels, np.vstack(rows), names


# ---------------------------------------------------------------------------
# Feature matrix CSV

def write_features_csv(path: str | Path, ids, labels, X, names) -> None:
    """CSV with columns ``id,label`` then the labeled features, row per subject."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label"] + list(names))
        for i, (sid, lab) in enumerate(zip(ids, labels)):
            writer.writerow([sid, lab] + [repr(float(v)) for v in X[i]])


def read_features_csv(path: str | Path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["id", "label"]:
            raise ValueError("feature CSV must start with id,label columns")
        names = header[2:]
        ids, labels, rows = [], [], []
        for row in reader:
            if not row:
                continue
            ids.append(row[0])
            labels.append(row[1])
            rows.append([float(v) for v in row[2:]])
    X = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, len(names)))
    return ids, labels, X, names


# ---------------------------------------------------------------------------
# Split and standardization

def split(ids: list[str], labels: list[str], test_fraction: float, seed: int):
    """Deterministic stratified split; returns (train_ids, test_ids).

    Each class contributes round(fraction * size) test subjects (at least 1,
    at most size - 1), drawn by a seeded permutation; outputs preserve input
    order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0,1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_idx: set[int] = set()
    for label in sorted(set(labels)):
        members = [i for i, lab in enumerate(labels) if lab == label]
        if len(members) < 2:
            raise StratificationError(f"class {label!r} has {len(members)} subject(s), need >= 2")
        n_test = int(len(members) * test_fraction + 0.5)
        n_test = min(max(n_test, 1), len(members) - 1)
        perm = rng.permutation(len(members))
        test_idx.update(members[p] for p in perm[:n_test])
    train = [ids[i] for i in range(len(ids)) if i not in test_idx]
    test = [ids[i] for i in range(len(ids)) if i in test_idx]
    return train, test


def zscore_fit(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and population stds of the training rows; zero stds → 1."""
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)
    return means, stds


def zscore_apply(X: np.ndarray, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    return (X - means) / stds


# ---------------------------------------------------------------------------
# L1-penalized logistic selection (proximal gradient)

def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _lipschitz(X: np.ndarray) -> float:
    """Upper bound on the logistic-loss gradient Lipschitz constant via
    power iteration on X^T X / (4n)."""
    n, d = X.shape
    v = np.ones(d) / np.sqrt(d)
    lam = 0.0
    for _ in range(60):
        u = X.T @ (X @ v)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return 1e-12
        lam, v = norm, u / norm
    return max(lam / (4.0 * n) * 1.01, 1e-12)


def lasso_fit(X: np.ndarray, y: np.ndarray, lam: float,
              max_iter: int = 10000, tol: float = 1e-9) -> np.ndarray:
    """Accelerated proximal gradient (soft-thresholding) for L1-penalized
    logistic regression, no intercept, started from zero.

    y must be +/-1 on z-scored features.  Returns the weight vector; emits a
    warning when the iteration cap is hit.
    """
    n, d = X.shape
    step = 1.0 / _lipschitz(X)
    w = np.zeros(d)
    z = w
    momentum = 1.0
    for _ in range(max_iter):
        grad = X.T @ (-y * _sigmoid(-y * (X @ z))) / n
        w_new = z - step * grad
        w_new = np.sign(w_new) * np.maximum(np.abs(w_new) - step * lam, 0.0)
        momentum_new = (1.0 + np.sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0
        z = w_new + ((momentum - 1.0) / momentum_new) * (w_new - w)
        delta = np.abs(w_new - w).max()
        w, momentum = w_new, momentum_new
        if delta < tol * max(1.0, np.abs(w).max()):
            return w
    warnings.warn(f"lasso did not converge in {max_iter} iterations (lambda={lam})")
    return w


SELECTION_THRESHOLD = 1e-8
LASSO_LAMBDA_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0)
_LAMBDA_SPLIT_SALT = 9001  # keeps the internal validation split independent of the outer one


def lasso_select(X: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Indices of columns with |coefficient| above the selection threshold."""
    w = lasso_fit(X, y, lam)
    return np.nonzero(np.abs(w) > SELECTION_THRESHOLD)[0]


def choose_lasso_lambda(X: np.ndarray, y: np.ndarray, seed: int) -> float:
    """Pick lambda from a fixed 5-point grid on a single validation fold.

    Fits on 80% of the rows (stratified by sign), scores sign(Xw) accuracy
    on the rest; ties favor the larger (sparser) lambda.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, _LAMBDA_SPLIT_SALT]))
    val_idx: list[int] = []
    for cls in (-1.0, 1.0):
        members = np.nonzero(y == cls)[0]
        n_val = min(max(int(len(members) * 0.2 + 0.5), 1), len(members) - 1)
        perm = rng.permutation(len(members))
        val_idx.extend(members[perm[:n_val]].tolist())
    val_mask = np.zeros(len(y), dtype=bool)
    val_mask[val_idx] = True
    X_fit, y_fit = X[~val_mask], y[~val_mask]
    X_val, y_val = X[val_mask], y[val_mask]

    best_lam, best_acc = LASSO_LAMBDA_GRID[0], -1.0
    for lam in LASSO_LAMBDA_GRID:
        w = lasso_fit(X_fit, y_fit, lam)
        pred = np.where(X_val @ w >= 0.0, 1.0, -1.0)
        acc = float((pred == y_val).mean())
        if acc >= best_acc:
            best_lam, best_acc = lam, acc
    return best_lam


# ---------------------------------------------------------------------------
# Classifiers

LOGREG_L2 = 1e-3
LOGREG_TOL = 1e-8
LOGREG_MAX_ITER = 50000
KNN_K = 5


def logreg_loss_grad(wb: np.ndarray, X: np.ndarray, y01: np.ndarray,
                     l2: float = LOGREG_L2) -> tuple[float, np.ndarray]:
    """Mean cross-entropy with an L2 penalty on the weights (not the bias).

    ``wb`` stacks the d weights and one bias term.
    """
    w, b = wb[:-1], wb[-1]
    z = X @ w + b
    p = _sigmoid(z)
    loss = float(np.mean(np.logaddexp(0.0, z) - y01 * z) + 0.5 * l2 * (w @ w))
    resid = (p - y01) / len(y01)
    grad = np.concatenate([X.T @ resid + l2 * w, [resid.sum()]])
    return loss, grad


def logreg_fit(X: np.ndarray, y01: np.ndarray, l2: float = LOGREG_L2,
               tol: float = LOGREG_TOL, max_iter: int = LOGREG_MAX_ITER) -> np.ndarray:
    """Gradient descent with a fixed Lipschitz step until the gradient
    infinity-norm drops below ``tol``."""
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    step = 1.0 / (_lipschitz(Xa) + l2)
    wb = np.zeros(d + 1)
    for _ in range(max_iter):
        _, grad = logreg_loss_grad(wb, X, y01, l2)
        if np.abs(grad).max() < tol:
            return wb
        wb = wb - step * grad
    warnings.warn(f"logreg did not converge in {max_iter} iterations")
    return wb


def logreg_predict(wb: np.ndarray, X: np.ndarray) -> np.ndarray:
    return _sigmoid(X @ wb[:-1] + wb[-1])


def knn_scores(X_train: np.ndarray, y01: np.ndarray, X_test: np.ndarray,
               k: int = KNN_K) -> np.ndarray:
    """Fraction of positive labels among the k nearest training rows.

    Euclidean metric; equal distances are broken by the lower training row
    index (stable argsort).
    """
    if k > len(X_train):
        raise ParameterError(f"k={k} exceeds training size {len(X_train)}")
    diff = X_test[:, None, :] - X_train[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    order = np.argsort(dist, axis=1, kind="stable")
    return y01[order[:, :k]].mean(axis=1)


def train_predict(classifier: str, X_train: np.ndarray, y_train: list[str],
                  X_test: np.ndarray, positive_label: str, *,
                  k: int = KNN_K, l2: float = LOGREG_L2) -> tuple[np.ndarray, list[str]]:
    """Fit the chosen classifier and score the test rows.

    Scores are positive-class probabilities (logreg) or neighbor fractions
    (knn); predictions threshold the score at 0.5 (>= goes positive).
    """
    y01 = np.asarray([1.0 if lab == positive_label else 0.0 for lab in y_train])
    if classifier == "logreg":
        wb = logreg_fit(X_train, y01, l2=l2)
        scores = logreg_predict(wb, X_test)
    elif classifier == "knn":
        scores = knn_scores(X_train, y01, X_test, k=k)
    else:
        raise ValueError(f"unknown classifier {classifier!r}")
    negative = None
    for lab in y_train:
        if lab != positive_label:
            negative = lab
            break
    if negative is None:
        raise SingleClassError("training rows contain a single class")
    predicted = [positive_label if s >= 0.5 else negative for s in scores]
    return scores, predicted


# ---------------------------------------------------------------------------
# Metrics

def metrics(scores: np.ndarray, predicted: list[str], truth: list[str]) -> MetricsReport:
    """Accuracy, rank-based AUC, recall, precision, F1 for binary labels.

    The positive class is the lexicographically larger label.  AUC is the
    Mann-Whitney statistic with half credit for score ties; precision is 0
    when nothing is predicted positive, F1 is 0 when precision and recall
    are both 0.
    """
    if len(truth) == 0:
        raise ValueError("empty evaluation set")
    classes = sorted(set(truth))
    if len(classes) < 2:
        raise SingleClassError("AUC needs both classes in the truth labels")
    positive = classes[-1]
    t = np.asarray([lab == positive for lab in truth])
    p = np.asarray([lab == positive for lab in predicted])
    scores = np.asarray(scores, dtype=np.float64)

    accuracy = float((t == p).mean())
    tp = float(np.sum(t & p))
    fp = float(np.sum(~t & p))
    fn = float(np.sum(t & ~p))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

    pos_scores = scores[t]
    neg_scores = scores[~t]
    wins = (pos_scores[:, None] > neg_scores[None, :]).sum()
    ties = (pos_scores[:, None] == neg_scores[None, :]).sum()
    auc = float((wins + 0.5 * ties) / (len(pos_scores) * len(neg_scores)))
    return MetricsReport(accuracy, auc, recall, precision, f1)


# ---------------------------------------------------------------------------
# End-to-end experiment over a feature matrix

def run_experiment(ids: list[str], labels: list[str], X: np.ndarray, names: list[str],
                   *, classifier: str = "logreg", selection: str = "lasso",
                   test_fraction: float = 0.2, seed: int = 0) -> dict:
    """Split, standardize, select, classify, evaluate; returns a report dict.

    Deterministic for fixed inputs and seed; timings are the only
    nondeterministic fields.
    """
    if len(set(labels)) < 2:
        raise SingleClassError("feature matrix carries a single label")
    timings: dict[str, float] = {}
    t0 = time.perf_counter()

    train_ids, test_ids = split(ids, labels, test_fraction, seed)
    by_id = {sid: i for i, sid in enumerate(ids)}
    tr = [by_id[s] for s in train_ids]
    te = [by_id[s] for s in test_ids]
    y_train = [labels[i] for i in tr]
    y_test = [labels[i] for i in te]
    positive = sorted(set(labels))[-1]
    timings["split"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    means, stds = zscore_fit(X[tr])
    X_train = zscore_apply(X[tr], means, stds)
    X_test = zscore_apply(X[te], means, stds)
    timings["standardize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    chosen_lambda = None
    selected = np.arange(X.shape[1])
    if selection == "lasso":
        y_pm = np.asarray([1.0 if lab == positive else -1.0 for lab in y_train])
        chosen_lambda = choose_lasso_lambda(X_train, y_pm, seed)
        selected = lasso_select(X_train, y_pm, chosen_lambda)
        if len(selected) == 0:
            warnings.warn("lasso selected no features; keeping all columns")
            selected = np.arange(X.shape[1])
    timings["select"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    scores, predicted = train_predict(classifier, X_train[:, selected], y_train,
                                      X_test[:, selected], positive)
    timings["train_predict"] = time.perf_counter() - t0

    report = metrics(scores, predicted, y_test)
    return {
        "metrics": report.as_dict(),
        "positive_label": positive,
        "counts": {"train": len(tr), "test": len(te),
                   "features_in": int(X.shape[1]), "features_used": int(len(selected))},
        "lasso_lambda": chosen_lambda,
        "selected_features": [names[i] for i in selected[:50]],
        "timings_ms": {k: round(v * 1000.0, 3) for k, v in timings.items()},
        "test_ids": test_ids,
    }
