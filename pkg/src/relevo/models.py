"""Baseline learners and a SERA-driven cross-validation harness.

The learners are deliberately simple (training mean, ridge-stabilised least
squares, k nearest neighbours); external model predictions come in through
prediction CSV files instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .metrics import DEFAULT_STEP, sera
from .relevance import RelevanceFunction


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple = ()
    target_name: str = "y"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.size:
            raise ValueError(f"{X.shape[0]} feature rows for {y.size} targets")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains missing or non-finite values")
        names = tuple(self.feature_names) or tuple(f"x{i + 1}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError(f"{len(names)} feature names for {X.shape[1]} columns")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.feature_names, self.target_name)


@dataclass(frozen=True)
class CvPlan:
    folds: tuple  # tuple of sorted index arrays
    seed: int

    @property
    def n(self) -> int:
        return sum(f.size for f in self.folds)


def make_cv_plan(n: int, folds: int = 10, seed: int = 0) -> CvPlan:
    """Seeded random partition of ``range(n)`` into folds whose sizes differ by at most one."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n < folds:
        raise ValueError(f"{n} rows cannot fill {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    parts = tuple(np.sort(p) for p in np.array_split(perm, folds))
    return CvPlan(parts, seed)


def fit_predict_mean(train: Dataset, X_test) -> np.ndarray:
    if train.n == 0:
        raise ValueError("empty training set")
    X_test = np.atleast_2d(np.asarray(X_test, dtype=float))
    return np.full(X_test.shape[0], float(np.mean(train.y)))


def _design(X):
    return np.hstack([np.ones((X.shape[0], 1)), X])


def fit_ols(train: Dataset, ridge: float = 1e-8) -> np.ndarray:
    """Intercept-first coefficients from the ridge-regularised normal equations.

    The intercept is not penalised.
    """
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if train.n == 0:
        raise ValueError("empty training set")
    A = _design(train.X)
    G = A.T @ A
    pen = np.full(A.shape[1], ridge)
    pen[0] = 0.0
    G = G + np.diag(pen)
    if ridge == 0 and np.linalg.matrix_rank(G) < G.shape[0]:
        raise ValueError("singular normal equations; use a ridge penalty > 0")
    try:
        return np.linalg.solve(G, A.T @ train.y)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular normal equations; use a ridge penalty > 0") from exc


def fit_predict_ols(train: Dataset, X_test, ridge: float = 1e-8) -> np.ndarray:
    beta = fit_ols(train, ridge)
    X_test = np.atleast_2d(np.asarray(X_test, dtype=float))
    return _design(X_test) @ beta


def fit_predict_knn(train: Dataset, X_test, k: int = 5) -> np.ndarray:
    """Mean target of the ``k`` nearest training rows on standardised features.

    Features are standardised with the training mean and standard deviation
    (constant columns are left unscaled). Distance ties go to the lower row index.
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be positive")
    if k > train.n:
        raise ValueError(f"k={k} exceeds the {train.n} training rows")
    mu = train.X.mean(axis=0)
    sd = train.X.std(axis=0)
    sd[sd == 0] = 1.0
    Z = (train.X - mu) / sd
    Q = (np.atleast_2d(np.asarray(X_test, dtype=float)) - mu) / sd
    d2 = ((Q[:, None, :] - Z[None, :, :]) ** 2).sum(axis=2)
    nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return train.y[nn].mean(axis=1)


@dataclass(frozen=True)
class Learner:
    name: str
    fit_predict: Callable
    grid: tuple = ({},)


def default_learners(n_train: Optional[int] = None) -> list[Learner]:
    ks = (1, 3, 5, 10, 20)
    if n_train is not None:
        ks = tuple(k for k in ks if k <= n_train) or (1,)
    return [
        Learner("knn", fit_predict_knn, tuple({"k": k} for k in ks)),
        Learner("mean", fit_predict_mean, ({},)),
        Learner("ols", fit_predict_ols, tuple({"ridge": r} for r in (1e-8, 1e-2, 1.0, 10.0))),
    ]


def expand_grid(**axes) -> tuple:
    """Cartesian product of hyperparameter axes as a tuple of dicts."""
    keys = list(axes)
    return tuple(dict(zip(keys, vals)) for vals in itertools.product(*(axes[k] for k in keys)))


@dataclass
class Selection:
    learner: str
    params: dict
    oof: np.ndarray
    scores: list = field(default_factory=list)  # (params, sera) in grid order


def out_of_fold(learner: Learner, params: dict, data: Dataset, plan: CvPlan) -> np.ndarray:
    if plan.n != data.n:
        raise ValueError(f"plan covers {plan.n} rows, dataset has {data.n}")
    pred = np.full(data.n, np.nan)
    all_idx = np.arange(data.n)
    for fold in plan.folds:
        train_idx = np.setdiff1d(all_idx, fold, assume_unique=True)
        if train_idx.size < 1:
            raise ValueError("fold leaves no training rows")
        pred[fold] = learner.fit_predict(data.subset(train_idx), data.X[fold], **params)
    return pred


def select_by_sera(data: Dataset, learner: Learner, f: RelevanceFunction, plan: CvPlan,
                   n_random: Optional[int] = None, seed: int = 0,
                   step: float = DEFAULT_STEP) -> Selection:
    """Pick the grid point with the smallest out-of-fold SERA (first one on ties).

    ``n_random`` evaluates a seeded random subset of the grid instead of all of it.
    """
    grid: Sequence[dict] = learner.grid
    if not grid:
        raise ValueError(f"learner {learner.name!r} has an empty grid")
    if n_random is not None and n_random < len(grid):
        keep = np.sort(np.random.default_rng(seed).choice(len(grid), size=n_random, replace=False))
        grid = [grid[i] for i in keep]
    best = None
    scores = []
    for params in grid:
        oof = out_of_fold(learner, params, data, plan)
        area = sera(oof, data.y, f, step).area
        scores.append((dict(params), area))
        if best is None or area < best[1]:
            best = (params, area, oof)
    return Selection(learner.name, dict(best[0]), best[2], scores)
