"""Squared error-relevance (SER_t) and its area over t in [0, 1] (SERA)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .relevance import RelevanceFunction, eval_relevance

DEFAULT_STEP = 0.001


@dataclass(frozen=True)
class PredictionSet:
    """True targets and aligned per-model predictions."""

    y_true: np.ndarray
    predictions: Mapping[str, np.ndarray]

    def __post_init__(self):
        y = np.asarray(self.y_true, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise ValueError("y_true must be a non-empty 1-D vector")
        if not np.all(np.isfinite(y)):
            raise ValueError("y_true contains non-finite values")
        if not self.predictions:
            raise ValueError("prediction set needs at least one model")
        preds = {}
        for name, p in self.predictions.items():
            p = np.asarray(p, dtype=float)
            if p.shape != y.shape:
                raise ValueError(f"model {name!r}: {p.size} predictions for {y.size} targets")
            if not np.all(np.isfinite(p)):
                raise ValueError(f"model {name!r}: non-finite prediction")
            preds[str(name)] = p
        object.__setattr__(self, "y_true", y)
        object.__setattr__(self, "predictions", dict(sorted(preds.items())))

    @property
    def models(self) -> list[str]:
        return list(self.predictions)

    def __len__(self) -> int:
        return self.y_true.size


@dataclass(frozen=True)
class SeraCurve:
    t_grid: np.ndarray
    ser_values: np.ndarray
    area: float


def _check_pair(preds, y_true):
    p = np.asarray(preds, dtype=float)
    y = np.asarray(y_true, dtype=float)
    if p.shape != y.shape or p.ndim != 1:
        raise ValueError(f"length mismatch: {p.size} predictions for {y.size} targets")
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite prediction")
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite target")
    return p, y


def t_grid(step: float = DEFAULT_STEP) -> np.ndarray:
    """Uniform thresholds ``0, step, 2*step, ..., 1`` (1 appended if step does not divide it)."""
    if not 0.0 < step <= 0.5:
        raise ValueError(f"SERA step must lie in (0, 0.5], got {step}")
    n = int(math.floor(1.0 / step + 1e-9))
    grid = np.arange(n + 1) * step
    if grid[-1] < 1.0 - 1e-12:
        grid = np.append(grid, 1.0)
    else:
        grid[-1] = 1.0
    return grid


def ser_from_relevance(phi: np.ndarray, sq_err: np.ndarray, thresholds) -> np.ndarray:
    """SER at each threshold: sum of ``sq_err`` over points with ``phi >= t``."""
    order = np.argsort(phi, kind="stable")
    phi_sorted = phi[order]
    tail_sums = np.concatenate([np.cumsum(sq_err[order][::-1])[::-1], [0.0]])
    idx = np.searchsorted(phi_sorted, np.asarray(thresholds, dtype=float), side="left")
    return tail_sums[idx]


def trapezoid_area(t: np.ndarray, v: np.ndarray) -> float:
    return float(np.sum((v[1:] + v[:-1]) * np.diff(t)) / 2)


def ser(t: float, preds, y_true, f: RelevanceFunction) -> float:
    """Sum of squared errors over points whose true target has relevance >= t."""
    p, y = _check_pair(preds, y_true)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold t must lie in [0, 1], got {t}")
    mask = eval_relevance(f, y) >= t
    return float(np.sum((p[mask] - y[mask]) ** 2))


def sera(preds, y_true, f: RelevanceFunction, step: float = DEFAULT_STEP) -> SeraCurve:
    """SER_t curve on a uniform t-grid and its trapezoidal area."""
    p, y = _check_pair(preds, y_true)
    grid = t_grid(step)
    phi = np.atleast_1d(eval_relevance(f, y))
    values = ser_from_relevance(phi, (p - y) ** 2, grid)
    return SeraCurve(grid, values, trapezoid_area(grid, values))


def sera_exact(preds, y_true, f: RelevanceFunction) -> float:
    """Exact integral of the SER_t step function over the distinct relevance levels."""
    p, y = _check_pair(preds, y_true)
    phi = np.atleast_1d(eval_relevance(f, y))
    return exact_area(phi, (p - y) ** 2)


def exact_area(phi: np.ndarray, sq_err: np.ndarray) -> float:
    # SER_t is constant on each (b_{j-1}, b_j] between consecutive relevance levels
    levels = np.unique(phi[phi > 0.0])
    if levels.size == 0:
        return 0.0
    widths = np.diff(np.concatenate([[0.0], levels]))
    return float(np.sum(widths * ser_from_relevance(phi, sq_err, levels)))


def sera_all(preds: PredictionSet, f: RelevanceFunction, step: float = DEFAULT_STEP) -> dict[str, SeraCurve]:
    """SERA curve for every model, keyed in sorted model-id order."""
    out = {}
    for name in sorted(preds.predictions):
        try:
            out[name] = sera(preds.predictions[name], preds.y_true, f, step)
        except ValueError as exc:
            raise ValueError(f"model {name!r}: {exc}") from exc
    return out


def sse(preds, y_true) -> float:
    p, y = _check_pair(preds, y_true)
    return float(np.sum((p - y) ** 2))


def areas(curves: Mapping[str, SeraCurve]) -> dict[str, float]:
    return {k: c.area for k, c in curves.items()}


def from_columns(y_true: Sequence[float], **models) -> PredictionSet:
    return PredictionSet(np.asarray(y_true, dtype=float), models)
