"""Relevance functions: maps from target values to a [0, 1] preference scale.

A relevance function is a monotone piecewise cubic Hermite interpolant over a set
of control points ``(y, phi, dphi)``. Outside the outermost control points it is
constant, and every evaluation is clamped to [0, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .stats import adjusted_fences, as_sample


@dataclass(frozen=True)
class ControlPoint:
    """Anchor of a relevance function.

    ``dphi`` is the derivative at the anchor; ``None`` leaves it to the
    Fritsch-Carlson estimate. The default is a flat anchor (0).
    """

    y: float
    phi: float
    dphi: Optional[float] = 0.0

    def __post_init__(self):
        if not math.isfinite(self.y):
            raise ValueError(f"control point y must be finite, got {self.y}")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"control point phi must lie in [0, 1], got {self.phi}")
        if self.dphi is not None and not math.isfinite(self.dphi):
            raise ValueError(f"control point dphi must be finite, got {self.dphi}")


@dataclass(frozen=True)
class RelevanceAnchors:
    pi_max: float
    pi_min: float
    tail: str  # "right" or "left"


def _as_point(p) -> ControlPoint:
    if isinstance(p, ControlPoint):
        return p
    if isinstance(p, dict):
        return ControlPoint(float(p["y"]), float(p["phi"]),
                            None if p.get("dphi", 0.0) is None else float(p.get("dphi", 0.0)))
    return ControlPoint(*(float(v) if v is not None else None for v in p))


def _pchip_estimate(h: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Derivative estimates of the Fritsch-Butland / scipy PCHIP scheme."""
    n = delta.size + 1
    d = np.zeros(n)
    if n == 2:
        d[:] = delta[0]
        return d
    for k in range(1, n - 1):
        a, b = delta[k - 1], delta[k]
        if np.sign(a) == np.sign(b) != 0:
            w1 = 2 * h[k] + h[k - 1]
            w2 = h[k] + 2 * h[k - 1]
            with np.errstate(over="ignore"):
                # tiny secants overflow the reciprocals; the limit is d = 0
                d[k] = (w1 + w2) / (w1 / a + w2 / b)

    def edge(h0, h1, m0, m1):
        v = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1)
        if np.sign(v) != np.sign(m0):
            return 0.0
        if np.sign(m0) != np.sign(m1) and abs(v) > abs(3 * m0):
            return 3 * m0
        return v

    with np.errstate(over="ignore", invalid="ignore"):
        d[0] = edge(h[0], h[1], delta[0], delta[1])
        d[-1] = edge(h[-1], h[-2], delta[-1], delta[-2])
    return d


def _limit(d: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Fritsch-Carlson limiting so every interval is monotone between its endpoints."""
    d = d.copy()
    n = d.size
    for k in range(n):
        left = delta[k - 1] if k > 0 else None
        right = delta[k] if k < n - 1 else None
        for s in (left, right):
            if s is not None and (s == 0 or np.sign(d[k]) * np.sign(s) < 0):
                d[k] = 0.0
        if left is not None and right is not None and np.sign(left) * np.sign(right) < 0:
            d[k] = 0.0
    for k in range(n - 1):
        if delta[k] == 0:
            continue
        with np.errstate(over="ignore"):
            a, b = d[k] / delta[k], d[k + 1] / delta[k]
        r = math.hypot(a, b)  # no overflow for huge derivative-to-slope ratios
        if r > 3.0:
            tau = 3.0 / r
            d[k] *= tau
            d[k + 1] *= tau
    return d


class RelevanceFunction:
    """Monotone cubic Hermite interpolant over sorted control points.

    Instances are immutable; use :func:`build_relevance` or
    :meth:`from_json` to construct one.
    """

    def __init__(self, points: Iterable):
        pts = sorted((_as_point(p) for p in points), key=lambda p: p.y)
        if len(pts) < 2:
            raise ValueError("relevance function needs at least 2 control points")
        ys = np.array([p.y for p in pts])
        if np.any(np.diff(ys) == 0):
            dup = ys[:-1][np.diff(ys) == 0][0]
            raise ValueError(f"duplicate control point at y={dup!r}")
        phis = np.array([p.phi for p in pts])
        h = np.diff(ys)
        with np.errstate(over="ignore"):
            delta = np.diff(phis) / h
        if not np.all(np.isfinite(delta)):
            raise ValueError("control points too close together: slope overflows")
        est = _pchip_estimate(h, delta)
        d = np.array([est[i] if p.dphi is None else p.dphi for i, p in enumerate(pts)])
        if not np.all(np.isfinite(d)):
            raise ValueError("control points too close together: slope overflows")
        d = _limit(d, delta)

        self._points = tuple(pts)
        self._y = ys
        self._phi = phis
        self._d = d
        self._h = h
        for arr in (self._y, self._phi, self._d, self._h):
            arr.setflags(write=False)

    @property
    def points(self) -> tuple:
        return self._points

    @property
    def knots(self) -> np.ndarray:
        return self._y

    @property
    def knot_values(self) -> np.ndarray:
        return self._phi

    @property
    def derivatives(self) -> np.ndarray:
        """Knot derivatives after monotonicity limiting."""
        return self._d

    def __call__(self, y):
        return eval_relevance(self, y)

    def __eq__(self, other):
        return isinstance(other, RelevanceFunction) and self._points == other._points

    def __hash__(self):
        return hash(self._points)

    def __repr__(self):
        inner = ", ".join(f"({p.y:g}, {p.phi:g})" for p in self._points)
        return f"RelevanceFunction[{inner}]"

    def with_knots(self, ys) -> "RelevanceFunction":
        """Same relevance values and derivatives at new knot positions."""
        return RelevanceFunction(
            ControlPoint(float(y), p.phi, p.dphi) for y, p in zip(ys, self._points)
        )

    def to_dict(self) -> dict:
        return {"points": [{"y": p.y, "phi": p.phi, "dphi": p.dphi} for p in self._points]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "RelevanceFunction":
        if not isinstance(doc, dict) or "points" not in doc:
            raise ValueError('relevance document must be an object with a "points" list')
        return cls(doc["points"])

    @classmethod
    def from_json(cls, text: str) -> "RelevanceFunction":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RelevanceFunction":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def build_relevance(points) -> RelevanceFunction:
    return RelevanceFunction(points)


def uniform_relevance() -> RelevanceFunction:
    """phi(y) = 1 for every y."""
    return RelevanceFunction([ControlPoint(0.0, 1.0), ControlPoint(1.0, 1.0)])


def parse_points(spec: str) -> list[ControlPoint]:
    """Parse ``"50:0,150:1"`` (optionally ``y:phi:dphi``) into control points."""
    out = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad control point {item!r}; expected y:phi or y:phi:dphi")
        out.append(ControlPoint(*(float(v) for v in parts)))
    if not out:
        raise ValueError("no control points given")
    return out


def eval_relevance(f: RelevanceFunction, y):
    """Evaluate ``f`` at scalar or array ``y``; result clamped to [0, 1]."""
    arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("relevance evaluated at a non-finite target value")
    ys, phi, d, h = f._y, f._phi, f._d, f._h
    k = np.clip(np.searchsorted(ys, arr, side="right") - 1, 0, ys.size - 2)
    t = (arr - ys[k]) / h[k]
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    out = h00 * phi[k] + h10 * h[k] * d[k] + h01 * phi[k + 1] + h11 * h[k] * d[k + 1]
    out = np.where(arr <= ys[0], phi[0], out)
    out = np.where(arr >= ys[-1], phi[-1], out)
    out = np.clip(out, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def anchors_of(f: RelevanceFunction, tail: Optional[str] = None) -> RelevanceAnchors:
    """Peak (first phi=1 knot) and base (last phi=0 knot before the slope) of ``f``.

    For the right tail the peak is the smallest phi=1 knot that has a phi=0 knot
    below it; the left tail mirrors this. ``tail=None`` infers the side and
    fails for two-tailed functions, where it must be given.
    """
    ys, phi = f.knots, f.knot_values
    ones = ys[phi == 1.0]
    zeros = ys[phi == 0.0]
    if ones.size == 0 or zeros.size == 0:
        raise ValueError("anchors undefined: relevance function must reach both 0 and 1 at control points")

    found = {}
    right_peaks = [v for v in ones if np.any(zeros < v)]
    if right_peaks:
        pmax = min(right_peaks)
        found["right"] = RelevanceAnchors(float(pmax), float(zeros[zeros < pmax].max()), "right")
    left_peaks = [v for v in ones if np.any(zeros > v)]
    if left_peaks:
        pmax = max(left_peaks)
        found["left"] = RelevanceAnchors(float(pmax), float(zeros[zeros > pmax].min()), "left")

    if tail is None:
        if len(found) == 2:
            raise ValueError("anchors ambiguous: two-tailed relevance function, specify tail='right' or 'left'")
        return next(iter(found.values()))
    if tail not in ("right", "left"):
        raise ValueError(f"tail must be 'right' or 'left', got {tail!r}")
    if tail not in found:
        raise ValueError(f"anchors undefined for the {tail} tail")
    return found[tail]


def auto_control_points(sample, centre: Optional[float] = None) -> list[ControlPoint]:
    """Control points derived from the adjusted boxplot of ``sample``.

    The centre (default: the median) gets relevance 0; each adjusted fence with
    at least one sample value beyond it gets relevance 1. All derivatives are 0.
    """
    s = as_sample(sample)
    fences = adjusted_fences(s)
    x = s.values
    c = s.median() if centre is None else float(centre)
    pts = [ControlPoint(c, 0.0, 0.0)]
    if np.any(x < fences.lower):
        pts.insert(0, ControlPoint(fences.lower, 1.0, 0.0))
    if np.any(x > fences.upper):
        pts.append(ControlPoint(fences.upper, 1.0, 0.0))
    if len(pts) == 1:
        raise ValueError("no rare region detected")
    ys = [p.y for p in pts]
    if any(b <= a for a, b in zip(ys, ys[1:])):
        raise ValueError("degenerate sample: adjusted fence coincides with the centre")
    return pts


def auto_relevance(sample, centre: Optional[float] = None) -> RelevanceFunction:
    return RelevanceFunction(auto_control_points(sample, centre))
