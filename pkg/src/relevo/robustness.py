"""Neighbouring relevance scenarios and model-ranking stability across them.

Two scenario families are generated around a reference relevance function:

* convolution: every control point is translated by the same offset, so the
  shape is kept and only its position moves;
* elastic: the base anchor (last phi=0 knot) stays put while the peak anchor
  (first phi=1 knot) moves, stretching or compressing the slope.

Offsets are signed towards the tail: for a left-tailed function a positive
scenario index moves the anchors to smaller target values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .metrics import DEFAULT_STEP, PredictionSet, SeraCurve, sera_all
from .relevance import RelevanceAnchors, RelevanceFunction, anchors_of

METHODS = ("convolution", "elastic")


@dataclass(frozen=True)
class SweepConfig:
    """Scenario grid around the reference function.

    ``half_range`` is in target units (conventionally one standard deviation of
    the training target). Scenario indices run over ``-(steps-1)/2 .. (steps-1)/2``,
    or ``0 .. steps-1`` with ``one_sided``.
    """

    method: str = "convolution"
    steps: int = 19
    half_range: float = 1.0
    tail: Optional[str] = None
    one_sided: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if isinstance(self.steps, bool) or not isinstance(self.steps, (int, np.integer)):
            raise ValueError(f"steps must be an integer, got {self.steps!r}")
        if self.steps < 1 or self.steps % 2 == 0:
            raise ValueError(f"steps must be a positive odd integer, got {self.steps}")
        if not (math.isfinite(self.half_range) and self.half_range > 0):
            raise ValueError(f"half_range must be positive, got {self.half_range}")
        if self.tail not in (None, "right", "left"):
            raise ValueError(f"tail must be 'right', 'left' or None, got {self.tail!r}")

    @property
    def delta(self) -> float:
        if self.steps == 1:
            return self.half_range
        if self.one_sided:
            return self.half_range / (self.steps - 1)
        return 2.0 * self.half_range / (self.steps - 1)

    @property
    def indices(self) -> list[int]:
        if self.one_sided:
            return list(range(self.steps))
        h = (self.steps - 1) // 2
        return list(range(-h, h + 1))

    @classmethod
    def from_target(cls, y_train, method: str = "convolution", steps: int = 19,
                    tail: Optional[str] = None, span: str = "sigma", **kw) -> "SweepConfig":
        """Config whose range comes from the training target.

        ``span="sigma"`` uses one standard deviation on each side of the
        reference; ``span="range"`` covers the full target range.
        """
        y = np.asarray(y_train, dtype=float)
        if span == "sigma":
            half = float(np.std(y, ddof=1))
        elif span == "range":
            half = float(np.ptp(y))
        else:
            raise ValueError(f"span must be 'sigma' or 'range', got {span!r}")
        return cls(method=method, steps=steps, half_range=half, tail=tail, **kw)


@dataclass(frozen=True)
class ScenarioSpec:
    method: str
    index: int
    offset: float
    relevance: Optional[RelevanceFunction]
    anchors: Optional[RelevanceAnchors]
    skipped: Optional[str] = None


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    areas: dict = field(default_factory=dict)
    ranking: list = field(default_factory=list)


@dataclass
class SweepReport:
    method: str
    config: SweepConfig
    reference: RelevanceFunction
    anchors: RelevanceAnchors
    sera_step: float
    models: list
    scenarios: list  # ScenarioResult, ascending index
    reference_best: str
    rank_shift_probability: float
    reference_curves: dict = field(default_factory=dict)

    @property
    def skipped(self) -> list:
        return [s.spec for s in self.scenarios if s.spec.skipped]

    @property
    def sera_matrix(self) -> dict:
        return {s.spec.index: dict(s.areas) for s in self.scenarios if not s.spec.skipped}

    @property
    def rankings(self) -> dict:
        return {s.spec.index: list(s.ranking) for s in self.scenarios if not s.spec.skipped}


def _direction(anchors: RelevanceAnchors) -> float:
    return 1.0 if anchors.tail == "right" else -1.0


def convolution_scenarios(f: RelevanceFunction, cfg: SweepConfig) -> list[ScenarioSpec]:
    """Rigid translations of ``f``: scenario k satisfies phi_k(y) = phi(y - offset_k)."""
    anchors = anchors_of(f, cfg.tail)
    sign = _direction(anchors)
    out = []
    for k in cfg.indices:
        if k == 0:
            out.append(ScenarioSpec("convolution", 0, 0.0, f, anchors))
            continue
        off = sign * k * cfg.delta
        g = f.with_knots(f.knots + off)
        out.append(ScenarioSpec("convolution", k, off, g,
                                RelevanceAnchors(anchors.pi_max + off, anchors.pi_min + off, anchors.tail)))
    return out


def _stretch(f: RelevanceFunction, anchors: RelevanceAnchors, new_max: float) -> RelevanceFunction:
    """Move the peak knot to ``new_max`` keeping the base knot fixed.

    Knots between the anchors are rescaled affinely, knots beyond the peak move
    with it and knots on the far side of the base stay where they are.
    """
    ys = f.knots
    pmin, pmax = anchors.pi_min, anchors.pi_max
    off = new_max - pmax
    scale = (new_max - pmin) / (pmax - pmin)
    lo, hi = min(pmin, pmax), max(pmin, pmax)
    new = []
    for y in ys:
        if y == pmax:
            new.append(new_max)
        elif y == pmin:
            new.append(pmin)
        elif lo < y < hi:
            new.append(pmin + (y - pmin) * scale)
        elif (y > pmax) if anchors.tail == "right" else (y < pmax):
            new.append(y + off)
        else:
            new.append(y)
    return f.with_knots(new)


def elastic_scenarios(f: RelevanceFunction, cfg: SweepConfig) -> list[ScenarioSpec]:
    """Stretch/compress the slope between the base and peak anchors.

    Scenarios whose moved peak would reach the base are emitted with a
    ``skipped`` reason instead of a relevance function.
    """
    anchors = anchors_of(f, cfg.tail)
    sign = _direction(anchors)
    eps = 1e-6 * float(f.knots[-1] - f.knots[0])
    out = []
    for k in cfg.indices:
        if k == 0:
            out.append(ScenarioSpec("elastic", 0, 0.0, f, anchors))
            continue
        off = sign * k * cfg.delta
        new_max = anchors.pi_max + off
        if sign * (new_max - anchors.pi_min) <= eps:
            reason = (f"peak anchor {new_max:.6g} collides with base anchor "
                      f"{anchors.pi_min:.6g}")
            out.append(ScenarioSpec("elastic", k, off, None, None, skipped=reason))
            continue
        g = _stretch(f, anchors, new_max)
        out.append(ScenarioSpec("elastic", k, off, g,
                                RelevanceAnchors(new_max, anchors.pi_min, anchors.tail)))
    return out


def scenarios_for(f: RelevanceFunction, cfg: SweepConfig) -> list[ScenarioSpec]:
    if cfg.method == "convolution":
        return convolution_scenarios(f, cfg)
    return elastic_scenarios(f, cfg)


def rank_models(areas: Mapping[str, float]) -> list[str]:
    """Model ids by ascending area; ties go to the lexicographically smaller id."""
    if not areas:
        raise ValueError("cannot rank an empty set of models")
    for name, a in areas.items():
        if not math.isfinite(a):
            raise ValueError(f"model {name!r} has non-finite SERA {a}")
    return sorted(areas, key=lambda m: (areas[m], m))


def rank_shift_probability(best_by_index: Mapping[int, str]) -> float:
    """Share of non-reference scenarios whose best model differs from the reference best."""
    ref = best_by_index[0]
    others = [b for k, b in best_by_index.items() if k != 0]
    if not others:
        return 0.0
    return sum(b != ref for b in others) / len(others)


def run_sweep(preds: PredictionSet, f: RelevanceFunction, cfg: SweepConfig,
              sera_step: float = DEFAULT_STEP, threads: int = 1) -> SweepReport:
    """Evaluate every model under every scenario and summarise ranking stability."""
    specs = scenarios_for(f, cfg)
    anchors = anchors_of(f, cfg.tail)

    def evaluate(spec: ScenarioSpec) -> Optional[dict[str, SeraCurve]]:
        if spec.skipped:
            return None
        return sera_all(preds, spec.relevance, sera_step)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            curves = list(pool.map(evaluate, specs))
    else:
        curves = [evaluate(s) for s in specs]

    results = []
    ref_curves = {}
    for spec, cv in zip(specs, curves):
        if cv is None:
            results.append(ScenarioResult(spec))
            continue
        a = {m: c.area for m, c in cv.items()}
        results.append(ScenarioResult(spec, a, rank_models(a)))
        if spec.index == 0:
            ref_curves = cv

    if not ref_curves:
        ref_curves = sera_all(preds, f, sera_step)
    ref_best = rank_models({m: c.area for m, c in ref_curves.items()})[0]
    best = {0: ref_best}
    best.update({r.spec.index: r.ranking[0] for r in results if r.ranking and r.spec.index != 0})
    return SweepReport(
        method=cfg.method,
        config=cfg,
        reference=f,
        anchors=anchors,
        sera_step=sera_step,
        models=preds.models,
        scenarios=results,
        reference_best=ref_best,
        rank_shift_probability=rank_shift_probability(best),
        reference_curves=ref_curves,
    )


def run_sweeps(preds: PredictionSet, f: RelevanceFunction, methods: Sequence[str],
               base: SweepConfig, sera_step: float = DEFAULT_STEP, threads: int = 1) -> dict[str, SweepReport]:
    """One report per method, sharing every other setting of ``base``."""
    out = {}
    for m in methods:
        cfg = SweepConfig(method=m, steps=base.steps, half_range=base.half_range,
                          tail=base.tail, one_sided=base.one_sided)
        out[m] = run_sweep(preds, f, cfg, sera_step, threads)
    return out
