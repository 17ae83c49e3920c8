"""Acceptance gate: one test per criterion, each with its tolerance and time budget."""

import time

import numpy as np
import pytest

from relevo import PredictionSet, build_relevance, uniform_relevance
from relevo.cli import main
from relevo.io import write_predictions_csv
from relevo.metrics import exact_area, sera, sera_all, sera_exact, sse
from relevo.relevance import anchors_of
from relevo.robustness import (
    SweepConfig,
    convolution_scenarios,
    elastic_scenarios,
    run_sweep,
    run_sweeps,
)
from relevo.stats import medcouple
from conftest import dominance_data, flip_data
from oracles import medcouple_bruteforce

FLIP_CONV_PROB = 9 / 18
FLIP_ELASTIC_PROB = 8 / 16


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f}s, budget {self.seconds}s"


def test_criterion_01_sera_degeneration():
    rng = np.random.default_rng(101)
    f = uniform_relevance()
    with Budget(1.0):
        for _ in range(100):
            y = rng.normal(0, 5, 200)
            p = y + rng.normal(0, 2, 200)
            assert sera(p, y, f).area == pytest.approx(sse(p, y), rel=1e-9)


def _all_curves():
    rng = np.random.default_rng(202)
    out = []
    for ps, f in (flip_data(), (dominance_data(), build_relevance([(5, 0, 0), (15, 1, 0)]))):
        out += list(sera_all(ps, f).values())
        for rep in run_sweeps(ps, f, ("convolution", "elastic"), SweepConfig.from_target(ps.y_true)).values():
            out += list(rep.reference_curves.values())
    for _ in range(50):
        y = rng.lognormal(2, 0.8, 100)
        f = build_relevance([(np.median(y), 0, None), (np.quantile(y, 0.8), 0.7, None), (y.max(), 1, 0)])
        out.append(sera(y + rng.normal(0, 3, 100), y, f, step=float(rng.choice([0.001, 0.01, 0.03]))))
    return out


def test_criterion_02_ser_monotonicity():
    with Budget(1.0):
        curves = _all_curves()
        assert len(curves) > 50
        for c in curves:
            assert np.all(np.diff(c.ser_values) <= 0)


def test_criterion_03_exact_piecewise_fixture():
    y = np.array([0.0, 1.0, 2.0])
    pred = y + np.array([0.5, 1.0, 2.0])  # squared errors 0.25, 1, 4
    f = build_relevance([(0, 0, 0), (2, 1, 0)])
    with Budget(1.0):
        assert list(f(y)) == [0.0, 0.5, 1.0]
        trap = sera(pred, y, f, 1e-3).area
        assert abs(trap - 4.5) / 4.5 <= 0.006
        assert abs(sera_exact(pred, y, f) - 4.5) <= 1e-12
        assert abs(exact_area(np.array([0.0, 0.5, 1.0]), np.array([0.25, 1.0, 4.0])) - 4.5) <= 1e-12


def test_criterion_04_medcouple_oracle():
    rng = np.random.default_rng(404)
    with Budget(5.0):
        for i in range(500):
            n = int(rng.integers(3, 51))
            # every third sample is integer-valued so median ties occur
            x = rng.integers(0, 8, n).astype(float) if i % 3 == 0 else rng.lognormal(0, 1, n)
            if x.min() == x.max():
                x[0] += 1.0
            mc = medcouple(x)
            assert mc == medcouple_bruteforce(x)
            assert medcouple(-x) == -mc


def test_criterion_05_pchip_properties(who):
    rng = np.random.default_rng(505)
    with Budget(2.0):
        assert abs(who(100.0) - 0.5) <= 1e-12
        for _ in range(20):
            ys = np.sort(rng.choice(np.arange(-100.0, 100.0), size=int(rng.integers(2, 7)), replace=False))
            phis = rng.uniform(0, 1, ys.size)
            phis[rng.integers(ys.size)] = 1.0
            f = build_relevance([(y, p, None if rng.random() < 0.5 else float(rng.normal())) for y, p in zip(ys, phis)])
            assert np.all(f(ys) == f.knot_values)
            v = f(rng.uniform(-150, 150, 100_000))
            assert np.all((v >= 0) & (v <= 1))
            for a, b, pa, pb in zip(ys, ys[1:], phis, phis[1:]):
                seg = f(np.linspace(a, b, 2001))
                d = np.diff(seg)
                if pb >= pa:
                    assert np.all(d >= -1e-12)
                else:
                    assert np.all(d <= 1e-12)


def test_criterion_06_convolution_shift_law(flip, who):
    grid = np.linspace(-200, 400, 20001)
    with Budget(2.0):
        cfg = SweepConfig(half_range=37.5)
        scenarios = convolution_scenarios(who, cfg)
        assert len(scenarios) == 19
        for s in scenarios:
            assert np.max(np.abs(s.relevance(grid) - who(grid - s.index * cfg.delta))) <= 1e-12
        preds, f = flip
        rep = run_sweep(preds, f, SweepConfig.from_target(preds.y_true))
        assert rep.sera_matrix[0] == {m: c.area for m, c in sera_all(preds, f).items()}


def test_criterion_07_elastic_anchor_law(who):
    fns = [who, build_relevance([(0, 0, 0), (20, 0, 0), (45, 0.3, None), (60, 1, 0), (90, 1, 0)]),
           build_relevance([(-40, 1, 0), (-10, 0, 0)])]
    with Budget(2.0):
        n_skipped = 0
        for f in fns:
            a = anchors_of(f)
            span = float(f.knots[-1] - f.knots[0])
            for half in (0.1 * span, span, 3 * span):
                cfg = SweepConfig(method="elastic", half_range=half)
                scenarios = elastic_scenarios(f, cfg)
                assert len(scenarios) == cfg.steps
                sign = 1 if a.tail == "right" else -1
                for s in scenarios:
                    if s.skipped:
                        n_skipped += 1
                        assert s.relevance is None
                        continue
                    assert s.relevance(a.pi_min) == 0.0
                    assert s.relevance(a.pi_max + sign * s.index * cfg.delta) == 1.0
        assert n_skipped > 0


def test_criterion_08_rank_shift_behaviour():
    with Budget(5.0):
        dom = dominance_data()
        f = build_relevance([(np.median(dom.y_true), 0, 0), (np.quantile(dom.y_true, 0.9), 1, 0)])
        for method in ("convolution", "elastic"):
            assert run_sweep(dom, f, SweepConfig.from_target(dom.y_true, method=method)).rank_shift_probability == 0.0

        preds, g = flip_data()
        pinned = {"convolution": FLIP_CONV_PROB, "elastic": FLIP_ELASTIC_PROB}
        for method, prob in pinned.items():
            rep = run_sweep(preds, g, SweepConfig.from_target(preds.y_true, method=method))
            assert rep.rank_shift_probability == prob > 0

        rng = np.random.default_rng(808)
        for i in range(20):
            y = rng.lognormal(2, 0.5, 40)
            ps = PredictionSet(y, {m: y + rng.normal(0, 1 + j, 40) for j, m in enumerate("ABC")})
            h = build_relevance([(np.median(y), 0, 0), (np.quantile(y, 0.85), 1, 0)])
            steps = int(rng.choice([3, 9, 19]))
            for method in ("convolution", "elastic"):
                rep = run_sweep(ps, h, SweepConfig.from_target(y, method=method, steps=steps))
                denom = steps - 1 - len(rep.skipped)
                assert 0.0 <= rep.rank_shift_probability <= 1.0
                shifted = sum(1 for s in rep.scenarios
                              if s.spec.index != 0 and not s.spec.skipped and s.ranking[0] != rep.reference_best)
                assert rep.rank_shift_probability == (shifted / denom if denom else 0.0)
                if not rep.skipped:
                    assert denom == steps - 1


def _dir_bytes(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_criterion_09_end_to_end_demo(tmp_path):
    with Budget(60.0):
        for d in ("a", "b"):
            assert main(["demo", "--threads", "1", "--out", str(tmp_path / d)]) == 0
    a, b = _dir_bytes(tmp_path / "a"), _dir_bytes(tmp_path / "b")
    assert len(a) == 6 and a == b


def _fixtures(tmp_path):
    out = []
    ps, f = flip_data()
    out.append((ps, f, "right"))
    out.append((PredictionSet(-ps.y_true, {m: -p for m, p in ps.predictions.items()}),
                build_relevance([(-p.y, p.phi, -p.dphi) for p in f.points]), "left"))
    dom = dominance_data()
    out.append((dom, build_relevance([(np.median(dom.y_true), 0, 0), (np.quantile(dom.y_true, 0.9), 1, 0)]), "right"))
    rng = np.random.default_rng(1010)
    y = rng.lognormal(3, 0.6, 300)
    many = PredictionSet(y, {f"m{j}": y + rng.normal(0, 2 + j % 3, 300) for j in range(6)})
    out.append((many, build_relevance([(-5, 1, 0), (np.median(y), 0, 0), (np.quantile(y, 0.9), 1, 0)]), "right"))
    return out


def test_criterion_10_thread_determinism(tmp_path):
    for i, (ps, f, tail) in enumerate(_fixtures(tmp_path)):
        p = tmp_path / f"p{i}.csv"
        r = tmp_path / f"r{i}.json"
        write_predictions_csv(ps, p)
        f.save(r)
        for threads in ("1", "8"):
            assert main(["sweep", "--predictions", str(p), "--relevance", str(r), "--tail", tail,
                         "--threads", threads, "--out", str(tmp_path / f"o{i}_{threads}")]) == 0
        one, eight = _dir_bytes(tmp_path / f"o{i}_1"), _dir_bytes(tmp_path / f"o{i}_8")
        assert len(one) == 3 and one == eight
