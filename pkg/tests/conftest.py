import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relevo import PredictionSet, build_relevance  # noqa: E402


@pytest.fixture
def who():
    """Policy relevance for PM10: phi(50) = 0, phi(150) = 1."""
    return build_relevance([(50.0, 0.0, 0.0), (150.0, 1.0, 0.0)])


def flip_data():
    # A is exact below y=15 and off by 1 above; B is off by 2 below and exact above.
    y = np.arange(1.0, 21.0)
    a = y + (y >= 15)
    b = y + 2.0 * (y < 15)
    return PredictionSet(y, {"A": a, "B": b}), build_relevance([(10.0, 0.0, 0.0), (15.0, 1.0, 0.0)])


def dominance_data(seed=3, n=60):
    rng = np.random.default_rng(seed)
    y = rng.lognormal(2.0, 0.6, size=n)
    err = rng.normal(size=n)
    # every squared error of "good" is strictly smaller than that of "bad"
    good = y + 0.5 * err
    bad = y + 1.5 * err + np.where(err >= 0, 0.1, -0.1)
    return PredictionSet(y, {"bad": bad, "good": good})


@pytest.fixture
def flip():
    return flip_data()


@pytest.fixture
def dominance():
    return dominance_data()


# one PASS/FAIL line per acceptance criterion in the terminal summary
_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.failed or report.skipped:
        prev = _CRITERIA.get(name)
        if prev != "FAIL":
            _CRITERIA[name] = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        num, label = name[len("test_criterion_"):].split("_", 1)
        terminalreporter.write_line(f"criterion {int(num):2d} {label.replace('_', ' ')}: {_CRITERIA[name]}")
