"""File formats: datasets, prediction tables, run configs and sweep reports.

CSV dialect: comma delimiter, ``.`` decimal point, LF line endings, header row.
Floats are written with the shortest repr that round-trips, which keeps
reports byte-identical across runs with the same inputs.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np

from .metrics import PredictionSet, SeraCurve
from .models import Dataset
from .relevance import RelevanceFunction
from .robustness import METHODS, SweepReport

REPORT_FORMAT = "relevo.sweep/1"


def fmt(x) -> str:
    """Shortest round-trip decimal text for a float."""
    return repr(float(x))


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty CSV file")
    return [h.strip() for h in rows[0]], rows[1:]


def _parse_cell(text: str, row: int, col: str, path) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ValueError(f"{path}: non-numeric value {text!r} at row {row}, column {col!r}") from None
    if not math.isfinite(v):
        raise ValueError(f"{path}: non-finite value {text!r} at row {row}, column {col!r}")
    return v


def _numeric_table(path, header, rows) -> np.ndarray:
    out = np.empty((len(rows), len(header)))
    for i, r in enumerate(rows):
        # row numbers are 1-based data rows (header excluded)
        if len(r) != len(header):
            raise ValueError(f"{path}: row {i + 1} has {len(r)} fields, header has {len(header)}")
        for j, cell in enumerate(r):
            out[i, j] = _parse_cell(cell.strip(), i + 1, header[j], path)
    return out


def read_dataset_csv(path, target: str) -> Dataset:
    """Numeric CSV with a header row; ``target`` names the response column."""
    header, rows = _read_rows(path)
    if target not in header:
        raise ValueError(f"{path}: target column {target!r} not found in header {header}")
    if len(set(header)) != len(header):
        raise ValueError(f"{path}: duplicate column names in header")
    table = _numeric_table(path, header, rows)
    j = header.index(target)
    feats = [h for h in header if h != target]
    X = np.delete(table, j, axis=1)
    return Dataset(X, table[:, j], tuple(feats), target)


def write_dataset_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(data.feature_names) + [data.target_name])
        for row, y in zip(data.X, data.y):
            w.writerow([fmt(v) for v in row] + [fmt(y)])


def read_predictions_csv(path) -> PredictionSet:
    """``y_true,<model1>,<model2>,...`` table into a :class:`PredictionSet`."""
    header, rows = _read_rows(path)
    if not header or header[0] != "y_true":
        raise ValueError(f"{path}: first column must be 'y_true', got {header[:1]}")
    models = header[1:]
    if not models:
        raise ValueError(f"{path}: no model columns")
    dup = sorted({m for m in models if models.count(m) > 1})
    if dup or "y_true" in models:
        raise ValueError(f"{path}: duplicate model name(s) {dup or ['y_true']}")
    if any(not m for m in models):
        raise ValueError(f"{path}: empty model name in header")
    table = _numeric_table(path, header, rows)
    if table.shape[0] == 0:
        raise ValueError(f"{path}: no data rows")
    return PredictionSet(table[:, 0], {m: table[:, j + 1] for j, m in enumerate(models)})


def write_predictions_csv(preds: PredictionSet, path) -> None:
    models = preds.models
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y_true"] + models)
        for i in range(len(preds)):
            w.writerow([fmt(preds.y_true[i])] + [fmt(preds.predictions[m][i]) for m in models])


def write_curves_csv(curves: Mapping[str, SeraCurve], path) -> None:
    """Long-format ``model,t,ser`` table."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "t", "ser"])
        for m in sorted(curves):
            c = curves[m]
            for t, v in zip(c.t_grid, c.ser_values):
                w.writerow([m, fmt(t), fmt(v)])


def write_relevance_curve_csv(f: RelevanceFunction, lo: float, hi: float, path, n: int = 500) -> None:
    ys = np.linspace(lo, hi, n)
    phi = f(ys)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y", "phi"])
        for y, p in zip(ys, phi):
            w.writerow([fmt(y), fmt(p)])


@dataclass(frozen=True)
class RunConfig:
    """Settings for ``sweep`` and ``demo`` runs; loadable from a JSON object with these keys."""

    relevance: str = "auto"  # auto | file | points
    relevance_path: Optional[str] = None
    points: Optional[Union[str, list]] = None
    centre: Optional[float] = None
    method: str = "both"  # convolution | elastic | both
    steps: int = 19
    half_range: Optional[float] = None  # None: derived from the training target
    span: str = "sigma"  # sigma | range
    tail: Optional[str] = None
    one_sided: bool = False
    sera_step: float = 0.001
    seed: int = 0
    data: Optional[str] = None
    target: Optional[str] = None
    predictions: Optional[str] = None
    output_dir: str = "relevo-out"
    threads: int = 1

    def __post_init__(self):
        if self.relevance not in ("auto", "file", "points"):
            raise ValueError(f"config: relevance must be auto, file or points, got {self.relevance!r}")
        if self.relevance == "file" and not self.relevance_path:
            raise ValueError("config: relevance 'file' requires relevance_path")
        if self.relevance == "points" and not self.points:
            raise ValueError("config: relevance 'points' requires points")
        if self.method not in METHODS + ("both",):
            raise ValueError(f"config: method must be convolution, elastic or both, got {self.method!r}")
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 1 or self.steps % 2 == 0:
            raise ValueError(f"config: steps must be a positive odd integer, got {self.steps!r}")
        if self.half_range is not None and not (math.isfinite(self.half_range) and self.half_range > 0):
            raise ValueError(f"config: half_range (sweep step size) must be positive, got {self.half_range!r}")
        if self.span not in ("sigma", "range"):
            raise ValueError(f"config: span must be sigma or range, got {self.span!r}")
        if self.tail not in (None, "right", "left"):
            raise ValueError(f"config: tail must be right, left or null, got {self.tail!r}")
        if not (isinstance(self.sera_step, (int, float)) and 0.0 < self.sera_step <= 0.5):
            raise ValueError(f"config: sera_step must lie in (0, 0.5], got {self.sera_step!r}")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ValueError(f"config: threads must be a positive integer, got {self.threads!r}")

    @property
    def methods(self) -> tuple:
        return METHODS if self.method == "both" else (self.method,)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RunConfig":
        if not isinstance(doc, Mapping):
            raise ValueError("config: top level must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValueError(f"config: unknown key(s) {unknown}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _points_doc(f: Optional[RelevanceFunction]):
    return None if f is None else f.to_dict()["points"]


def report_dict(reports: Mapping[str, SweepReport]) -> dict:
    first = next(iter(reports.values()))
    doc = {
        "format": REPORT_FORMAT,
        "models": list(first.models),
        "sera_step": first.sera_step,
        "reference": {"points": _points_doc(first.reference)},
        "reference_sera": {m: c.area for m, c in first.reference_curves.items()},
        "methods": {},
    }
    for name, rep in reports.items():
        cfg = rep.config
        evaluated = [s for s in rep.scenarios if not s.spec.skipped]
        doc["methods"][name] = {
            "config": {
                "steps": cfg.steps,
                "half_range": cfg.half_range,
                "delta": cfg.delta,
                "tail": rep.anchors.tail,
                "one_sided": cfg.one_sided,
            },
            "anchors": dataclasses.asdict(rep.anchors),
            "reference_best": rep.reference_best,
            "rank_shift_probability": rep.rank_shift_probability,
            "neighbours_evaluated": sum(1 for s in evaluated if s.spec.index != 0),
            "scenarios": [
                {
                    "index": s.spec.index,
                    "offset": s.spec.offset,
                    "anchors": dataclasses.asdict(s.spec.anchors),
                    "points": _points_doc(s.spec.relevance),
                    "sera": dict(s.areas),
                    "ranking": list(s.ranking),
                }
                for s in evaluated
            ],
            "skipped": [
                {"index": s.spec.index, "offset": s.spec.offset, "reason": s.spec.skipped}
                for s in rep.scenarios if s.spec.skipped
            ],
        }
    return doc


def write_report(reports: Union[SweepReport, Mapping[str, SweepReport]], out_dir) -> list[Path]:
    """Write ``report.json``, ``sweep.csv`` and ``sera_curves.csv`` into ``out_dir``."""
    if isinstance(reports, SweepReport):
        reports = {reports.method: reports}
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    paths = [out / "report.json", out / "sweep.csv", out / "sera_curves.csv"]

    paths[0].write_text(json.dumps(report_dict(reports), indent=2) + "\n", encoding="utf-8")
    with open(paths[1], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "scenario_index", "offset", "model", "sera", "rank"])
        for name, rep in reports.items():
            for s in rep.scenarios:
                if s.spec.skipped:
                    continue
                for r, m in enumerate(s.ranking, start=1):
                    w.writerow([name, s.spec.index, fmt(s.spec.offset), m, fmt(s.areas[m]), r])
    write_curves_csv(next(iter(reports.values())).reference_curves, paths[2])
    return paths


def read_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
