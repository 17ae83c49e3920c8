"""Evaluation of regression models under non-uniform relevance of target values.

Relevance functions, the SERA metric, and convolution/elastic sweeps that test
how stable a model ranking is when the relevance function is uncertain.
"""

from .metrics import PredictionSet, SeraCurve, ser, sera, sera_all, sera_exact
from .relevance import (
    ControlPoint,
    RelevanceAnchors,
    RelevanceFunction,
    anchors_of,
    auto_control_points,
    auto_relevance,
    build_relevance,
    eval_relevance,
    uniform_relevance,
)
from .robustness import (
    SweepConfig,
    SweepReport,
    convolution_scenarios,
    elastic_scenarios,
    rank_models,
    run_sweep,
    run_sweeps,
)
from .stats import Fences, Sample, adjusted_fences, medcouple, quantile

__version__ = "0.1.0"
