"""Metric-weighted soft-voting ensembles and the evaluation machinery around them."""

__version__ = "0.1.0"

from wensemble.errors import (  # noqa: E402
    AlignmentError,
    ArityError,
    CoverageError,
    DegenerateWeightsError,
    ParseError,
    StratificationError,
    UndefinedMetricError,
    WensembleError,
)
from wensemble.tables import LabelTable, PredictionSet  # noqa: E402
from wensemble.metrics import ConfusionMatrix, MetricReport, metric_report  # noqa: E402
from wensemble.ensemble import Scheme, derive_weights, sap, wen  # noqa: E402
