"""Confusion matrices, per-class statistics, summary metrics and ROC/AUC.

Everything derives from integer counts. Conventions:

* precision, recall and F1 are 0 when their denominator is 0;
* weighted means are weighted by class support (confusion-matrix row sums);
* balanced accuracy is the mean of per-class recalls, which for two classes
  is (specificity + sensitivity) / 2;
* Cohen's kappa is (p_o - p_e) / (1 - p_e);
* ROC thresholds are the distinct scores in descending order, so tied
  scores move along a diagonal segment and the trapezoidal area equals the
  Mann-Whitney pair count with ties counted as 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from wensemble import kernels
from wensemble.errors import AlignmentError, UndefinedMetricError, WensembleError
from wensemble.tables import LabelTable, PredictionSet, align_rows


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts with rows = actual class, columns = predicted class."""

    counts: np.ndarray
    class_names: tuple

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        names = tuple(self.class_names)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise WensembleError(f"confusion matrix must be square, got shape {counts.shape}")
        if counts.shape[0] != len(names):
            raise WensembleError("confusion matrix size does not match class list")
        if (counts < 0).any():
            raise WensembleError("confusion matrix has negative cells")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_names", names)

    @classmethod
    def from_counts(cls, counts, class_names=None):
        counts = np.asarray(counts)
        if class_names is None:
            class_names = tuple(f"class{i}" for i in range(counts.shape[0]))
        return cls(counts, class_names)

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.class_names == other.class_names and np.array_equal(self.counts, other.counts)

    @property
    def n_classes(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return int(self.counts.sum())

    def row_sums(self):
        return self.counts.sum(axis=1)

    def col_sums(self):
        return self.counts.sum(axis=0)

    def tolist(self):
        return self.counts.tolist()


@dataclass(frozen=True)
class PerClassStats:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ScoredExample:
    example_id: object
    score: float
    label: bool


@dataclass
class MetricReport:
    wp: float
    wr: float
    wfs: float
    acc: float
    ba: float
    auc: float
    kappa: float
    per_class: list = field(default_factory=list)
    class_names: tuple = ()
    positive_class: str | None = None
    n: int = 0
    model_id: str | None = None

    SUMMARY = ("wp", "wr", "wfs", "acc", "ba", "auc")

    def metric(self, name):
        if name in ("f1", "wfs"):
            return self.wfs
        if name not in ("wp", "wr", "acc", "ba", "auc", "kappa"):
            raise KeyError(name)
        return getattr(self, name)

    def to_dict(self):
        return {
            "model_id": self.model_id,
            "n": self.n,
            "class_names": list(self.class_names),
            "positive_class": self.positive_class,
            "wp": self.wp,
            "wr": self.wr,
            "wfs": self.wfs,
            "acc": self.acc,
            "ba": self.ba,
            "auc": self.auc,
            "kappa": self.kappa,
            "per_class": [
                {"class": c, "precision": s.precision, "recall": s.recall, "f1": s.f1, "support": s.support}
                for c, s in zip(self.class_names, self.per_class)
            ],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            per_class = [
                PerClassStats(float(p["precision"]), float(p["recall"]), float(p["f1"]), int(p["support"]))
                for p in d.get("per_class", [])
            ]
            return cls(
                wp=float(d["wp"]),
                wr=float(d["wr"]),
                wfs=float(d["wfs"]),
                acc=float(d["acc"]),
                ba=float(d["ba"]),
                auc=float(d["auc"]),
                kappa=float(d["kappa"]),
                per_class=per_class,
                class_names=tuple(d.get("class_names", ())),
                positive_class=d.get("positive_class"),
                n=int(d.get("n", 0)),
                model_id=d.get("model_id"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise WensembleError(f"malformed metric report: {exc}") from None

    def render(self):
        """Two-line table at three decimals."""
        names = ("WP", "WR", "WFS", "ACC", "BA", "AUC", "KAPPA")
        values = (self.wp, self.wr, self.wfs, self.acc, self.ba, self.auc, self.kappa)
        head = "  ".join(f"{n:>6}" for n in names)
        row = "  ".join(f"{v:6.3f}" for v in values)
        return f"{head}\n{row}"


def confusion_from_indices(actual, predicted, class_names) -> ConfusionMatrix:
    n = len(class_names)
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise AlignmentError("actual and predicted differ in length")
    for arr in (actual, predicted):
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise WensembleError("class index out of range")
    return ConfusionMatrix(kernels.confusion_counts(actual, predicted, n), tuple(class_names))


def build_confusion(labels: LabelTable, decisions: Mapping) -> ConfusionMatrix:
    """Tally decisions (example_id -> class index) against the label table."""
    ids = list(decisions)
    predicted = align_rows(ids, np.fromiter((decisions[i] for i in ids), dtype=np.int64, count=len(ids)), labels)
    return confusion_from_indices(labels.labels, predicted, labels.class_names)


def _nonempty(cm: ConfusionMatrix):
    if cm.total == 0:
        raise UndefinedMetricError("metric undefined on an all-zero confusion matrix")


def _ratio(num, den):
    return float(num) / float(den) if den else 0.0


def per_class_stats(cm: ConfusionMatrix, c: int) -> PerClassStats:
    if not 0 <= c < cm.n_classes:
        raise WensembleError(f"class index {c} out of range for {cm.n_classes} classes")
    tp = int(cm.counts[c, c])
    support = int(cm.counts[c].sum())
    precision = _ratio(tp, cm.counts[:, c].sum())
    recall = _ratio(tp, support)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return PerClassStats(precision, recall, f1, support)


def all_class_stats(cm: ConfusionMatrix):
    return [per_class_stats(cm, c) for c in range(cm.n_classes)]


def _support_weighted(cm, attr):
    _nonempty(cm)
    stats = all_class_stats(cm)
    return sum(s.support * getattr(s, attr) for s in stats) / cm.total


def weighted_f1(cm: ConfusionMatrix) -> float:
    return _support_weighted(cm, "f1")


def weighted_precision(cm: ConfusionMatrix) -> float:
    return _support_weighted(cm, "precision")


def weighted_recall(cm: ConfusionMatrix) -> float:
    # n_i * (tp_i / n_i) collapses to tp_i; summing counts keeps WR == accuracy bit for bit
    _nonempty(cm)
    return int(np.trace(cm.counts)) / cm.total


def accuracy(cm: ConfusionMatrix) -> float:
    _nonempty(cm)
    return int(np.trace(cm.counts)) / cm.total


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    _nonempty(cm)
    rows = cm.row_sums()
    if (rows == 0).any():
        empty = [cm.class_names[i] for i in np.flatnonzero(rows == 0)]
        raise UndefinedMetricError(f"balanced accuracy undefined: no actual examples of {empty}")
    recalls = [cm.counts[i, i] / rows[i] for i in range(cm.n_classes)]
    return float(sum(recalls) / cm.n_classes)


def cohens_kappa(cm: ConfusionMatrix) -> float:
    _nonempty(cm)
    n = cm.total
    observed = int(np.trace(cm.counts))
    chance = sum(int(r) * int(c) for r, c in zip(cm.row_sums(), cm.col_sums()))
    # kappa = (n*obs - chance) / (n^2 - chance), exact integers until the last step
    den = n * n - chance
    if den == 0:
        raise UndefinedMetricError("kappa undefined: chance agreement is 1")
    return (n * observed - chance) / den


def _scored_arrays(scored: Iterable[ScoredExample]):
    scored = list(scored)
    scores = np.array([s.score for s in scored], dtype=np.float64)
    positive = np.array([bool(s.label) for s in scored], dtype=bool)
    return scores, positive


def _check_scores(scores, positive):
    if scores.shape != positive.shape:
        raise AlignmentError("scores and labels differ in length")
    if not np.all(np.isfinite(scores)) or (scores < 0).any() or (scores > 1).any():
        raise WensembleError("scores must be finite and within [0, 1]")
    n_pos = int(positive.sum())
    if n_pos == 0 or n_pos == positive.size:
        raise UndefinedMetricError("ROC undefined: need at least one positive and one negative")


def roc_counts(scores, positive):
    """Cumulative (fp, tp) integer counts at each distinct threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    _check_scores(scores, positive)
    return kernels.roc_sweep(scores, positive)


def roc_curve(scores, positive):
    fp, tp = roc_counts(scores, positive)
    return fp / fp[-1], tp / tp[-1]


def auc_score(scores, positive) -> float:
    fp, tp = roc_counts(scores, positive)
    # twice the trapezoid area in count units is an exact integer
    twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1]), dtype=np.int64))
    return twice_area / (2 * int(fp[-1]) * int(tp[-1]))


def roc_points(scored: Sequence[ScoredExample]):
    fpr, tpr = roc_curve(*_scored_arrays(scored))
    return list(zip(fpr.tolist(), tpr.tolist()))


def roc_auc(scored: Sequence[ScoredExample]) -> float:
    return auc_score(*_scored_arrays(scored))


def argmax_rows(probs) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest class index."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] == 0:
        raise WensembleError("empty probability vector")
    return np.argmax(probs, axis=1).astype(np.int64)


def report_from_arrays(labels: LabelTable, probs: np.ndarray, positive: int, model_id=None) -> MetricReport:
    """Report for probability rows already aligned to ``labels.ids``."""
    if not 0 <= positive < labels.n_classes:
        raise WensembleError(f"positive class index {positive} out of range")
    decisions = argmax_rows(probs)
    cm = confusion_from_indices(labels.labels, decisions, labels.class_names)
    return MetricReport(
        wp=weighted_precision(cm),
        wr=weighted_recall(cm),
        wfs=weighted_f1(cm),
        acc=accuracy(cm),
        ba=balanced_accuracy(cm),
        auc=auc_score(probs[:, positive], labels.labels == positive),
        kappa=cohens_kappa(cm),
        per_class=all_class_stats(cm),
        class_names=labels.class_names,
        positive_class=labels.class_names[positive],
        n=len(labels),
        model_id=model_id,
    )


def metric_report(labels: LabelTable, probs: PredictionSet, positive_class) -> MetricReport:
    """Full metric bundle for one model; ``positive_class`` is an index or class name."""
    if tuple(probs.class_names) != tuple(labels.class_names):
        raise AlignmentError(
            f"class lists differ: labels {list(labels.class_names)} vs predictions {list(probs.class_names)}"
        )
    if isinstance(positive_class, str):
        positive_class = labels.class_index(positive_class)
    return report_from_arrays(labels, probs.aligned_to(labels), int(positive_class), probs.model_id)


def confusion_for(labels: LabelTable, probs: PredictionSet) -> ConfusionMatrix:
    return confusion_from_indices(labels.labels, argmax_rows(probs.aligned_to(labels)), labels.class_names)


__all__ = [
    "ConfusionMatrix",
    "MetricReport",
    "PerClassStats",
    "ScoredExample",
    "accuracy",
    "all_class_stats",
    "argmax_rows",
    "auc_score",
    "balanced_accuracy",
    "build_confusion",
    "cohens_kappa",
    "confusion_for",
    "confusion_from_indices",
    "metric_report",
    "per_class_stats",
    "report_from_arrays",
    "roc_auc",
    "roc_counts",
    "roc_curve",
    "roc_points",
    "weighted_f1",
    "weighted_precision",
    "weighted_recall",
]
