"""Synthetic labels and score generators, plus brute-force reference metrics.

A synthetic predictor draws a latent ``z ~ N(0, 1)`` per example, shifts it
by ``+d/2`` for positives and ``-d/2`` for negatives, and reports
``Phi(latent)`` as the positive-class probability. With equal-variance
normal classes the population AUC is ``Phi(d / sqrt 2)``, so
``d = sqrt(2) * Phi^-1(skill)``. Latents depend only on the seed stream,
not on ``skill``, which makes realized AUC monotone in ``skill``.

Each predictor's stream is seeded from the first 8 bytes (little-endian) of
``sha256(f"{seed}:{model_id}")``, giving reproducible, mutually
independent predictors.

The ``oracle_*`` functions are deliberately naive and share no code with
``wensemble.metrics``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from wensemble.datapipe import make_rng
from wensemble.errors import UndefinedMetricError, WensembleError
from wensemble.tables import LabelTable, PredictionSet

DEFAULT_CLASSES = ("hem", "all")


@dataclass(frozen=True)
class SyntheticPredictorSpec:
    skill: float
    model_id: str = "synth"
    seed: int = 0
    n_classes: int = 2
    positive_class: int = 1

    def __post_init__(self):
        if not 0.5 <= self.skill <= 1.0:
            raise WensembleError(f"skill must be within [0.5, 1], got {self.skill}")
        if self.n_classes != 2:
            raise WensembleError("synthetic predictors are binary")
        if self.positive_class not in (0, 1):
            raise WensembleError("positive_class must be 0 or 1")


def stream_seed(seed, model_id) -> int:
    digest = hashlib.sha256(f"{int(seed)}:{model_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def separation_for(skill) -> float:
    """Latent mean gap giving population AUC ``skill``."""
    if skill >= 1.0:
        return math.inf
    return math.sqrt(2.0) * float(ndtri(skill))


def gen_ground_truth(n_positive, n_negative, seed, class_names=DEFAULT_CLASSES, positive_class=1) -> LabelTable:
    """Shuffled binary labels with ids ``ex_0001``, ``ex_0002``, ..."""
    n_positive, n_negative = int(n_positive), int(n_negative)
    if n_positive < 0 or n_negative < 0:
        raise WensembleError("class counts must be non-negative")
    n = n_positive + n_negative
    if n < 1:
        raise WensembleError("need at least one example")
    labels = np.full(n, 1 - positive_class, dtype=np.int64)
    labels[:n_positive] = positive_class
    make_rng(seed).shuffle(labels)
    width = max(4, len(str(n)))
    ids = tuple(f"ex_{i:0{width}d}" for i in range(1, n + 1))
    return LabelTable(ids, labels, tuple(class_names))


def gen_scores(is_positive, spec: SyntheticPredictorSpec) -> np.ndarray:
    is_positive = np.asarray(is_positive, dtype=bool)
    z = make_rng(stream_seed(spec.seed, spec.model_id)).standard_normal(is_positive.size)
    d = separation_for(spec.skill)
    if math.isinf(d):
        base = ndtr(z)
        return np.where(is_positive, 0.5 + 0.5 * base, 0.5 * base)
    return ndtr(np.where(is_positive, z + d / 2, z - d / 2))


def gen_predictor(labels: LabelTable, spec: SyntheticPredictorSpec) -> PredictionSet:
    """Binary prediction set whose positive-class score has target AUC ``spec.skill``."""
    if labels.n_classes != 2:
        raise WensembleError(f"synthetic predictors need binary labels, got {labels.n_classes} classes")
    s = gen_scores(labels.labels == spec.positive_class, spec)
    probs = np.empty((len(labels), 2))
    probs[:, spec.positive_class] = s
    probs[:, 1 - spec.positive_class] = 1.0 - s
    return PredictionSet(spec.model_id, labels.ids, probs, labels.class_names)


def gen_candidates(labels, skills, seed, prefix="model"):
    """One independent predictor per entry of ``skills``."""
    return [
        gen_predictor(labels, SyntheticPredictorSpec(float(s), f"{prefix}{k + 1}", seed))
        for k, s in enumerate(skills)
    ]


# -- oracles ---------------------------------------------------------------


def oracle_auc(scores, positive) -> float:
    """AUC by counting every (positive, negative) pair; ties count 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    pos = scores[positive]
    neg = scores[~positive]
    if pos.size == 0 or neg.size == 0:
        raise UndefinedMetricError("AUC needs both classes")
    wins = ties = 0
    for chunk in np.array_split(pos, max(1, pos.size // 512)):
        wins += int((chunk[:, None] > neg[None, :]).sum())
        ties += int((chunk[:, None] == neg[None, :]).sum())
    return (wins + 0.5 * ties) / (pos.size * neg.size)


def oracle_auc_scored(scored) -> float:
    scored = list(scored)
    return oracle_auc([s.score for s in scored], [s.label for s in scored])


def oracle_metrics(actual, predicted, n_classes) -> dict:
    """Metric bundle from per-example tallies, with plain Python loops."""
    actual = [int(a) for a in actual]
    predicted = [int(p) for p in predicted]
    n = len(actual)
    if n == 0:
        raise UndefinedMetricError("no examples")
    tp = [0] * n_classes
    fp = [0] * n_classes
    fn = [0] * n_classes
    support = [0] * n_classes
    npred = [0] * n_classes
    correct = 0
    for a, p in zip(actual, predicted):
        support[a] += 1
        npred[p] += 1
        if a == p:
            tp[a] += 1
            correct += 1
        else:
            fp[p] += 1
            fn[a] += 1
    precision, recall, f1 = [], [], []
    for c in range(n_classes):
        pr = tp[c] / (tp[c] + fp[c]) if tp[c] + fp[c] else 0.0
        rc = tp[c] / (tp[c] + fn[c]) if tp[c] + fn[c] else 0.0
        precision.append(pr)
        recall.append(rc)
        f1.append(2 * pr * rc / (pr + rc) if pr + rc else 0.0)
    p_o = correct / n
    p_e = sum(support[c] * npred[c] for c in range(n_classes)) / (n * n)
    out = {
        "acc": p_o,
        "wr": sum(support[c] * recall[c] for c in range(n_classes)) / n,
        "wp": sum(support[c] * precision[c] for c in range(n_classes)) / n,
        "wfs": sum(support[c] * f1[c] for c in range(n_classes)) / n,
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "support": support,
        "kappa": (p_o - p_e) / (1 - p_e) if p_e != 1 else math.nan,
    }
    out["ba"] = sum(recall) / n_classes if all(support) else math.nan
    return out


def oracle_argmax(row) -> int:
    best = 0
    for j in range(1, len(row)):
        if row[j] > row[best]:
            best = j
    return best
