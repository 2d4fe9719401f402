"""Soft-voting fusion of candidate-model probability outputs.

``sap`` averages the candidates' class probabilities; ``wen`` weights each
candidate by a metric of its validation performance. Both share one code
path: weights are divided by their maximum, each example's weighted sum is
taken over candidates in ``model_id`` order, and the summed row is divided
by its own total. For valid inputs that total equals the weight sum, so the
result is the weighted mean; the shared path is what makes equal-weight
``wen`` and ``sap`` agree bit for bit and makes candidate order irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from wensemble import kernels
from wensemble.errors import AlignmentError, ArityError, DegenerateWeightsError, WensembleError
from wensemble.metrics import MetricReport, argmax_rows
from wensemble.tables import PredictionSet


class Scheme(str, Enum):
    SAP = "sap"
    ACC = "acc"
    AUC = "auc"
    F1 = "f1"
    KAPPA = "kappa"

    def __str__(self):
        return self.value


# report field backing each weighted scheme; f1 uses the support-weighted F1
SCHEME_METRIC = {Scheme.ACC: "acc", Scheme.AUC: "auc", Scheme.F1: "wfs", Scheme.KAPPA: "kappa"}


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    ids: tuple
    fused: np.ndarray
    decisions: np.ndarray
    class_names: tuple
    scheme: Scheme
    weights_used: dict

    def as_prediction_set(self, model_id=None) -> PredictionSet:
        return PredictionSet(model_id or f"ensemble_{self.scheme.value}", self.ids, self.fused, self.class_names)

    @property
    def entries(self):
        return {e: self.fused[i] for i, e in enumerate(self.ids)}

    @property
    def decision_map(self):
        return {e: int(d) for e, d in zip(self.ids, self.decisions)}


def decide(fused) -> int:
    """Index of the largest component; ties go to the lowest index."""
    v = np.asarray(fused, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise WensembleError("decide needs a non-empty probability vector")
    return int(argmax_rows(v[None, :])[0])


def _stack(candidates: Sequence[PredictionSet]):
    if len(candidates) < 2:
        raise ArityError(f"an ensemble needs at least 2 candidates, got {len(candidates)}")
    ordered = sorted(candidates, key=lambda c: c.model_id)
    names = [c.model_id for c in ordered]
    if len(set(names)) != len(names):
        raise AlignmentError("duplicate model_id among candidates")
    ref = ordered[0]
    ref_ids = set(ref.ids)
    rows = []
    for cand in ordered:
        if cand.class_names != ref.class_names:
            raise AlignmentError(
                f"class lists differ: {ref.model_id!r} has {list(ref.class_names)}, "
                f"{cand.model_id!r} has {list(cand.class_names)}"
            )
        if cand.ids == ref.ids:
            rows.append(cand.probs)
            continue
        if len(cand.ids) != len(ref.ids) or set(cand.ids) != ref_ids:
            extra = sorted(set(cand.ids) ^ ref_ids)
            raise AlignmentError(
                f"example sets differ between {ref.model_id!r} and {cand.model_id!r}, e.g. {extra[0]!r}"
            )
        pos = {e: i for i, e in enumerate(cand.ids)}
        rows.append(cand.probs[[pos[e] for e in ref.ids]])
    return ordered, np.stack(rows), ref


def _fuse(candidates, weights: Mapping[str, float] | None, scheme: Scheme) -> EnsembleResult:
    ordered, stack, ref = _stack(candidates)
    if weights is None:
        used = {c.model_id: 1.0 for c in ordered}
    else:
        used = check_weights(weights, [c.model_id for c in ordered])
    w = np.array([used[c.model_id] for c in ordered], dtype=np.float64)
    fused = kernels.weighted_fuse(stack, w / w.max())
    return EnsembleResult(
        ids=ref.ids,
        fused=fused,
        decisions=argmax_rows(fused),
        class_names=ref.class_names,
        scheme=scheme,
        weights_used=used,
    )


def sap(candidates: Sequence[PredictionSet]) -> EnsembleResult:
    """Simple average of the candidates' probabilities."""
    return _fuse(candidates, None, Scheme.SAP)


def wen(candidates: Sequence[PredictionSet], weights: Mapping[str, float], scheme=Scheme.ACC) -> EnsembleResult:
    """Weighted average of the candidates' probabilities.

    ``weights`` maps each candidate's ``model_id`` to a non-negative weight;
    it must name exactly the candidates. ``scheme`` only labels the result.
    """
    return _fuse(candidates, weights, Scheme(scheme))


def check_weights(weights: Mapping[str, float], model_ids) -> dict:
    model_ids = list(model_ids)
    unknown = sorted(set(weights) - set(model_ids))
    missing = sorted(set(model_ids) - set(weights))
    if unknown:
        raise KeyError(f"weight given for unknown model(s): {unknown}")
    if missing:
        raise KeyError(f"no weight for model(s): {missing}")
    out = {}
    for m in sorted(model_ids):
        v = float(weights[m])
        if not math.isfinite(v) or v < 0:
            raise DegenerateWeightsError(f"weight for {m!r} must be finite and >= 0, got {v}")
        out[m] = v
    if not any(v > 0 for v in out.values()):
        raise DegenerateWeightsError("all ensemble weights are zero")
    return out


def derive_weights(validation_reports: Mapping[str, MetricReport], scheme) -> dict:
    """One weight per model from its validation-split report.

    Kappa weights are clamped below at 0 so a worse-than-chance model gets
    no vote rather than a negative one.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.SAP:
        raise WensembleError("the sap scheme takes no weights")
    field_name = SCHEME_METRIC[scheme]
    weights = {}
    for model_id in sorted(validation_reports):
        value = float(validation_reports[model_id].metric(field_name))
        if not math.isfinite(value):
            raise WensembleError(f"{field_name} is undefined in the report for {model_id!r}")
        if scheme is Scheme.KAPPA:
            value = max(value, 0.0)
        weights[model_id] = value
    return weights


def ensemble(candidates, scheme, validation_reports=None) -> EnsembleResult:
    """Fuse with ``scheme``; weighted schemes read weights from ``validation_reports``."""
    scheme = Scheme(scheme)
    if scheme is Scheme.SAP:
        return sap(candidates)
    if validation_reports is None:
        raise WensembleError(f"scheme {scheme.value!r} needs validation reports")
    return wen(candidates, derive_weights(validation_reports, scheme), scheme)
