"""Label and prediction tables shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from wensemble.errors import AlignmentError, CoverageError, ParseError, WensembleError

#: Probability vectors must sum to 1 within this before renormalization.
SUM_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class LabelTable:
    """Ground-truth class index per example, in file order."""

    ids: tuple
    labels: np.ndarray
    class_names: tuple

    def __post_init__(self):
        ids = tuple(self.ids)
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        labels.setflags(write=False)
        names = tuple(self.class_names)
        if len(ids) != labels.shape[0]:
            raise ValueError("ids and labels differ in length")
        if len(set(ids)) != len(ids):
            raise WensembleError("duplicate example_id in label table")
        if len(set(names)) != len(names):
            raise WensembleError("duplicate class name")
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise WensembleError("label index outside the class list")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @classmethod
    def from_mapping(cls, entries: Mapping[str, str], class_names: Sequence[str] | None = None):
        if class_names is None:
            class_names = list(dict.fromkeys(entries.values()))
        pos = {c: i for i, c in enumerate(class_names)}
        unknown = sorted(set(entries.values()) - set(pos))
        if unknown:
            raise WensembleError(f"unknown class(es): {', '.join(unknown)}")
        return cls(tuple(entries), [pos[c] for c in entries.values()], tuple(class_names))

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        if not isinstance(other, LabelTable):
            return NotImplemented
        return (
            self.ids == other.ids
            and self.class_names == other.class_names
            and np.array_equal(self.labels, other.labels)
        )

    @property
    def n_classes(self):
        return len(self.class_names)

    @property
    def entries(self):
        return {i: self.class_names[c] for i, c in zip(self.ids, self.labels)}

    def class_index(self, name):
        try:
            return self.class_names.index(name)
        except ValueError:
            raise WensembleError(f"unknown class {name!r}; known: {list(self.class_names)}") from None

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes)

    def position(self):
        """example_id -> row index."""
        return {e: i for i, e in enumerate(self.ids)}

    def subset(self, ids):
        pos = self.position()
        return LabelTable(tuple(ids), self.labels[[pos[i] for i in ids]], self.class_names)


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """One model's probability vectors, one row per example.

    Rows are checked on construction: components in [0, 1] and summing to 1
    within ``SUM_TOLERANCE``; each row is then divided by its sum.
    """

    model_id: str
    ids: tuple
    probs: np.ndarray
    class_names: tuple

    def __post_init__(self):
        ids = tuple(self.ids)
        probs = np.array(self.probs, dtype=np.float64)
        names = tuple(self.class_names)
        if probs.ndim != 2 or probs.shape != (len(ids), len(names)):
            raise WensembleError(
                f"probability matrix shape {probs.shape} does not match "
                f"{len(ids)} examples x {len(names)} classes"
            )
        if len(set(ids)) != len(ids):
            raise WensembleError("duplicate example_id in prediction set")
        probs = normalize_rows(probs, ids)
        probs.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "class_names", names)

    def __len__(self):
        return len(self.ids)

    @property
    def n_classes(self):
        return len(self.class_names)

    @property
    def entries(self):
        return {e: self.probs[i] for i, e in enumerate(self.ids)}

    def vector(self, example_id):
        return self.probs[self.ids.index(example_id)]

    def aligned_to(self, labels: LabelTable) -> np.ndarray:
        """Probability rows reordered to ``labels.ids``."""
        return align_rows(self.ids, self.probs, labels, what=f"predictions of {self.model_id!r}")


def normalize_rows(probs, ids=None):
    probs = np.asarray(probs, dtype=np.float64)
    if not np.all(np.isfinite(probs)):
        raise ParseError(_row_msg("non-finite probability", probs, ~np.isfinite(probs).all(1), ids))
    bad = ((probs < 0) | (probs > 1)).any(axis=1)
    if bad.any():
        raise ParseError(_row_msg("probability outside [0, 1]", probs, bad, ids))
    sums = probs.sum(axis=1)
    bad = np.abs(sums - 1.0) > SUM_TOLERANCE
    if bad.any():
        raise ParseError(_row_msg("probabilities do not sum to 1", probs, bad, ids))
    return probs / sums[:, None]


def _row_msg(what, probs, bad, ids):
    i = int(np.flatnonzero(bad)[0])
    name = ids[i] if ids is not None else i
    return f"{what} for example {name!r}: {probs[i].tolist()}"


def align_rows(ids, rows, labels: LabelTable, what="decisions"):
    """Reorder ``rows`` (indexed like ``ids``) to the order of ``labels.ids``."""
    pos = {e: i for i, e in enumerate(ids)}
    if len(pos) != len(ids):
        raise AlignmentError(f"duplicate example_id in {what}")
    known = labels.position()
    unknown = [e for e in ids if e not in known]
    if unknown:
        raise AlignmentError(
            f"{what}: {len(unknown)} example_id(s) not in labels, e.g. {unknown[0]!r}"
        )
    missing = [e for e in labels.ids if e not in pos]
    if missing:
        raise CoverageError(
            f"{what}: {len(missing)} labeled example(s) missing, e.g. {missing[0]!r}"
        )
    rows = np.asarray(rows)
    return rows[[pos[e] for e in labels.ids]]
