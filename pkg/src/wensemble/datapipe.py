"""Label/prediction file I/O, stratified splitting and random oversampling.

File formats (UTF-8, comma-delimited, LF line ends):

labels
    ``example_id,class_name`` per row. An optional ``id,label`` header is
    skipped. A leading ``# classes: a,b,...`` line fixes the class order;
    otherwise classes are ordered by first appearance.
predictions
    mandatory header ``example_id,p_<class0>,p_<class1>,...`` then one row
    of probabilities per example.
plans
    ``example_id,assignment`` (split) or ``example_id,copy_count``
    (oversampling), each with that header.

Random draws use numpy's PCG64 bit generator seeded through
``numpy.random.SeedSequence(seed)``, so plans reproduce exactly from
(labels, seed).
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from wensemble.errors import AlignmentError, ParseError, StratificationError, WensembleError
from wensemble.tables import SUM_TOLERANCE, LabelTable, PredictionSet

LABEL_HEADER = ("id", "label")
CLASS_DIRECTIVE = "# classes:"
SPLIT_HEADER = ("example_id", "assignment")
OVERSAMPLE_HEADER = ("example_id", "copy_count")
TRAIN, VALIDATION = "train", "validation"


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


class _Source:
    """Iterate (line_number, fields) over a path or text stream."""

    def __init__(self, source):
        self.source = source
        self.name = os.fspath(source) if isinstance(source, (str, os.PathLike)) else getattr(source, "name", None)

    def lines(self):
        if isinstance(self.source, (str, os.PathLike)):
            with open(self.source, encoding="utf-8", newline="") as fh:
                yield from enumerate(fh.read().splitlines(), start=1)
        else:
            yield from enumerate(self.source.read().splitlines(), start=1)

    def error(self, msg, line=None):
        return ParseError(msg, self.name, line)


def _split_fields(text):
    return next(csv.reader([text]))


# -- labels ----------------------------------------------------------------


def load_labels(source, class_names=None) -> LabelTable:
    """Read a labels file or stream.

    ``class_names`` (or a ``# classes:`` line) fixes the class order and
    makes any other class name an error.
    """
    src = _Source(source)
    declared = list(class_names) if class_names is not None else None
    entries = {}
    seen_row = False
    for lineno, text in src.lines():
        if not text.strip():
            continue
        if text.startswith("#"):
            if text.lower().startswith(CLASS_DIRECTIVE) and not seen_row:
                listed = [c.strip() for c in text[len(CLASS_DIRECTIVE):].split(",") if c.strip()]
                if declared is not None and listed != declared:
                    raise src.error(f"declared classes {listed} conflict with {declared}", lineno)
                declared = listed
            continue
        fields = [f.strip() for f in _split_fields(text)]
        if not seen_row and tuple(f.lower() for f in fields) == LABEL_HEADER:
            seen_row = True
            continue
        seen_row = True
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise src.error(f"expected 'example_id,class_name', got {text!r}", lineno)
        ex, cls = fields
        if ex in entries:
            raise src.error(f"duplicate example_id {ex!r}", lineno)
        if declared is not None and cls not in declared:
            raise src.error(f"unknown class {cls!r}; declared classes are {declared}", lineno)
        entries[ex] = cls
    if not entries:
        raise src.error("empty label table")
    return LabelTable.from_mapping(entries, declared)


def write_labels(table: LabelTable, stream, declare_classes=True):
    if declare_classes:
        stream.write(f"{CLASS_DIRECTIVE} {','.join(table.class_names)}\n")
    stream.write(",".join(LABEL_HEADER) + "\n")
    for ex, c in zip(table.ids, table.labels):
        stream.write(f"{ex},{table.class_names[c]}\n")


# -- predictions -----------------------------------------------------------


def _header_classes(src, fields, lineno):
    if len(fields) < 2:
        raise src.error("prediction header needs example_id and at least one p_<class> column", lineno)
    classes = []
    for f in fields[1:]:
        if not f.startswith("p_") or len(f) == 2:
            raise src.error(f"prediction header column {f!r} is not of the form p_<class>", lineno)
        classes.append(f[2:])
    if len(set(classes)) != len(classes):
        raise src.error("duplicate class column in prediction header", lineno)
    return classes


def read_prediction_classes(source):
    """Class names declared by a predictions file header."""
    src = _Source(source)
    for lineno, text in src.lines():
        if text.strip() and not text.startswith("#"):
            return _header_classes(src, [f.strip() for f in _split_fields(text)], lineno)
    raise src.error("empty predictions file")


def load_predictions(source, labels: LabelTable | None = None, model_id=None) -> PredictionSet:
    """Read one model's predictions.

    With ``labels`` the header's classes must match the label classes (in
    any order; columns are reordered to the label order) and every
    example_id must be labeled.
    """
    src = _Source(source)
    if model_id is None:
        model_id = os.path.splitext(os.path.basename(src.name))[0] if src.name else "model"
    header = None
    ids, rows = [], []
    seen = set()
    known = labels.position() if labels is not None else None
    for lineno, text in src.lines():
        if not text.strip() or text.startswith("#"):
            continue
        fields = [f.strip() for f in _split_fields(text)]
        if header is None:
            header = _header_classes(src, fields, lineno)
            if labels is not None:
                if sorted(header) != sorted(labels.class_names):
                    raise AlignmentError(
                        f"{src.name or 'predictions'}:{lineno}: header classes {header} "
                        f"do not match label classes {list(labels.class_names)}"
                    )
                order = [header.index(c) for c in labels.class_names]
            else:
                order = list(range(len(header)))
            continue
        if len(fields) != 1 + len(header):
            raise src.error(f"expected {1 + len(header)} fields, got {len(fields)}", lineno)
        ex = fields[0]
        if not ex:
            raise src.error("empty example_id", lineno)
        if ex in seen:
            raise src.error(f"duplicate example_id {ex!r}", lineno)
        if known is not None and ex not in known:
            raise AlignmentError(f"{src.name or 'predictions'}:{lineno}: example_id {ex!r} is not in labels")
        try:
            vec = [float(f) for f in fields[1:]]
        except ValueError:
            raise src.error(f"non-numeric probability in {text!r}", lineno) from None
        if not all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in vec):
            raise src.error(f"probability outside [0, 1] in {text!r}", lineno)
        if abs(math.fsum(vec) - 1.0) > SUM_TOLERANCE:
            raise src.error(f"probabilities sum to {math.fsum(vec)!r}, not 1", lineno)
        seen.add(ex)
        ids.append(ex)
        rows.append([vec[i] for i in order])
    if header is None:
        raise src.error("empty predictions file")
    if not ids:
        raise src.error("predictions file has a header but no rows")
    names = labels.class_names if labels is not None else tuple(header)
    return PredictionSet(model_id, tuple(ids), np.array(rows, dtype=np.float64), names)


def format_prob(x):
    return repr(float(x))


def write_predictions(pset: PredictionSet, stream):
    stream.write(",".join(["example_id"] + [f"p_{c}" for c in pset.class_names]) + "\n")
    for ex, row in zip(pset.ids, pset.probs):
        stream.write(ex + "," + ",".join(format_prob(v) for v in row) + "\n")


def predictions_text(pset: PredictionSet) -> str:
    buf = io.StringIO()
    write_predictions(pset, buf)
    return buf.getvalue()


# -- stratified split ------------------------------------------------------


@dataclass(frozen=True)
class SplitPlan:
    assignments: dict
    seed: int
    ratios: dict

    @property
    def validation_ids(self):
        return [e for e, a in self.assignments.items() if a == VALIDATION]

    @property
    def train_ids(self):
        return [e for e, a in self.assignments.items() if a == TRAIN]

    def write(self, stream):
        _write_plan(stream, SPLIT_HEADER, self.assignments.items())


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def stratified_split(labels: LabelTable, validation_fraction, seed) -> SplitPlan:
    """Per-class sampling without replacement into train / validation.

    ``validation_fraction`` is one ratio for every class or a mapping
    ``class_name -> ratio``. Each class sends round(n_c * ratio) examples to
    validation, kept within [1, n_c - 1].
    """
    if isinstance(validation_fraction, Mapping):
        ratios = {c: float(validation_fraction[c]) for c in labels.class_names if c in validation_fraction}
        missing = [c for c in labels.class_names if c not in validation_fraction]
        if missing:
            raise StratificationError(f"no validation fraction for class(es) {missing}")
    else:
        ratios = {c: float(validation_fraction) for c in labels.class_names}
    for c, f in ratios.items():
        if not 0.0 < f < 1.0:
            raise StratificationError(f"validation fraction for {c!r} must be in (0, 1), got {f}")
    rng = make_rng(seed)
    chosen = np.zeros(len(labels), dtype=bool)
    for ci, name in enumerate(labels.class_names):
        members = np.flatnonzero(labels.labels == ci)
        n = members.size
        if n < 2:
            raise StratificationError(f"class {name!r} has {n} example(s); stratification needs at least 2")
        k = min(max(_round_half_up(n * ratios[name]), 1), n - 1)
        chosen[rng.choice(members, size=k, replace=False)] = True
    assignments = {e: (VALIDATION if v else TRAIN) for e, v in zip(labels.ids, chosen)}
    return SplitPlan(assignments, int(seed), ratios)


# -- random oversampling ---------------------------------------------------


@dataclass(frozen=True)
class OversamplePlan:
    replications: dict
    seed: int

    @property
    def total(self):
        return sum(self.replications.values())

    def class_totals(self, labels: LabelTable):
        totals = dict.fromkeys(labels.class_names, 0)
        for e, c in zip(labels.ids, labels.labels):
            totals[labels.class_names[c]] += self.replications[e]
        return totals

    def expand(self):
        """Training order with each example repeated by its copy count."""
        return [e for e, k in self.replications.items() for _ in range(k)]

    def write(self, stream):
        _write_plan(stream, OVERSAMPLE_HEADER, self.replications.items())


def oversample_plan(labels: LabelTable, seed) -> OversamplePlan:
    """Replicate minority-class examples at random until every class matches the majority.

    Extra copies are drawn uniformly with replacement from each minority
    class; majority examples keep a count of 1.
    """
    counts = labels.class_counts()
    if labels.n_classes < 2:
        raise WensembleError("oversampling needs at least two classes")
    empty = [labels.class_names[i] for i in np.flatnonzero(counts == 0)]
    if empty:
        raise WensembleError(f"cannot oversample class(es) with no examples: {empty}")
    target = int(counts.max())
    copies = np.ones(len(labels), dtype=np.int64)
    rng = make_rng(seed)
    for ci in range(labels.n_classes):
        extra = target - int(counts[ci])
        if extra == 0:
            continue
        members = np.flatnonzero(labels.labels == ci)
        draws = rng.integers(0, members.size, size=extra)
        copies[members] += np.bincount(draws, minlength=members.size)
    return OversamplePlan(dict(zip(labels.ids, copies.tolist())), int(seed))


# -- plan files ------------------------------------------------------------


def _write_plan(stream, header, items):
    stream.write(",".join(header) + "\n")
    for e, v in items:
        stream.write(f"{e},{v}\n")


def _read_plan(source, header):
    src = _Source(source)
    out = {}
    for lineno, text in src.lines():
        if not text.strip():
            continue
        fields = [f.strip() for f in _split_fields(text)]
        if tuple(fields) == header:
            continue
        if len(fields) != 2 or not fields[0]:
            raise src.error(f"expected '{','.join(header)}', got {text!r}", lineno)
        if fields[0] in out:
            raise src.error(f"duplicate example_id {fields[0]!r}", lineno)
        out[fields[0]] = (fields[1], lineno)
    return src, out


def load_split_plan(source, seed=0, ratios=None) -> SplitPlan:
    src, rows = _read_plan(source, SPLIT_HEADER)
    for e, (v, lineno) in rows.items():
        if v not in (TRAIN, VALIDATION):
            raise src.error(f"assignment must be {TRAIN!r} or {VALIDATION!r}, got {v!r}", lineno)
    return SplitPlan({e: v for e, (v, _) in rows.items()}, seed, dict(ratios or {}))


def load_oversample_plan(source, seed=0) -> OversamplePlan:
    src, rows = _read_plan(source, OVERSAMPLE_HEADER)
    out = {}
    for e, (v, lineno) in rows.items():
        try:
            k = int(v)
        except ValueError:
            raise src.error(f"copy_count must be an integer, got {v!r}", lineno) from None
        if k < 1:
            raise src.error(f"copy_count must be >= 1, got {k}", lineno)
        out[e] = k
    return OversamplePlan(out, seed)
