import numpy as np
import pytest

from wensemble.tables import LabelTable, PredictionSet

CLASSES = ("hem", "all")
# Xception (left) and WEN-kappa (right) confusion matrices, rows = actual hem/all
XCEPTION_CM = [[557, 91], [173, 1046]]
WEN_KAPPA_CM = [[502, 146], [64, 1155]]


def predictions_realizing(cm, seed=0, class_names=CLASSES, model_id="fixture"):
    """Labels and probabilities whose argmax decisions give confusion matrix ``cm``."""
    rng = np.random.default_rng(seed)
    actual, predicted = [], []
    for a, row in enumerate(cm):
        for p, count in enumerate(row):
            actual += [a] * count
            predicted += [p] * count
    actual = np.array(actual)
    predicted = np.array(predicted)
    order = rng.permutation(actual.size)
    actual, predicted = actual[order], predicted[order]
    n, k = actual.size, len(cm)
    probs = rng.uniform(0.0, 1.0, size=(n, k))
    # make the predicted column the strict maximum
    probs[np.arange(n), predicted] = probs.max(axis=1) + 1.0
    probs /= probs.sum(axis=1, keepdims=True)
    ids = tuple(f"img{i:05d}" for i in range(n))
    labels = LabelTable(ids, actual, class_names)
    return labels, PredictionSet(model_id, ids, probs, class_names)


def random_probs(rng, n, k):
    p = rng.dirichlet(np.ones(k), size=n)
    return p


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
