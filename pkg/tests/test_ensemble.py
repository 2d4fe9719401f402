import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CLASSES
from wensemble.ensemble import Scheme, decide, derive_weights, ensemble, sap, wen
from wensemble.errors import AlignmentError, ArityError, DegenerateWeightsError, WensembleError
from wensemble.metrics import MetricReport
from wensemble.tables import PredictionSet


def pset(model_id, rows, ids=None):
    ids = ids or tuple(f"ex_{i + 1}" for i in range(len(rows)))
    return PredictionSet(model_id, ids, rows, CLASSES)


def random_candidates(rng, k, n, c=2):
    names = CLASSES if c == 2 else tuple(f"c{j}" for j in range(c))
    ids = tuple(f"ex_{i}" for i in range(n))
    return [PredictionSet(f"m{j}", ids, rng.dirichlet(np.ones(c), size=n), names) for j in range(k)]


def report_with(**values):
    base = dict(wp=0.5, wr=0.5, wfs=0.5, acc=0.5, ba=0.5, auc=0.5, kappa=0.0)
    base.update(values)
    return MetricReport(**base)


def test_sap_hand_example():
    r = sap([pset("a", [[0.8, 0.2]]), pset("b", [[0.4, 0.6]])])
    assert r.fused[0] == pytest.approx([0.6, 0.4], abs=1e-15)
    assert r.decisions.tolist() == [0]
    assert r.scheme is Scheme.SAP


def test_wen_hand_example():
    r = wen([pset("a", [[0.8, 0.2]]), pset("b", [[0.4, 0.6]])], {"a": 3, "b": 1})
    assert r.fused[0] == pytest.approx([0.7, 0.3], abs=1e-15)


def test_sap_of_identical_candidates_is_idempotent(rng):
    base = random_candidates(rng, 1, 30)[0]
    cands = [PredictionSet(f"m{k}", base.ids, base.probs, base.class_names) for k in range(5)]
    r = sap(cands)
    assert np.allclose(r.fused, base.probs, atol=1e-15, rtol=0)


def test_sap_equals_mean_oracle(rng):
    cands = random_candidates(rng, 3, 20)
    r = sap(cands)
    for i, e in enumerate(r.ids):
        mean = [sum(c.vector(e)[j] for c in cands) / 3 for j in range(2)]
        assert r.fused[i] == pytest.approx(mean, abs=1e-12)


def test_equal_weights_equal_sap_exactly(rng):
    cands = random_candidates(rng, 4, 50, c=3)
    s = sap(cands)
    for w in (1.0, 0.3, 7.25):
        r = wen(cands, {c.model_id: w for c in cands})
        assert r.fused.tobytes() == s.fused.tobytes()
        assert np.array_equal(r.decisions, s.decisions)


def test_weight_doubling_is_byte_identical(rng):
    cands = random_candidates(rng, 3, 40)
    a = wen(cands, {"m0": 1, "m1": 1, "m2": 1})
    b = wen(cands, {"m0": 2, "m1": 2, "m2": 2})
    assert a.fused.tobytes() == b.fused.tobytes()


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-3, 1e3))
def test_positive_scale_invariance(seed, scale):
    rng = np.random.default_rng(seed)
    cands = random_candidates(rng, 5, 30)
    w = {c.model_id: float(v) for c, v in zip(cands, rng.uniform(0.05, 1, 5))}
    a = wen(cands, w)
    b = wen(cands, {m: v * scale for m, v in w.items()})
    assert np.max(np.abs(a.fused - b.fused)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    cands = random_candidates(rng, 5, 25)
    w = {c.model_id: float(v) for c, v in zip(cands, rng.uniform(0, 1, 5))}
    perm = rng.permutation(5)
    a = wen(cands, w)
    b = wen([cands[i] for i in perm], dict(reversed(list(w.items()))))
    assert a.fused.tobytes() == b.fused.tobytes()
    assert a.ids == b.ids and a.weights_used == b.weights_used


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.integers(2, 4))
def test_normalization_convexity_dominance(seed, c):
    rng = np.random.default_rng(seed)
    cands = random_candidates(rng, 4, 30, c)
    w = {x.model_id: float(v) for x, v in zip(cands, rng.uniform(0, 1, 4))}
    r = wen(cands, w)
    assert np.all(np.abs(r.fused.sum(axis=1) - 1) <= 1e-9)
    assert np.all((r.fused >= 0) & (r.fused <= 1))
    stack = np.stack([x.probs for x in cands])
    assert np.all(r.fused >= stack.min(axis=0) - 1e-12)
    assert np.all(r.fused <= stack.max(axis=0) + 1e-12)
    maxima = stack.argmax(axis=2)
    agree = (maxima == maxima[0]).all(axis=0)
    assert np.array_equal(r.decisions[agree], maxima[0][agree])


def test_candidate_row_order_is_aligned(rng):
    a = random_candidates(rng, 1, 10)[0]
    order = rng.permutation(10)
    b = PredictionSet("z", tuple(a.ids[i] for i in order), a.probs[order], a.class_names)
    r = sap([a, b])
    assert np.allclose(r.fused, a.probs, atol=1e-15, rtol=0)


def test_arity_and_alignment_errors():
    a = pset("a", [[0.5, 0.5], [0.1, 0.9]])
    with pytest.raises(ArityError):
        sap([a])
    b = pset("b", [[0.5, 0.5], [0.1, 0.9]], ids=("ex_1", "other"))
    with pytest.raises(AlignmentError):
        sap([a, b])
    c = pset("c", [[0.5, 0.5]])
    with pytest.raises(AlignmentError):
        sap([a, c])
    d = PredictionSet("d", a.ids, a.probs, ("all", "hem"))
    with pytest.raises(AlignmentError):
        sap([a, d])


def test_weight_key_errors_and_degenerate():
    a, b = pset("a", [[0.5, 0.5]]), pset("b", [[0.2, 0.8]])
    with pytest.raises(KeyError):
        wen([a, b], {"a": 1})
    with pytest.raises(KeyError):
        wen([a, b], {"a": 1, "b": 1, "c": 1})
    with pytest.raises(DegenerateWeightsError):
        wen([a, b], {"a": 0, "b": 0})
    with pytest.raises(DegenerateWeightsError):
        wen([a, b], {"a": -1, "b": 1})


def test_derive_weights_acc():
    reports = {"m1": report_with(acc=0.859), "m2": report_with(acc=0.844)}
    assert derive_weights(reports, "acc") == {"m1": 0.859, "m2": 0.844}


def test_derive_weights_schemes_pick_metric():
    r = report_with(acc=0.1, auc=0.2, wfs=0.3, kappa=0.4)
    for scheme, expected in (("acc", 0.1), ("auc", 0.2), ("f1", 0.3), ("kappa", 0.4)):
        assert derive_weights({"m": r}, scheme) == {"m": expected}
    with pytest.raises(WensembleError):
        derive_weights({"m": r}, "sap")


def test_derive_weights_kappa_clamp():
    w = derive_weights({"good": report_with(kappa=0.6), "bad": report_with(kappa=-0.1)}, Scheme.KAPPA)
    assert w == {"bad": 0.0, "good": 0.6}


def test_identical_metrics_make_wen_equal_sap(rng):
    cands = random_candidates(rng, 5, 40)
    reports = {c.model_id: report_with(acc=0.81, auc=0.9, wfs=0.8, kappa=0.55) for c in cands}
    s = sap(cands)
    for scheme in ("acc", "auc", "f1", "kappa"):
        assert ensemble(cands, scheme, reports).fused.tobytes() == s.fused.tobytes()


@pytest.mark.parametrize(
    "vec, expected",
    [((0.7, 0.3), 0), ((0.5, 0.5), 0), ((0.1, 0.2, 0.7), 2)],
)
def test_decide(vec, expected):
    assert decide(vec) == expected


def test_decide_empty():
    with pytest.raises(WensembleError):
        decide([])


def test_as_prediction_set(rng):
    cands = random_candidates(rng, 2, 5)
    p = sap(cands).as_prediction_set()
    assert p.model_id == "ensemble_sap" and p.ids == cands[0].ids
