import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import WEN_KAPPA_CM, predictions_realizing, write_text
from wensemble import datapipe, synthlab
from wensemble.cli import main
from wensemble.metrics import auc_score


def save_fixture(tmp_path, labels, pset, stem="pred"):
    lp = tmp_path / "labels.csv"
    with open(lp, "w") as fh:
        datapipe.write_labels(labels, fh)
    pp = tmp_path / f"{stem}.csv"
    with open(pp, "w") as fh:
        datapipe.write_predictions(pset, fh)
    return lp, pp


def table_value(text, name):
    lines = text.splitlines()
    for head, values in zip(lines, lines[1:]):
        if name in head.split():
            return values.split()[head.split().index(name)]
    raise AssertionError(f"{name} not in output:\n{text}")


def synth(tmp_path, skills, n_pos=60, n_neg=40, seed=3):
    out = tmp_path / "synth"
    args = ["synth", "--n-pos", str(n_pos), "--n-neg", str(n_neg), "--seed", str(seed), "--out", str(out)]
    for s in skills:
        args += ["--skill", str(s)]
    assert main(args) == 0
    return out


def test_evaluate_wen_kappa_fixture(tmp_path, capsys):
    labels, pset = predictions_realizing(WEN_KAPPA_CM, seed=1)
    lp, pp = save_fixture(tmp_path, labels, pset)
    out = tmp_path / "out"
    assert main(["evaluate", "--labels", str(lp), "--pred", str(pp), "--positive-class", "all", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert table_value(text, "ACC") == "0.888"
    # exact BA is 0.86109; the published 0.862 is met at the acceptance tolerance only
    assert table_value(text, "BA") == "0.861"
    assert abs(float(table_value(text, "BA")) - 0.862) <= 0.0015
    assert table_value(text, "WFS") == "0.886"
    report = json.loads((out / "report.json").read_text())
    assert report["confusion"] == WEN_KAPPA_CM
    assert (out / "confusion.csv").read_text().splitlines()[1] == "hem,502,146"


def test_evaluate_perfect_fixture(tmp_path, capsys):
    labels, pset = predictions_realizing([[20, 0], [0, 30]])
    lp, pp = save_fixture(tmp_path, labels, pset)
    assert main(["evaluate", "--labels", str(lp), "--pred", str(pp), "--positive-class", "all", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    for name in ("WP", "WR", "WFS", "ACC", "BA", "AUC", "KAPPA"):
        assert table_value(text, name) == "1.000"


def test_evaluate_json_format(tmp_path, capsys):
    labels, pset = predictions_realizing([[3, 1], [1, 3]])
    lp, pp = save_fixture(tmp_path, labels, pset)
    args = ["evaluate", "--labels", str(lp), "--pred", str(pp), "--positive-class", "all", "--out", str(tmp_path)]
    assert main(args + ["--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["acc"] == 0.75


def test_misaligned_ids_exit_4_and_nothing_written(tmp_path, capsys):
    lp = write_text(tmp_path / "labels.csv", "img1,hem\nimg2,all\n")
    pp = write_text(tmp_path / "pred.csv", "example_id,p_hem,p_all\nimg1,0.5,0.5\nimgX,0.2,0.8\n")
    out = tmp_path / "out"
    code = main(["evaluate", "--labels", str(lp), "--pred", str(pp), "--positive-class", "all", "--out", str(out)])
    assert code == 4
    assert "imgX" in capsys.readouterr().err
    assert not out.exists() or not any(out.iterdir())


def test_missing_prediction_is_alignment_error(tmp_path):
    lp = write_text(tmp_path / "labels.csv", "img1,hem\nimg2,all\n")
    pp = write_text(tmp_path / "pred.csv", "example_id,p_hem,p_all\nimg1,0.5,0.5\n")
    assert main(["evaluate", "--labels", str(lp), "--pred", str(pp), "--positive-class", "all", "--out", str(tmp_path / "o")]) == 4


def test_parse_error_reports_file_and_line(tmp_path, capsys):
    lp = write_text(tmp_path / "labels.csv", "img1,hem\nimg2,all\n")
    pp = write_text(tmp_path / "pred.csv", "example_id,p_hem,p_all\nimg1,0.5,0.5\nimg2,0.9,0.9\n")
    assert main(["evaluate", "--labels", str(lp), "--pred", str(pp), "--positive-class", "all", "--out", str(tmp_path / "o")]) == 3
    assert f"{pp}:3" in capsys.readouterr().err


def test_unknown_positive_class_is_usage_level_error(tmp_path):
    labels, pset = predictions_realizing([[2, 0], [0, 2]])
    lp, pp = save_fixture(tmp_path, labels, pset)
    assert main(["evaluate", "--labels", str(lp), "--pred", str(pp), "--positive-class", "blast", "--out", str(tmp_path)]) != 0


def test_argparse_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["evaluate"])
    assert exc.value.code == 2


def ensemble_args(d, preds, out, scheme="sap", reports=()):
    args = ["ensemble", "--labels", str(d / "labels.csv"), "--positive-class", "all", "--out", str(out), "--scheme", scheme]
    for p in preds:
        args += ["--pred", str(p)]
    for r in reports:
        args += ["--val-report", str(r)]
    return args


def test_ensemble_hand_example(tmp_path):
    write_text(tmp_path / "labels.csv", "ex_1,hem\nex_2,all\n")
    a = write_text(tmp_path / "a.csv", "example_id,p_hem,p_all\nex_1,0.8,0.2\nex_2,0.1,0.9\n")
    b = write_text(tmp_path / "b.csv", "example_id,p_hem,p_all\nex_1,0.4,0.6\nex_2,0.3,0.7\n")
    ra = write_text(tmp_path / "ra.json", json.dumps({"model_id": "a", "acc": 0.75, "wp": 0, "wr": 0, "wfs": 0, "ba": 0, "auc": 0, "kappa": 0}))
    rb = write_text(tmp_path / "rb.json", json.dumps({"model_id": "b", "acc": 0.25, "wp": 0, "wr": 0, "wfs": 0, "ba": 0, "auc": 0, "kappa": 0}))
    out = tmp_path / "out"
    assert main(ensemble_args(tmp_path, [a, b], out, "acc", [rb, ra])) == 0
    assert (out / "fused.csv").read_text().splitlines()[1] == "ex_1,0.7,0.3"
    assert (out / "weights.csv").read_text() == "model_id,weight\na,0.75\nb,0.25\n"


def test_ensemble_sap_equals_equal_metric_weights(tmp_path):
    d = synth(tmp_path, [0.7, 0.75, 0.8, 0.85, 0.9])
    preds = sorted(d.glob("model*.csv"))
    report = json.dumps({"acc": 0.8, "wp": 0.8, "wr": 0.8, "wfs": 0.8, "ba": 0.8, "auc": 0.85, "kappa": 0.6})
    reports = [write_text(tmp_path / f"r{k}.json", report) for k in range(5)]
    assert main(ensemble_args(d, preds, tmp_path / "s", "sap")) == 0
    for scheme in ("acc", "auc", "f1", "kappa"):
        out = tmp_path / scheme
        assert main(ensemble_args(d, preds, out, scheme, reports)) == 0
        assert (out / "fused.csv").read_bytes() == (tmp_path / "s" / "fused.csv").read_bytes()


def test_ensemble_kappa_is_at_least_worst_candidate(tmp_path):
    d = synth(tmp_path, [0.6, 0.75, 0.95], n_pos=300, n_neg=200, seed=8)
    preds = sorted(d.glob("model*.csv"))
    val_dir = synth(tmp_path / "val", [0.6, 0.75, 0.95], n_pos=300, n_neg=200, seed=9)
    reports, accs = [], []
    for k, p in enumerate(preds):
        vout = tmp_path / f"v{k}"
        assert main(["evaluate", "--labels", str(val_dir / "labels.csv"), "--pred", str(val_dir / p.name),
                     "--positive-class", "all", "--out", str(vout)]) == 0
        reports.append(vout / "report.json")
        tout = tmp_path / f"t{k}"
        assert main(["evaluate", "--labels", str(d / "labels.csv"), "--pred", str(p), "--positive-class", "all", "--out", str(tout)]) == 0
        accs.append(json.loads((tout / "report.json").read_text())["acc"])
    out = tmp_path / "ens"
    assert main(ensemble_args(d, preds, out, "kappa", reports)) == 0
    assert json.loads((out / "report.json").read_text())["acc"] >= min(accs)


def test_ensemble_needs_two_candidates(tmp_path):
    d = synth(tmp_path, [0.8])
    assert main(ensemble_args(d, [d / "model1.csv"], tmp_path / "o")) == 5


def test_ensemble_degenerate_weights(tmp_path):
    d = synth(tmp_path, [0.8, 0.8])
    zero = json.dumps({"acc": 0.5, "wp": 0, "wr": 0, "wfs": 0, "ba": 0, "auc": 0, "kappa": -0.2})
    reports = [write_text(tmp_path / f"z{k}.json", zero) for k in range(2)]
    out = tmp_path / "o"
    assert main(ensemble_args(d, sorted(d.glob("model*.csv")), out, "kappa", reports)) == 6
    assert not out.exists()


def test_roc_perfect_tied_and_random(tmp_path, capsys, rng):
    lp = write_text(tmp_path / "labels.csv", "a,hem\nb,hem\nc,all\nd,all\n")
    perfect = write_text(tmp_path / "p.csv", "example_id,p_hem,p_all\na,0.9,0.1\nb,0.8,0.2\nc,0.3,0.7\nd,0.1,0.9\n")
    tied = write_text(tmp_path / "t.csv", "example_id,p_hem,p_all\na,0.5,0.5\nb,0.5,0.5\nc,0.5,0.5\nd,0.5,0.5\n")
    assert main(["roc", "--labels", str(lp), "--pred", str(perfect), "--positive-class", "all", "--out", str(tmp_path / "r1")]) == 0
    assert capsys.readouterr().out.strip() == "AUC 1.000"
    assert main(["roc", "--labels", str(lp), "--pred", str(tied), "--positive-class", "all", "--out", str(tmp_path / "r2")]) == 0
    assert capsys.readouterr().out.strip() == "AUC 0.500"
    rows = (tmp_path / "r2" / "roc.csv").read_text().splitlines()
    assert rows == ["fpr,tpr", "0.0,0.0", "1.0,1.0"]

    d = synth(tmp_path, [0.8], n_pos=150, n_neg=100)
    capsys.readouterr()
    assert main(["roc", "--labels", str(d / "labels.csv"), "--pred", str(d / "model1.csv"),
                 "--positive-class", "all", "--out", str(tmp_path / "r3")]) == 0
    labels = datapipe.load_labels(d / "labels.csv")
    pset = datapipe.load_predictions(d / "model1.csv", labels)
    s = pset.aligned_to(labels)[:, 1]
    assert capsys.readouterr().out.strip() == f"AUC {synthlab.oracle_auc(s, labels.labels == 1):.3f}"
    pts = np.loadtxt(tmp_path / "r3" / "roc.csv", delimiter=",", skiprows=1)
    assert abs(np.trapezoid(pts[:, 1], pts[:, 0]) - auc_score(s, labels.labels == 1)) <= 1e-12


def test_rebalance_2703_5822(tmp_path, capsys):
    lines = [f"h{i},hem\n" for i in range(2703)] + [f"a{i},all\n" for i in range(5822)]
    lp = write_text(tmp_path / "labels.csv", "".join(lines))
    plan = tmp_path / "plan.csv"
    assert main(["rebalance", "--labels", str(lp), "--seed", "4", "--out", str(plan)]) == 0
    out = capsys.readouterr().out
    assert "hem: 5822" in out and "all: 5822" in out and "total: 11644" in out
    first = plan.read_bytes()
    assert main(["rebalance", "--labels", str(lp), "--seed", "4", "--out", str(plan)]) == 0
    assert plan.read_bytes() == first
    assert sum(datapipe.load_oversample_plan(plan).replications.values()) == 11644


def test_split_deterministic_and_class_fractions(tmp_path, capsys):
    lines = [f"h{i},hem\n" for i in range(50)] + [f"a{i},all\n" for i in range(80)]
    lp = write_text(tmp_path / "labels.csv", "".join(lines))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["split", "--labels", str(lp), "--fraction", "0.2", "--seed", "7", "--out", str(a)]) == 0
    assert main(["split", "--labels", str(lp), "--fraction", "0.2", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    capsys.readouterr()
    assert main(["split", "--labels", str(lp), "--class-fraction", "hem=0.5", "--class-fraction", "all=0.25",
                 "--seed", "7", "--out", str(b)]) == 0
    out = capsys.readouterr().out
    assert "hem: train 25, validation 25" in out and "all: train 60, validation 20" in out


def test_split_stratification_error(tmp_path):
    lp = write_text(tmp_path / "labels.csv", "a,hem\nb,all\nc,all\n")
    assert main(["split", "--labels", str(lp), "--fraction", "0.5", "--out", str(tmp_path / "s.csv")]) == 7


def test_lr_schedule_stdout_and_file(tmp_path, capsys):
    assert main(["lr-schedule", "--step-size", "600", "--total", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "iteration,lr" and float(lines[1].split(",")[1]) == 1e-7
    out = tmp_path / "lr.csv"
    assert main(["lr-schedule", "--iter-per-epoch", "100", "--total", "7200", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 7201 and float(rows[601].split(",")[1]) == pytest.approx(2e-3, rel=1e-15)


def test_lr_schedule_requires_step(capsys):
    assert main(["lr-schedule", "--total", "3"]) == 1


def test_synth_writes_expected_files(tmp_path):
    d = synth(tmp_path, [0.7, 0.9])
    assert sorted(p.name for p in d.iterdir()) == ["labels.csv", "model1.csv", "model2.csv"]
    labels = datapipe.load_labels(d / "labels.csv")
    assert labels.class_counts().tolist() == [40, 60]


def test_format_closure_and_rerun_identity(tmp_path, capsys):
    d = synth(tmp_path, [0.7, 0.8, 0.9])
    preds = sorted(d.glob("model*.csv"))
    out = tmp_path / "ens"
    assert main(ensemble_args(d, preds, out)) == 0
    snapshot = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(ensemble_args(d, preds, out)) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == snapshot
    capsys.readouterr()
    code = main(["evaluate", "--labels", str(d / "labels.csv"), "--pred", str(out / "fused.csv"),
                 "--positive-class", "all", "--out", str(tmp_path / "re")])
    assert code == 0 and capsys.readouterr().err == ""
    ens_report = json.loads((out / "report.json").read_text())
    re_report = json.loads((tmp_path / "re" / "report.json").read_text())
    assert ens_report["acc"] == re_report["acc"] and ens_report["auc"] == re_report["auc"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wensemble", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
