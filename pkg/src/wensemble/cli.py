"""Command-line entry point: ``wensemble <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 parse, 4 alignment, 5 arity,
6 undefined metric or degenerate weights, 7 stratification, 1 other.
Outputs are staged to temporary files and renamed into place only after
every output of the command has been computed, so a failing run leaves no
partial results.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile

from wensemble import __version__, datapipe, ensemble, lrsched, metrics, synthlab
from wensemble.errors import AlignmentError, WensembleError

REPORT_SCHEMA = "wensemble.metric_report/1"
EXIT_KEY = AlignmentError.exit_code


class Outputs:
    """Files to write, committed together."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.files = {}

    def add(self, name, content):
        path = name if self.out_dir is None else os.path.join(self.out_dir, name)
        self.files[path] = content
        return path

    def commit(self):
        staged = []
        try:
            for path, content in self.files.items():
                parent = os.path.dirname(path) or "."
                os.makedirs(parent, exist_ok=True)
                fd, tmp = tempfile.mkstemp(dir=parent, prefix=".tmp-", suffix=os.path.basename(path))
                staged.append((tmp, path))
                mode = "wb" if isinstance(content, bytes) else "w"
                kwargs = {} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"}
                with os.fdopen(fd, mode, **kwargs) as fh:
                    fh.write(content)
        except BaseException:
            for tmp, _ in staged:
                if os.path.exists(tmp):
                    os.unlink(tmp)
            raise
        for tmp, path in staged:
            os.replace(tmp, path)


def _load_eval_inputs(labels_path, pred_path):
    classes = datapipe.read_prediction_classes(pred_path)
    labels = datapipe.load_labels(labels_path, class_names=_label_order(labels_path, classes))
    preds = datapipe.load_predictions(pred_path, labels)
    return labels, preds


def _label_order(labels_path, pred_classes):
    """Class order for the labels file: its own declaration if any, else the prediction header's."""
    declared = None
    with open(labels_path, encoding="utf-8") as fh:
        for line in fh:
            if line.lower().startswith(datapipe.CLASS_DIRECTIVE):
                declared = [c.strip() for c in line[len(datapipe.CLASS_DIRECTIVE):].split(",") if c.strip()]
                break
            if line.strip() and not line.startswith("#"):
                break
    if declared is not None:
        if sorted(declared) != sorted(pred_classes):
            raise AlignmentError(
                f"{labels_path}: declared classes {declared} do not match prediction classes {pred_classes}"
            )
        return declared
    return pred_classes


def report_json(report: metrics.MetricReport, cm: metrics.ConfusionMatrix | None = None):
    d = {"schema": REPORT_SCHEMA, **report.to_dict()}
    if cm is not None:
        d["confusion"] = cm.tolist()
    return json.dumps(d, indent=2) + "\n"


def load_report(path) -> metrics.MetricReport:
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise datapipe.ParseError(f"invalid JSON: {exc}", os.fspath(path), exc.lineno) from None
    return metrics.MetricReport.from_dict(d)


def confusion_csv(cm: metrics.ConfusionMatrix):
    lines = ["actual\\predicted," + ",".join(cm.class_names)]
    for name, row in zip(cm.class_names, cm.counts):
        lines.append(name + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def _evaluate(labels, preds, positive, model_id=None):
    probs = preds.aligned_to(labels)
    pos = labels.class_index(positive)
    report = metrics.report_from_arrays(labels, probs, pos, model_id or preds.model_id)
    cm = metrics.confusion_from_indices(labels.labels, metrics.argmax_rows(probs), labels.class_names)
    return report, cm


def cmd_evaluate(args):
    labels, preds = _load_eval_inputs(args.labels, args.pred)
    report, cm = _evaluate(labels, preds, args.positive_class)
    out = Outputs(args.out)
    out.add("report.json", report_json(report, cm))
    out.add("confusion.csv", confusion_csv(cm))
    out.commit()
    _print_report(args, report)
    return 0


def _print_report(args, report):
    if args.format == "json":
        print(report_json(report), end="")
    else:
        print(report.render())


def _pair_reports(reports, candidates):
    ids = [c.model_id for c in candidates]
    by_id = {r.model_id: r for r in reports if r.model_id is not None}
    if len(by_id) == len(reports) and set(by_id) == set(ids):
        return by_id
    if len(reports) != len(candidates):
        raise AlignmentError(f"{len(reports)} validation report(s) for {len(candidates)} candidate(s)")
    return dict(zip(ids, reports))


def cmd_ensemble(args):
    scheme = ensemble.Scheme(args.scheme)
    if len(args.pred) < 2:
        raise ensemble.ArityError(f"an ensemble needs at least 2 --pred files, got {len(args.pred)}")
    classes = datapipe.read_prediction_classes(args.pred[0])
    labels = datapipe.load_labels(args.labels, class_names=_label_order(args.labels, classes))
    candidates = [datapipe.load_predictions(p, labels) for p in args.pred]
    for c in candidates:
        c.aligned_to(labels)
    reports = None
    if scheme is not ensemble.Scheme.SAP:
        if not args.val_report:
            raise WensembleError(f"scheme {scheme.value!r} needs --val-report for every --pred")
        reports = _pair_reports([load_report(p) for p in args.val_report], candidates)
    result = ensemble.ensemble(candidates, scheme, reports)
    fused = result.as_prediction_set(args.model_id or f"ensemble_{scheme.value}")
    report, cm = _evaluate(labels, fused, args.positive_class)

    out = Outputs(args.out)
    out.add("fused.csv", datapipe.predictions_text(fused))
    out.add("weights.csv", "model_id,weight\n" + "".join(f"{m},{w!r}\n" for m, w in sorted(result.weights_used.items())))
    out.add("report.json", report_json(report, cm))
    out.add("confusion.csv", confusion_csv(cm))
    out.commit()
    _print_report(args, report)
    return 0


def cmd_roc(args):
    labels, preds = _load_eval_inputs(args.labels, args.pred)
    pos = labels.class_index(args.positive_class)
    probs = preds.aligned_to(labels)
    scores, positive = probs[:, pos], labels.labels == pos
    fpr, tpr = metrics.roc_curve(scores, positive)
    auc = metrics.auc_score(scores, positive)
    out = Outputs(args.out)
    out.add("roc.csv", "fpr,tpr\n" + "".join(f"{f!r},{t!r}\n" for f, t in zip(fpr.tolist(), tpr.tolist())))
    out.commit()
    print(f"AUC {auc:.3f}")
    return 0


def cmd_rebalance(args):
    labels = datapipe.load_labels(args.labels)
    plan = datapipe.oversample_plan(labels, args.seed)
    buf = io.StringIO()
    plan.write(buf)
    out = Outputs(None)
    out.add(args.out, buf.getvalue())
    out.commit()
    for name, total in plan.class_totals(labels).items():
        print(f"{name}: {total}")
    print(f"total: {plan.total}")
    return 0


def _parse_class_fractions(items):
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise WensembleError(f"--class-fraction expects NAME=FRACTION, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise WensembleError(f"bad fraction in {item!r}") from None
    return out


def cmd_split(args):
    labels = datapipe.load_labels(args.labels)
    if args.class_fraction:
        fraction = _parse_class_fractions(args.class_fraction)
    elif args.fraction is not None:
        fraction = args.fraction
    else:
        raise WensembleError("give --fraction or --class-fraction")
    plan = datapipe.stratified_split(labels, fraction, args.seed)
    buf = io.StringIO()
    plan.write(buf)
    out = Outputs(None)
    out.add(args.out, buf.getvalue())
    out.commit()
    val = set(plan.validation_ids)
    for ci, name in enumerate(labels.class_names):
        members = [e for e, c in zip(labels.ids, labels.labels) if c == ci]
        n_val = sum(e in val for e in members)
        print(f"{name}: train {len(members) - n_val}, validation {n_val}")
    return 0


def cmd_lr_schedule(args):
    if args.step_size is not None:
        cfg = lrsched.LrScheduleConfig(args.base, args.max, args.step_size)
    elif args.iter_per_epoch is not None:
        cfg = lrsched.LrScheduleConfig.from_epochs(args.iter_per_epoch, args.epochs_per_step, args.base, args.max)
    else:
        raise WensembleError("give --step-size or --iter-per-epoch")
    buf = io.StringIO()
    lrsched.write_schedule(lrsched.schedule(cfg, args.total), buf)
    if args.out is None:
        sys.stdout.write(buf.getvalue())
    else:
        out = Outputs(None)
        out.add(args.out, buf.getvalue())
        out.commit()
    return 0


def cmd_synth(args):
    names = tuple(c.strip() for c in args.class_names.split(","))
    if len(names) != 2:
        raise WensembleError("--class-names needs exactly two names: negative,positive")
    labels = synthlab.gen_ground_truth(args.n_pos, args.n_neg, args.seed, names)
    out = Outputs(args.out)
    buf = io.StringIO()
    datapipe.write_labels(labels, buf)
    out.add("labels.csv", buf.getvalue())
    for k, skill in enumerate(args.skill):
        model_id = f"{args.prefix}{k + 1}"
        spec = synthlab.SyntheticPredictorSpec(skill, model_id, args.seed)
        out.add(f"{model_id}.csv", datapipe.predictions_text(synthlab.gen_predictor(labels, spec)))
    out.commit()
    print(f"wrote {len(out.files)} file(s) to {args.out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="wensemble", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common_eval(sp):
        sp.add_argument("--labels", required=True)
        sp.add_argument("--positive-class", required=True)
        sp.add_argument("--out", default=".")
        sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("evaluate", help="metric report for one predictions file")
    common_eval(sp)
    sp.add_argument("--pred", required=True)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("ensemble", help="fuse candidate predictions (sap or metric-weighted)")
    common_eval(sp)
    sp.add_argument("--pred", action="append", required=True, help="candidate predictions; repeat")
    sp.add_argument("--val-report", action="append", default=[], help="validation report.json per candidate")
    sp.add_argument("--scheme", choices=[s.value for s in ensemble.Scheme], default="sap")
    sp.add_argument("--model-id", default=None)
    sp.set_defaults(func=cmd_ensemble)

    sp = sub.add_parser("roc", help="ROC points and AUC")
    sp.add_argument("--labels", required=True)
    sp.add_argument("--pred", required=True)
    sp.add_argument("--positive-class", required=True)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_roc)

    sp = sub.add_parser("rebalance", help="random-oversampling plan")
    sp.add_argument("--labels", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="plan file")
    sp.set_defaults(func=cmd_rebalance)

    sp = sub.add_parser("split", help="stratified train/validation plan")
    sp.add_argument("--labels", required=True)
    sp.add_argument("--fraction", type=float)
    sp.add_argument("--class-fraction", action="append", default=[], metavar="CLASS=FRACTION")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="plan file")
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("lr-schedule", help="triangular2 cyclic learning-rate table")
    sp.add_argument("--base", type=float, default=lrsched.DEFAULT_BASE_RATE)
    sp.add_argument("--max", type=float, default=lrsched.DEFAULT_MAX_RATE)
    sp.add_argument("--step-size", type=int)
    sp.add_argument("--iter-per-epoch", type=int)
    sp.add_argument("--epochs-per-step", type=int, default=6)
    sp.add_argument("--total", type=int, required=True)
    sp.add_argument("--out", default=None, help="table file (default stdout)")
    sp.set_defaults(func=cmd_lr_schedule)

    sp = sub.add_parser("synth", help="synthetic labels and predictor outputs")
    sp.add_argument("--n-pos", type=int, required=True)
    sp.add_argument("--n-neg", type=int, required=True)
    sp.add_argument("--skill", type=float, action="append", required=True, help="target AUC; repeat per model")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--prefix", default="model")
    sp.add_argument("--class-names", default=",".join(synthlab.DEFAULT_CLASSES))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WensembleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyError as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_KEY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
