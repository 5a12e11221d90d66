"""Command-line front end.

Subcommands: generate, run, sweep, eval, export-features.  Options may come
from a key=value config file (--config); explicit flags win over the file.
A single --seed determines every downstream artifact.
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import datagen, report
from .data import export_csv, import_csv, prepare
from .errors import FaultAdaptError, InputError, ParseError
from .network import build_network, load_network, save_network
from .training import TrainConfig, adapt, pretrain


def load_config_file(path):
    """Parse a key=value config file ('#' starts a comment)."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}: line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _coerce(text, like):
    if isinstance(like, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(text)
    if isinstance(like, float):
        return float(text)
    return text


_DEFAULTS = {
    "seed": 0, "lam": 1e-2, "mode": "jda", "task": "severity-shift",
    "out": "out", "batch_size": 64, "learning_rate": 0.01,
    "pretrain_epochs": 30, "max_outer_iters": 50, "spectrum": False,
    "unlabeled_pool": 600, "test_pool": 400,
}


def _resolve(args):
    """Merge flag values over config-file values over defaults."""
    cfg_file = {}
    if getattr(args, "config", None):
        cfg_file = load_config_file(args.config)
    for key, default in _DEFAULTS.items():
        if getattr(args, key, None) is None:
            if key in cfg_file:
                setattr(args, key, _coerce(cfg_file[key], default))
            else:
                setattr(args, key, default)
    return args


def _train_config(args, mode=None):
    return TrainConfig(learning_rate=args.learning_rate,
                       batch_size=args.batch_size,
                       pretrain_epochs=args.pretrain_epochs,
                       max_outer_iters=args.max_outer_iters,
                       lam=args.lam,
                       mode=mode or ("jda" if args.mode == "none" else args.mode),
                       seed=args.seed)


def _ensure_outdir(path):
    os.makedirs(path, exist_ok=True)
    return path


def cmd_generate(args):
    task = datagen.stock_task(args.task, seed=args.seed,
                              unlabeled_pool=args.unlabeled_pool,
                              test_pool=args.test_pool)
    src, tgt_u, tgt_test = datagen.make_transfer_task(task)
    out = _ensure_outdir(args.out)
    export_csv(src, os.path.join(out, "source.csv"))
    export_csv(tgt_u, os.path.join(out, "target_unlabeled.csv"))
    export_csv(tgt_test, os.path.join(out, "target_test.csv"))
    print(f"wrote source/target_unlabeled/target_test CSVs to {out}")
    return 0


def _load_task_data(args):
    """Datasets for run/sweep: a stock task or explicit CSV paths.

    Exactly one data source must be given."""
    csv_mode = args.source_csv is not None or args.target_csv is not None
    if csv_mode and args.task_given:
        raise InputError("give either --task or CSV paths, not both")
    if csv_mode:
        if args.source_csv is None or args.target_csv is None:
            raise InputError("CSV input needs both --source-csv and --target-csv")
        src = import_csv(args.source_csv, domain="source")
        tgt_u = import_csv(args.target_csv, domain="target")
        if tgt_u.labeled:
            tgt_u = tgt_u.without_labels()
        tgt_test = (import_csv(args.test_csv, domain="target-test")
                    if args.test_csv else None)
        return src, tgt_u, tgt_test, None
    task = datagen.stock_task(args.task, seed=args.seed,
                              unlabeled_pool=args.unlabeled_pool,
                              test_pool=args.test_pool)
    src, tgt_u, tgt_test = datagen.make_transfer_task(task)
    return src, tgt_u, tgt_test, task


def cmd_run(args):
    src_raw, tgt_u_raw, tgt_test_raw, task = _load_task_data(args)
    src = prepare(src_raw, args.spectrum)
    tgt_u = prepare(tgt_u_raw, args.spectrum)
    tgt_test = None if tgt_test_raw is None else prepare(tgt_test_raw, args.spectrum)

    n_classes = int(src.require_labels().max()) + 1
    cfg = _train_config(args)
    net = build_network(src.window_len, n_classes, seed=args.seed)
    net, pre_hist = pretrain(net, src, cfg)

    adapted = args.mode != "none"
    history = None
    if adapted:
        net, history = adapt(net, src, tgt_u, cfg, tgt_test)

    summary = {
        "task": task.name if task else "csv",
        "seed": args.seed,
        "mode": args.mode,
        "lambda": repr(args.lam),
        "learning_rate": repr(args.learning_rate),
        "batch_size": args.batch_size,
        "pretrain_epochs": args.pretrain_epochs,
        "adaptation": "done" if adapted else "skipped",
        "outer_iterations": 0 if history is None else len(history),
        "final_pretrain_ce": repr(pre_hist[-1]["ce"]) if pre_hist else "",
    }
    out = _ensure_outdir(args.out)
    if tgt_test is not None:
        acc, cm = report.evaluate(net, tgt_test)
        summary["target_test_accuracy_pct"] = f"{100 * acc:.1f}"
        report.export_confusion(cm, os.path.join(out, "confusion.csv"))
    if history is not None:
        report.export_history(history, os.path.join(out, "history.csv"))
    save_network(net, os.path.join(out, "model.npz"))
    report.write_summary(summary, os.path.join(out, "summary.txt"))
    print(f"run complete; reports in {out}")
    return 0


def cmd_sweep(args):
    grid = ([float(v) for v in args.lambdas.split(",")]
            if args.lambdas else list(TrainConfig.LAMBDA_GRID))
    if not grid:
        raise InputError("lambda grid must be non-empty")
    seeds = [int(s) for s in args.seeds.split(",")]
    methods = tuple(args.methods.split(","))
    task = datagen.stock_task(args.task, seed=args.seed,
                              unlabeled_pool=args.unlabeled_pool,
                              test_pool=args.test_pool)
    out = _ensure_outdir(args.out)
    lines = [f"task={task.name}", f"grid={','.join(repr(v) for v in grid)}"]
    reports = []
    for lam in grid:
        cfg = replace(_train_config(args, mode="jda"), lam=lam)
        rep = report.run_comparison(task, methods, seeds, cfg,
                                    spectrum=args.spectrum)
        reports.append((lam, rep))
        for m in methods:
            lines.append(
                f"mean_accuracy_pct[lambda={lam!r}][{m}]="
                f"{100 * rep.mean(m):.1f}")
    report.write_summary(lines, os.path.join(out, "sweep_summary.txt"))
    print(f"sweep complete; summary in {out}")
    return 0


def cmd_eval(args):
    net = load_network(args.model)
    ds = prepare(import_csv(args.data), args.spectrum)
    acc, cm = report.evaluate(net, ds)
    out = _ensure_outdir(args.out)
    report.export_confusion(cm, os.path.join(out, "confusion.csv"))
    report.write_summary({"accuracy_pct": f"{100 * acc:.1f}"},
                         os.path.join(out, "eval_summary.txt"))
    print(f"accuracy {100 * acc:.1f}%; reports in {out}")
    return 0


def cmd_export_features(args):
    net = load_network(args.model)
    datasets = []
    for path in args.data:
        tag = os.path.splitext(os.path.basename(path))[0]
        datasets.append((tag, prepare(import_csv(path, domain=tag),
                                      args.spectrum)))
    report.export_features(net, datasets, args.out_file)
    print(f"wrote features to {args.out_file}")
    return 0


def _add_common(p):
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--spectrum", action="store_const", const=True,
                   help="feed magnitude spectra instead of raw windows")


def _add_training(p):
    p.add_argument("--lambda", dest="lam", type=float,
                   help="adaptation penalty weight")
    p.add_argument("--mode", choices=["mda", "jda", "none"])
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--pretrain-epochs", type=int)
    p.add_argument("--max-outer-iters", type=int)


def _add_task(p):
    p.add_argument("--task", help="stock task name")
    p.add_argument("--unlabeled-pool", type=int)
    p.add_argument("--test-pool", type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="faultadapt",
        description="Domain-adaptive fault diagnosis on 1-D signals")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a stock task's datasets as CSV")
    _add_common(p)
    _add_task(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="pretrain, adapt and evaluate one run")
    _add_common(p)
    _add_task(p)
    _add_training(p)
    p.add_argument("--source-csv")
    p.add_argument("--target-csv")
    p.add_argument("--test-csv")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="lambda grid x seeds comparison sweep")
    _add_common(p)
    _add_task(p)
    _add_training(p)
    p.add_argument("--lambdas", help="comma-separated lambda grid")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--methods", default=",".join(report.ALL_METHODS))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="evaluate a saved model on a labeled CSV")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-features",
                       help="dump feature-layer activations for datasets")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--out-file", default="features.csv")
    p.set_defaults(func=cmd_export_features)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.task_given = args.__dict__.get("task") is not None
    try:
        _resolve(args)
        return args.func(args)
    except (FaultAdaptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
