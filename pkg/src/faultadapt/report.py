"""Evaluation, the three-method comparison, and CSV/summary exports.

All files are written atomically (temp file + rename) and contain nothing
non-deterministic, so identical configs and seeds reproduce them byte for
byte.
"""

import csv
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .adaptation import JDA, MDA
from .data import Dataset, prepare
from .datagen import TransferTask, make_transfer_task
from .errors import InputError
from .network import build_network
from .training import TrainConfig, adapt, pretrain

METHOD_CNN = "cnn"
METHOD_MDA = "dtn-mda"
METHOD_JDA = "dtn-jda"
ALL_METHODS = (METHOD_CNN, METHOD_MDA, METHOD_JDA)


@dataclass
class ConfusionMatrix:
    """Per-class prediction counts; row i holds predictions for true class i."""

    counts: np.ndarray

    @property
    def n_classes(self):
        return self.counts.shape[0]

    @property
    def support(self):
        return self.counts.sum(axis=1)

    def normalized(self):
        """Row-normalized matrix; zero-support rows are returned as None."""
        rows = []
        for i in range(self.n_classes):
            total = self.counts[i].sum()
            rows.append(None if total == 0 else self.counts[i] / total)
        return rows

    def accuracy(self):
        total = self.counts.sum()
        return float(np.trace(self.counts) / total) if total else 0.0


def evaluate(net, labeled: Dataset):
    """(accuracy, confusion matrix) of the network on a labeled dataset."""
    y = labeled.require_labels()
    pred = net.predict(labeled.X)
    C = net.layers[-1].out_features
    counts = np.zeros((C, C), dtype=np.int64)
    np.add.at(counts, (y, pred), 1)
    cm = ConfusionMatrix(counts)
    acc = float(np.mean(pred == y))
    return acc, cm


@dataclass
class ComparisonReport:
    """Per-method target-test accuracies over seeds, for one transfer task."""

    task: str
    methods: tuple
    seeds: tuple
    cfg: TrainConfig
    cells: dict = field(default_factory=dict)  # method -> [accuracy per seed]

    def add(self, method, accuracy):
        self.cells.setdefault(method, []).append(float(accuracy))

    def mean(self, method):
        return float(np.mean(self.cells[method]))

    def std(self, method):
        return float(np.std(self.cells[method]))

    def summary_lines(self):
        lines = [f"task={self.task}",
                 f"seeds={','.join(str(s) for s in self.seeds)}",
                 f"lambda={self.cfg.lam!r}",
                 f"learning_rate={self.cfg.learning_rate!r}",
                 f"batch_size={self.cfg.batch_size}"]
        for m in self.methods:
            accs = ",".join(f"{100 * a:.1f}" for a in self.cells[m])
            lines.append(f"accuracy_pct[{m}]={accs}")
            lines.append(f"mean_accuracy_pct[{m}]={100 * self.mean(m):.1f}")
            lines.append(f"std_accuracy_pct[{m}]={100 * self.std(m):.1f}")
        return lines


def run_comparison(task: TransferTask, methods, seeds, cfg: TrainConfig,
                   spectrum=False):
    """Train and score each requested method for every seed.

    Per seed a single network is pretrained on source; the adapted variants
    branch from a copy of that same pretrained network.
    """
    for m in methods:
        if m not in ALL_METHODS:
            raise InputError(f"unknown method {m!r}; known: {ALL_METHODS}")
    src_raw, tgt_u_raw, tgt_test_raw = make_transfer_task(task)
    src = prepare(src_raw, spectrum)
    tgt_u = prepare(tgt_u_raw, spectrum)
    tgt_test = prepare(tgt_test_raw, spectrum)

    report = ComparisonReport(task.name, tuple(methods), tuple(seeds), cfg)
    for seed in seeds:
        scfg = replace(cfg, seed=seed)
        net = build_network(src.window_len, task.source.n_classes, seed=seed)
        net, _ = pretrain(net, src, scfg)
        if METHOD_CNN in methods:
            report.add(METHOD_CNN, evaluate(net, tgt_test)[0])
        if METHOD_MDA in methods:
            adapted, _ = adapt(net.copy(), src, tgt_u,
                               replace(scfg, mode=MDA), tgt_test)
            report.add(METHOD_MDA, evaluate(adapted, tgt_test)[0])
        if METHOD_JDA in methods:
            adapted, _ = adapt(net.copy(), src, tgt_u,
                               replace(scfg, mode=JDA), tgt_test)
            report.add(METHOD_JDA, evaluate(adapted, tgt_test)[0])
    return report


def _atomic_writer(path):
    return open(f"{path}.tmp", "w", newline="")


def _commit(path):
    os.replace(f"{path}.tmp", path)


def export_features(net, datasets, path):
    """One row per sample: domain tag, true label (-1 when unknown), then the
    feature-layer activations.  `datasets` is a list of (tag, Dataset)."""
    with _atomic_writer(path) as fh:
        w = csv.writer(fh)
        first = datasets[0][1] if datasets else None
        width = net.features(first.X[:1]).shape[1] if first is not None else 0
        w.writerow(["domain", "label"] + [f"f{i}" for i in range(width)])
        for tag, ds in datasets:
            feats = net.features(ds.X)
            labels = ds.y if ds.y is not None else np.full(len(ds), -1)
            for i in range(len(ds)):
                w.writerow([tag, int(labels[i])]
                           + [repr(float(v)) for v in feats[i]])
    _commit(path)


def export_history(history, path):
    """Per-iteration loss breakdown and accuracy as CSV."""
    with _atomic_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "ce", "marginal", "conditional", "total",
                    "test_accuracy", "pseudo_changes"])
        for i in range(len(history)):
            acc = history.test_accuracy[i]
            w.writerow([i, repr(history.ce[i]), repr(history.marginal[i]),
                        repr(history.conditional[i]),
                        repr(history.penalty_total[i]),
                        "" if acc is None else repr(acc),
                        history.pseudo_changes[i]])
    _commit(path)


def export_confusion(cm: ConfusionMatrix, path):
    """Row-normalized confusion matrix; zero-support rows marked explicitly."""
    with _atomic_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(["true_class"] + [f"pred_{j}" for j in range(cm.n_classes)])
        for i, row in enumerate(cm.normalized()):
            if row is None:
                w.writerow([i] + ["no-support"] * cm.n_classes)
            else:
                w.writerow([i] + [f"{v:.6f}" for v in row])
    _commit(path)


def write_summary(lines_or_mapping, path):
    """Key-value run summary in plain text."""
    if isinstance(lines_or_mapping, dict):
        lines = [f"{k}={v}" for k, v in lines_or_mapping.items()]
    else:
        lines = list(lines_or_mapping)
    with _atomic_writer(path) as fh:
        fh.write("\n".join(lines) + "\n")
    _commit(path)
