"""Distribution-mismatch penalties on feature batches and their gradients.

The discrepancy between two sample sets is the squared Euclidean distance of
their feature means; the feature map is the network's own nonlinear transform,
so no parameterized kernel is involved.  The joint penalty sums the marginal
term and one conditional term per class, the latter restricted to samples
carrying that (true or pseudo) label.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError

MDA = "mda"
JDA = "jda"


@dataclass
class FeatureBatch:
    """Features with per-sample labels (true for source, pseudo for target)."""

    features: np.ndarray  # (n, F)
    labels: np.ndarray    # (n,)
    domain: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or len(self.features) == 0:
            raise InputError("feature batch must be a non-empty 2-D array")
        if self.labels.shape != (len(self.features),):
            raise InputError("labels must align with features")


@dataclass
class PenaltyResult:
    """Penalty value broken into terms, plus per-sample feature gradients.

    conditional_mmd2[c] is None when class c is absent from either domain's
    batch (skipped: the per-class mean is undefined on an empty set)."""

    marginal_mmd2: float
    conditional_mmd2: list
    total: float
    dfeatures_source: np.ndarray
    dfeatures_target: np.ndarray

    @property
    def conditional_sum(self):
        return float(sum(v for v in self.conditional_mmd2 if v is not None))


def marginal_mmd2(src: FeatureBatch, tgt: FeatureBatch):
    """Squared distance of feature means, with per-sample gradients.

    Source-sample gradient is (2/n_s)(mean_s - mean_t); target-sample gradient
    the negative counterpart scaled by its own pool size.
    """
    _check_widths(src, tgt)
    diff = src.features.mean(axis=0) - tgt.features.mean(axis=0)
    value = float(diff @ diff)
    gs = np.tile(2.0 / len(src.features) * diff, (len(src.features), 1))
    gt = np.tile(-2.0 / len(tgt.features) * diff, (len(tgt.features), 1))
    return value, gs, gt


def conditional_mmd2(src: FeatureBatch, tgt: FeatureBatch, c):
    """Mean-distance term restricted to class c, or None when c is absent
    from either batch.

    Returned gradients are full-batch-shaped, zero outside class-c rows.
    """
    _check_widths(src, tgt)
    ms = src.labels == c
    mt = tgt.labels == c
    ns, nt = int(ms.sum()), int(mt.sum())
    if ns == 0 or nt == 0:
        return None
    diff = src.features[ms].mean(axis=0) - tgt.features[mt].mean(axis=0)
    value = float(diff @ diff)
    gs = np.zeros_like(src.features)
    gt = np.zeros_like(tgt.features)
    gs[ms] = 2.0 / ns * diff
    gt[mt] = -2.0 / nt * diff
    return value, gs, gt


def jda_penalty(src: FeatureBatch, tgt: FeatureBatch, mode, n_classes):
    """Combined penalty: marginal term plus (in jda mode) one conditional term
    per class; mda mode omits the conditional terms entirely."""
    if mode not in (MDA, JDA):
        raise InputError(f"unknown adaptation mode: {mode!r}")
    value, gs, gt = marginal_mmd2(src, tgt)
    cond = [None] * n_classes
    if mode == JDA:
        for c in range(n_classes):
            out = conditional_mmd2(src, tgt, c)
            if out is None:
                continue
            v, cgs, cgt = out
            cond[c] = v
            gs = gs + cgs
            gt = gt + cgt
    total = value + sum(v for v in cond if v is not None)
    return PenaltyResult(value, cond, float(total), gs, gt)


def assign_pseudo_labels(net, dataset):
    """Predicted class per target sample, used as its pseudo label."""
    return net.predict(dataset.X)


def _check_widths(src, tgt):
    if src.features.shape[1] != tgt.features.shape[1]:
        raise InputError(
            f"feature widths differ: {src.features.shape[1]} vs "
            f"{tgt.features.shape[1]}")
