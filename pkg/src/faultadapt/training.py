"""Source pretraining and the pseudo-label adaptation loop.

Adaptation runs an outer loop: refresh pseudo labels on the full target pool,
then take one epoch of SGD steps over paired source/target batches minimizing
source cross-entropy plus the weighted distribution penalty (injected at the
feature layer), until the pseudo labels reach a fixpoint, the objective stops
moving, or the iteration cap is hit.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .adaptation import JDA, MDA, FeatureBatch, jda_penalty
from .errors import InputError, TrainingAborted
from .network import softmax_cross_entropy


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 64
    pretrain_epochs: int = 30
    max_outer_iters: int = 50
    steps_per_outer: int | None = None   # None = one full epoch of paired batches
    lam: float = 1e-2
    mode: str = JDA
    seed: int = 0
    stop_on_fixpoint: bool = True
    objective_tol: float = 1e-6

    # lambda values searched by the sweep command
    LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 5e-2, 1e-1, 5e-1, 1.0)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InputError("learning rate must be > 0")
        if self.lam < 0:
            raise InputError("lambda must be >= 0")
        if self.batch_size < 1:
            raise InputError("batch size must be >= 1")
        if self.mode not in (MDA, JDA):
            raise InputError(f"mode must be '{MDA}' or '{JDA}'")


@dataclass
class AdaptHistory:
    """Per-outer-iteration training record."""

    ce: list = field(default_factory=list)
    marginal: list = field(default_factory=list)
    conditional: list = field(default_factory=list)
    penalty_total: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    test_accuracy: list = field(default_factory=list)  # None when no test pool
    pseudo_changes: list = field(default_factory=list)

    def append(self, **kv):
        for name, value in kv.items():
            getattr(self, name).append(value)

    def __len__(self):
        return len(self.ce)


def pretrain(net, src, cfg: TrainConfig):
    """Mini-batch SGD on source cross-entropy; returns (net, epoch history)."""
    y = src.require_labels()
    rng = np.random.default_rng((cfg.seed, 0))
    history = []
    n = len(src)
    for epoch in range(cfg.pretrain_epochs):
        perm = rng.permutation(n)
        losses = []
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            logits, _, cache = net.forward(src.X[idx])
            loss, dlogits = softmax_cross_entropy(logits, y[idx])
            if not np.isfinite(loss):
                raise TrainingAborted(f"non-finite loss in pretrain epoch {epoch}")
            net.sgd_step(net.backward(cache, dlogits), cfg.learning_rate)
            losses.append(loss)
        acc = float(np.mean(net.predict(src.X) == y))
        history.append({"epoch": epoch, "ce": float(np.mean(losses)),
                        "train_accuracy": acc})
    return net, history


def make_batches(src, tgt, batch_size, seed):
    """Paired source/target mini-batches for one adaptation epoch.

    The smaller pool is resampled with replacement up to the larger pool's
    size; equal-size pools are only permuted, so every sample appears exactly
    once.  Both index streams are then cut into aligned batches, dropping the
    trailing remainder.  `seed` may be an int or a tuple (the adaptation loop
    uses (cfg.seed, outer_iteration)).
    """
    if len(src) == 0 or len(tgt) == 0:
        raise InputError("both datasets must be non-empty")
    rng = np.random.default_rng(seed)
    n = max(len(src), len(tgt))

    def draw(m):
        if m == n:
            return rng.permutation(m)
        return rng.integers(0, m, size=n)

    si, ti = draw(len(src)), draw(len(tgt))
    b = min(batch_size, n)
    return [(si[k * b:(k + 1) * b], ti[k * b:(k + 1) * b])
            for k in range(n // b)]


def _add_grads(a, b):
    for ga, gb in zip(a, b):
        for name in ga:
            ga[name] = ga[name] + gb[name]
    return a


def adapt(net, src, tgt_unlabeled, cfg: TrainConfig, tgt_test=None):
    """Algorithm: pseudo-label refresh + penalized SGD until fixpoint.

    Cross-entropy is computed on source halves only (target has no labels);
    the penalty uses the pool-level pseudo labels assigned at the start of
    each outer iteration.
    """
    ys = src.require_labels()
    if tgt_unlabeled.labeled:
        raise InputError("target adaptation pool must be unlabeled")
    n_classes = net.layers[-1].out_features
    if cfg.batch_size < n_classes:
        warnings.warn(
            f"batch size {cfg.batch_size} below class count {n_classes}; "
            "conditional terms will often be skipped", stacklevel=2)

    history = AdaptHistory()
    pseudo_prev = None
    obj_prev = None
    for it in range(cfg.max_outer_iters):
        pseudo = net.predict(tgt_unlabeled.X)
        changes = (len(pseudo) if pseudo_prev is None
                   else int(np.sum(pseudo != pseudo_prev)))

        batches = make_batches(src, tgt_unlabeled, cfg.batch_size,
                               seed=(cfg.seed, it))
        if cfg.steps_per_outer is not None:
            batches = batches[:cfg.steps_per_outer]

        ce_vals, marg_vals, cond_vals, tot_vals = [], [], [], []
        for si, ti in batches:
            logits_s, feat_s, cache_s = net.forward(src.X[si])
            ce, dlogits = softmax_cross_entropy(logits_s, ys[si])
            _, feat_t, cache_t = net.forward(tgt_unlabeled.X[ti])
            pen = jda_penalty(FeatureBatch(feat_s, ys[si], "source"),
                              FeatureBatch(feat_t, pseudo[ti], "target"),
                              cfg.mode, n_classes)
            if not (np.isfinite(ce) and np.isfinite(pen.total)):
                raise TrainingAborted(
                    f"non-finite objective at outer iteration {it}")
            if cfg.lam > 0:
                grads = net.backward(cache_s, dlogits,
                                     dfeatures=cfg.lam * pen.dfeatures_source)
                zeros = np.zeros((len(ti), n_classes))
                grads_t = net.backward(cache_t, zeros,
                                       dfeatures=cfg.lam * pen.dfeatures_target)
                grads = _add_grads(grads, grads_t)
            else:
                grads = net.backward(cache_s, dlogits)
            net.sgd_step(grads, cfg.learning_rate)
            ce_vals.append(ce)
            marg_vals.append(pen.marginal_mmd2)
            cond_vals.append(pen.conditional_sum)
            tot_vals.append(pen.total)

        obj = float(np.mean(ce_vals) + cfg.lam * np.mean(tot_vals))
        test_acc = None
        if tgt_test is not None:
            test_acc = float(np.mean(
                net.predict(tgt_test.X) == tgt_test.require_labels()))
        history.append(ce=float(np.mean(ce_vals)),
                       marginal=float(np.mean(marg_vals)),
                       conditional=float(np.mean(cond_vals)),
                       penalty_total=float(np.mean(tot_vals)),
                       objective=obj,
                       test_accuracy=test_acc,
                       pseudo_changes=changes)

        if cfg.stop_on_fixpoint and pseudo_prev is not None and changes == 0:
            break
        if obj_prev is not None and abs(obj - obj_prev) < cfg.objective_tol:
            break
        pseudo_prev = pseudo
        obj_prev = obj
    return net, history
