import numpy as np
import pytest

from faultadapt.adaptation import (JDA, MDA, FeatureBatch, assign_pseudo_labels,
                                   conditional_mmd2, jda_penalty, marginal_mmd2)
from faultadapt.data import Dataset
from faultadapt.errors import InputError
from faultadapt.network import build_network

from helpers import max_rel_err, numeric_grad


def fb(features, labels=None, domain=""):
    features = np.asarray(features, dtype=np.float64)
    if labels is None:
        labels = np.zeros(len(features), dtype=np.int64)
    return FeatureBatch(features, np.asarray(labels), domain)


def random_fb(rng, n, width, n_classes=3, domain=""):
    return fb(rng.standard_normal((n, width)),
              rng.integers(0, n_classes, size=n), domain)


def test_marginal_identical_sets_zero():
    x = np.random.default_rng(0).standard_normal((6, 4))
    value, gs, gt = marginal_mmd2(fb(x), fb(x))
    assert value <= 1e-12
    assert np.allclose(gs, 0.0) and np.allclose(gt, 0.0)


def test_marginal_mean_difference_arithmetic():
    src = fb([[0.0, 0.0], [4.0, 0.0]])
    tgt = fb([[1.0, 0.0], [1.0, 0.0]])
    value, gs, gt = marginal_mmd2(src, tgt)
    assert value == pytest.approx(1.0, abs=1e-14)
    # per-sample gradients: (2/n_s)(mean_s - mean_t) and the negative for target
    assert np.allclose(gs, [[1.0, 0.0], [1.0, 0.0]])
    assert np.allclose(gt, [[-1.0, 0.0], [-1.0, 0.0]])


def test_marginal_symmetry():
    rng = np.random.default_rng(1)
    a, b = fb(rng.standard_normal((5, 3))), fb(rng.standard_normal((8, 3)))
    assert marginal_mmd2(a, b)[0] == pytest.approx(marginal_mmd2(b, a)[0],
                                                   rel=1e-14)


def test_marginal_nonnegative_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = fb(rng.standard_normal((rng.integers(1, 9), 4)))
        b = fb(rng.standard_normal((rng.integers(1, 9), 4)))
        assert marginal_mmd2(a, b)[0] >= 0.0


def test_marginal_gradient_finite_differences():
    rng = np.random.default_rng(3)
    xs = rng.standard_normal((4, 3))
    xt = rng.standard_normal((6, 3))
    _, gs, gt = marginal_mmd2(fb(xs), fb(xt))
    num_s = numeric_grad(lambda v: marginal_mmd2(fb(v), fb(xt))[0], xs, eps=1e-6)
    num_t = numeric_grad(lambda v: marginal_mmd2(fb(xs), fb(v))[0], xt, eps=1e-6)
    assert max_rel_err(gs, num_s) < 1e-6
    assert max_rel_err(gt, num_t) < 1e-6


def test_marginal_rejects_mismatched_widths():
    with pytest.raises(InputError):
        marginal_mmd2(fb(np.zeros((2, 3))), fb(np.zeros((2, 4))))


def test_conditional_identical_class_zero():
    x = np.random.default_rng(4).standard_normal((5, 3))
    y = np.array([0, 1, 1, 2, 0])
    out = conditional_mmd2(fb(x, y), fb(x, y), 1)
    value, _, _ = out
    assert value <= 1e-12


def test_conditional_absent_class_skipped():
    src = fb(np.zeros((3, 2)), [0, 1, 2])
    tgt = fb(np.zeros((3, 2)), [0, 0, 1])
    assert conditional_mmd2(src, tgt, 2) is None


def test_conditional_scalar_example_and_gradient():
    # 1-D features: source class-0 = {0}, target class-0 = {2}
    src = fb([[0.0], [5.0]], [0, 1])
    tgt = fb([[2.0], [7.0]], [0, 1])
    value, gs, gt = conditional_mmd2(src, tgt, 0)
    assert value == pytest.approx(4.0, abs=1e-14)
    assert gs[0, 0] == pytest.approx(-4.0, abs=1e-12)
    num = numeric_grad(
        lambda v: conditional_mmd2(fb(v, [0, 1]), tgt, 0)[0],
        src.features, eps=1e-6)
    assert max_rel_err(gs, num) < 1e-6


def test_conditional_gradients_zero_outside_class():
    rng = np.random.default_rng(5)
    src = random_fb(rng, 10, 4)
    tgt = random_fb(rng, 10, 4)
    out = conditional_mmd2(src, tgt, 0)
    if out is None:
        pytest.skip("class 0 absent in random draw")
    _, gs, gt = out
    assert np.allclose(gs[src.labels != 0], 0.0)
    assert np.allclose(gt[tgt.labels != 0], 0.0)


def test_jda_single_class_doubles_marginal():
    rng = np.random.default_rng(6)
    src = fb(rng.standard_normal((5, 3)))
    tgt = fb(rng.standard_normal((7, 3)))
    res = jda_penalty(src, tgt, JDA, n_classes=4)
    marginal = marginal_mmd2(src, tgt)[0]
    assert res.total == pytest.approx(2.0 * marginal, abs=1e-12)


def test_mda_mode_is_marginal_only():
    rng = np.random.default_rng(7)
    src = random_fb(rng, 8, 4)
    tgt = random_fb(rng, 8, 4)
    res = jda_penalty(src, tgt, MDA, n_classes=3)
    assert res.total == marginal_mmd2(src, tgt)[0]
    assert all(v is None for v in res.conditional_mmd2)


def test_jda_identical_batches_zero():
    rng = np.random.default_rng(8)
    batch = random_fb(rng, 9, 4)
    res = jda_penalty(batch, batch, JDA, n_classes=3)
    assert res.total <= 1e-12


def test_jda_total_equals_sum_of_parts():
    rng = np.random.default_rng(9)
    src = random_fb(rng, 12, 5)
    tgt = random_fb(rng, 10, 5)
    res = jda_penalty(src, tgt, JDA, n_classes=3)
    parts = res.marginal_mmd2 + sum(v for v in res.conditional_mmd2
                                    if v is not None)
    assert res.total == parts


def test_jda_gradient_finite_differences():
    rng = np.random.default_rng(10)
    src = random_fb(rng, 6, 3)
    tgt = random_fb(rng, 7, 3)

    def total_src(v):
        return jda_penalty(fb(v, src.labels), tgt, JDA, 3).total

    def total_tgt(v):
        return jda_penalty(src, fb(v, tgt.labels), JDA, 3).total

    res = jda_penalty(src, tgt, JDA, 3)
    assert max_rel_err(res.dfeatures_source,
                       numeric_grad(total_src, src.features, eps=1e-6)) < 1e-6
    assert max_rel_err(res.dfeatures_target,
                       numeric_grad(total_tgt, tgt.features, eps=1e-6)) < 1e-6


def test_translation_invariance():
    rng = np.random.default_rng(11)
    src = random_fb(rng, 8, 4)
    tgt = random_fb(rng, 9, 4)
    shift = rng.standard_normal(4) * 10
    shifted = jda_penalty(fb(src.features + shift, src.labels),
                          fb(tgt.features + shift, tgt.labels), JDA, 3)
    base = jda_penalty(src, tgt, JDA, 3)
    assert shifted.total == pytest.approx(base.total, abs=1e-9)


def test_assign_pseudo_labels_is_deterministic_predict():
    net = build_network(64, 3, conv_filters=4, kernel_size=5, pool_size=2,
                        hidden_width=8, seed=12)
    X = np.random.default_rng(13).standard_normal((10, 64))
    ds = Dataset(X, None, "target")
    first = assign_pseudo_labels(net, ds)
    second = assign_pseudo_labels(net, ds)
    assert np.array_equal(first, second)
    assert np.array_equal(first, net.predict(X))


def test_class_favoring_classifier_labels_everything_zero():
    net = build_network(64, 3, conv_filters=4, kernel_size=5, pool_size=2,
                        hidden_width=8, seed=14)
    top = net.layers[-1]
    top.W[:] = 0.0
    top.b[:] = [10.0, 0.0, 0.0]
    X = np.random.default_rng(15).standard_normal((12, 64))
    labels = assign_pseudo_labels(net, Dataset(X, None, "target"))
    assert np.array_equal(labels, np.zeros(12, dtype=np.int64))
