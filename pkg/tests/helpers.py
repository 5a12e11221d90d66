"""Shared numerical helpers: central finite differences over arrays and over
network parameters."""

import numpy as np


def numeric_grad(f, x, eps=1e-5):
    """Central-difference gradient of scalar f at array x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        i = it.multi_index
        xp = x.copy(); xp[i] += eps
        xm = x.copy(); xm[i] -= eps
        g[i] = (f(xp) - f(xm)) / (2 * eps)
        it.iternext()
    return g


def net_numeric_grads(net, objective, eps=1e-5):
    """Central-difference gradients of objective() w.r.t. every network
    parameter, perturbing parameters in place."""
    grads = []
    for i, name, param in net.parameters():
        g = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            j = it.multi_index
            orig = param[j]
            param[j] = orig + eps
            fp = objective()
            param[j] = orig - eps
            fm = objective()
            param[j] = orig
            g[j] = (fp - fm) / (2 * eps)
            it.iternext()
        grads.append((i, name, g))
    return grads


def max_rel_err(analytic, numeric, floor=1e-8):
    """Max elementwise relative error with an absolute floor for tiny values."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))
