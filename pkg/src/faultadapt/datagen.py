"""Parametric generator for multi-class 1-D fault-signal datasets.

Each window is an amplitude-scaled sum of three parts:
  (a) shaft harmonics at the rotation frequency (random phase per window),
  (b) a class-specific train of exponentially decaying resonance bursts at the
      class's characteristic fault frequency, scaled by the class severity,
  (c) white Gaussian noise.

Severity does not only scale the bursts: a larger defect lengthens each
impact, which lowers the excited resonance band and changes the envelope
decay.  The coupling strengths are domain parameters, so a severity change
moves each class's spectral signature in a class-specific way.

Domain shift is produced by varying the spec between source and target:
rotation frequency/amplitude (operating shift), per-class severities
(severity shift) or the class signatures themselves (type shift).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset
from .errors import InputError

@dataclass(frozen=True)
class ClassSignature:
    """Per-class fingerprint of the fault component."""

    fault_multiple: float          # fault frequency = multiple * rotation freq
    impulse_decay: float           # 1/s, envelope of each resonance burst
    harmonic_weights: tuple = (1.0, 0.5, 0.25)
    resonance_fraction: float = 1.0 / 6.0  # burst carrier / sampling rate


@dataclass(frozen=True)
class DomainSpec:
    """Full recipe for one domain's dataset; generation is pure in (spec, seed)."""

    n_classes: int = 4
    window_len: int = 512
    samples_per_class: int = 250
    rotation_freq: float = 50.0
    sampling_rate: float = 12800.0
    noise_sigma: float = 0.35
    amplitude: float = 1.0
    signatures: tuple = (
        ClassSignature(0.0, 1.0, (1.0, 0.6, 0.3)),       # healthy: harmonics only
        ClassSignature(3.58, 700.0, (1.0, 0.5, 0.25), 0.10),
        ClassSignature(5.42, 500.0, (1.0, 0.5, 0.25), 0.17),
        ClassSignature(7.69, 900.0, (1.0, 0.5, 0.25), 0.25),
    )
    severities: tuple = (0.0, 1.0, 1.0, 1.0)
    # impact-dynamics coupling: severity s shifts a class's resonance carrier
    # by factor (1 - band_coupling * (s - 1)) and its envelope decay by
    # (1 + decay_coupling * (s - 1)); s = 1 reproduces the bare signature
    band_coupling: float = 0.22
    decay_coupling: float = 0.3
    seed: int = 0

    def effective_signature(self, c):
        """Class signature after applying the severity coupling."""
        sig = self.signatures[c]
        dv = self.severities[c] - 1.0
        if sig.fault_multiple == 0.0 or dv == 0.0:
            return sig
        return replace(
            sig,
            resonance_fraction=sig.resonance_fraction
            * (1.0 - self.band_coupling * dv),
            impulse_decay=sig.impulse_decay
            * (1.0 + self.decay_coupling * dv))

    def validate(self):
        if self.n_classes < 2:
            raise InputError("need at least 2 classes")
        if self.window_len < 64:
            raise InputError("window length must be >= 64")
        if len(self.signatures) != self.n_classes:
            raise InputError("one signature per class required")
        if len(self.severities) != self.n_classes:
            raise InputError("one severity per class required")
        nyquist = self.sampling_rate / 2.0
        for c in range(self.n_classes):
            sig = self.effective_signature(c)
            top_harmonic = len(sig.harmonic_weights) * self.rotation_freq
            if top_harmonic >= nyquist:
                raise InputError(
                    f"class {c}: harmonic {top_harmonic} Hz >= Nyquist {nyquist} Hz")
            if sig.fault_multiple * self.rotation_freq >= nyquist:
                raise InputError(
                    f"class {c}: fault frequency >= Nyquist {nyquist} Hz")
            if sig.resonance_fraction >= 0.5:
                raise InputError(
                    f"class {c}: resonance frequency >= Nyquist")
            if sig.fault_multiple > 0.0 and (sig.resonance_fraction <= 0.0
                                             or sig.impulse_decay <= 0.0):
                raise InputError(
                    f"class {c}: severity coupling drove the signature "
                    "out of range")


@dataclass(frozen=True)
class TransferTask:
    """Source/target domain pair plus target pool sizing.

    The unlabeled adaptation pool and the labeled test pool are disjoint
    draws from the target spec (distinct sub-seeds)."""

    name: str
    source: DomainSpec
    target: DomainSpec
    unlabeled_pool: int = 600
    test_pool: int = 400


def _one_window(spec, c, rng):
    L = spec.window_len
    fs = spec.sampling_rate
    t = np.arange(L) / fs
    sig = spec.effective_signature(c)

    x = np.zeros(L)
    for h, w in enumerate(sig.harmonic_weights, start=1):
        phase = rng.uniform(0.0, 2.0 * np.pi)
        x += w * np.sin(2.0 * np.pi * h * spec.rotation_freq * t + phase)

    severity = spec.severities[c]
    if severity > 0.0 and sig.fault_multiple > 0.0:
        fault_freq = sig.fault_multiple * spec.rotation_freq
        res_freq = sig.resonance_fraction * fs
        period = 1.0 / fault_freq
        t0 = rng.uniform(0.0, period)
        burst = np.zeros(L)
        t_hit = t0
        while t_hit < L / fs:
            tau = t - t_hit
            active = tau >= 0.0
            amp = 1.0 + 0.1 * rng.standard_normal()
            burst[active] += amp * np.exp(-sig.impulse_decay * tau[active]) \
                * np.sin(2.0 * np.pi * res_freq * tau[active])
            t_hit += period
        x += severity * burst

    x += spec.noise_sigma * rng.standard_normal(L)
    return spec.amplitude * x


def generate_domain(spec: DomainSpec, domain="") -> Dataset:
    """Labeled, class-balanced dataset; bit-reproducible from (spec, seed).

    Each window draws from its own sub-seed so generation could be
    parallelized per sample without changing the output.
    """
    spec.validate()
    ss = np.random.SeedSequence(spec.seed)
    n = spec.n_classes * spec.samples_per_class
    children = ss.spawn(n)
    X = np.empty((n, spec.window_len))
    y = np.empty(n, dtype=np.int64)
    i = 0
    for c in range(spec.n_classes):
        for _ in range(spec.samples_per_class):
            X[i] = _one_window(spec, c, np.random.default_rng(children[i]))
            y[i] = c
            i += 1
    return Dataset(X, y, domain)


def make_transfer_task(task: TransferTask):
    """Materialize (source, target_unlabeled, target_test) datasets.

    Target pools come from distinct sub-seeds of the target spec, so they are
    disjoint draws.  The unlabeled pool keeps its ground truth only as hidden
    labels for post-hoc diagnostics.
    """
    src = generate_domain(task.source, domain="source")
    per_class_u = max(1, task.unlabeled_pool // task.target.n_classes)
    per_class_t = max(1, task.test_pool // task.target.n_classes)
    tgt_u = generate_domain(
        replace(task.target, samples_per_class=per_class_u,
                seed=task.target.seed * 3 + 1),
        domain="target")
    tgt_test = generate_domain(
        replace(task.target, samples_per_class=per_class_t,
                seed=task.target.seed * 3 + 2),
        domain="target-test")
    return src, tgt_u.without_labels(), tgt_test


def stock_task(name, seed=0, **sizes) -> TransferTask:
    """Build one of the shipped task families by name."""
    if name not in STOCK_TASKS:
        raise InputError(
            f"unknown task {name!r}; available: {', '.join(sorted(STOCK_TASKS))}")
    return STOCK_TASKS[name](seed, **sizes)


def _identity(seed, **sizes):
    src = DomainSpec(seed=seed)
    tgt = replace(src, seed=seed + 7919)
    return TransferTask("identity", src, tgt, **sizes)


def _operating_shift(seed, **sizes):
    src = DomainSpec(seed=seed)
    tgt = replace(src, rotation_freq=65.0, amplitude=2.0, seed=seed + 7919)
    return TransferTask("operating-shift", src, tgt, **sizes)


def _severity_shift(seed, **sizes):
    src = DomainSpec(seed=seed)
    tgt = replace(src, severities=(0.0, 2.0, 1.8, 1.9), seed=seed + 7919)
    return TransferTask("severity-shift", src, tgt, **sizes)


def _type_shift(seed, **sizes):
    src = DomainSpec(seed=seed)
    tgt = replace(
        src,
        signatures=(
            ClassSignature(0.0, 1.0, (1.0, 0.6, 0.3)),
            ClassSignature(4.35, 420.0, (1.0, 0.5, 0.25), 0.13),
            ClassSignature(4.78, 780.0, (1.0, 0.5, 0.25), 0.20),
            ClassSignature(6.55, 620.0, (1.0, 0.5, 0.25), 0.29),
        ),
        seed=seed + 7919)
    return TransferTask("type-shift", src, tgt, **sizes)


STOCK_TASKS = {
    "identity": _identity,
    "operating-shift": _operating_shift,
    "severity-shift": _severity_shift,
    "type-shift": _type_shift,
}
