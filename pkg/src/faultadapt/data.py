"""Dataset container and CSV import/export.

CSV layout: one window per row, a label column (integer, empty for unlabeled)
followed by the window's values.  Header line optional, comma separated.
"""

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParseError


@dataclass
class Dataset:
    """Fixed-length signal windows with optional integer labels.

    hidden_labels carries withheld ground truth for post-hoc diagnostics on
    nominally unlabeled pools; it is never read by training code.
    """

    X: np.ndarray
    y: np.ndarray | None = None
    domain: str = ""
    hidden_labels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise InputError(f"windows must form a 2-D array, got {self.X.shape}")
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=np.int64)
            if self.y.shape != (len(self.X),):
                raise InputError("label count does not match window count")

    def __len__(self):
        return len(self.X)

    @property
    def window_len(self):
        return self.X.shape[1]

    @property
    def labeled(self):
        return self.y is not None

    def require_labels(self):
        if self.y is None:
            raise InputError(f"dataset '{self.domain}' has no labels")
        return self.y

    def without_labels(self):
        """Copy with labels withheld (kept as hidden ground truth)."""
        return Dataset(self.X.copy(), None, self.domain,
                       hidden_labels=None if self.y is None else self.y.copy())

    def subset(self, idx):
        return Dataset(self.X[idx],
                       None if self.y is None else self.y[idx],
                       self.domain,
                       hidden_labels=None if self.hidden_labels is None
                       else self.hidden_labels[idx])


def normalize_windows(X):
    """Per-window zero-mean unit-variance normalization."""
    X = np.asarray(X, dtype=np.float64)
    mu = X.mean(axis=1, keepdims=True)
    sd = X.std(axis=1, keepdims=True)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return (X - mu) / sd


def magnitude_spectrum(X):
    """One-sided FFT magnitude of each window (optional model input)."""
    return np.abs(np.fft.rfft(np.asarray(X, dtype=np.float64), axis=1))


def prepare(ds: Dataset, spectrum=False) -> Dataset:
    """Model-input preprocessing: optional magnitude spectrum, then per-window
    normalization."""
    X = magnitude_spectrum(ds.X) if spectrum else ds.X
    return Dataset(normalize_windows(X), ds.y, ds.domain,
                   hidden_labels=ds.hidden_labels)


def export_csv(ds: Dataset, path):
    """Write a dataset in the one-window-per-row CSV format (atomic)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label"] + [f"x{i}" for i in range(ds.window_len)])
        for i in range(len(ds)):
            label = "" if ds.y is None else int(ds.y[i])
            w.writerow([label] + [repr(float(v)) for v in ds.X[i]])
    os.replace(tmp, path)


def _looks_like_header(row):
    try:
        float(row[1])
    except (ValueError, IndexError):
        return True
    return False


def import_csv(path, domain=""):
    """Read a dataset; window length is inferred from the first data row.

    Raises ParseError naming the row for ragged rows, non-numeric cells or an
    inconsistent window length.
    """
    X, labels = [], []
    expected = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if expected is None and _looks_like_header(row):
                continue
            if expected is not None and len(row) != expected + 1:
                raise ParseError(
                    f"{path}: row {lineno} has {len(row) - 1} values, "
                    f"expected {expected}")
            try:
                label = None if row[0].strip() == "" else int(row[0])
                values = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise ParseError(f"{path}: row {lineno}: {exc}") from exc
            if expected is None:
                expected = len(values)
                if expected == 0:
                    raise ParseError(f"{path}: row {lineno} has no values")
            labels.append(label)
            X.append(values)
    if not X:
        raise ParseError(f"{path}: no data rows")
    has_labels = [l is not None for l in labels]
    if any(has_labels) and not all(has_labels):
        raise ParseError(f"{path}: mix of labeled and unlabeled rows")
    y = np.array(labels, dtype=np.int64) if all(has_labels) else None
    return Dataset(np.array(X, dtype=np.float64), y, domain)
