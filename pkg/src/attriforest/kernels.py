"""Hot numeric kernels behind tree construction and split scoring.

Two interchangeable backends live here: numba @njit kernels (default) and a
pure-numpy fallback. Selection happens once at import time via the
``ATTRIFOREST_NUMBA`` environment variable ("0"/"false"/"off" forces numpy;
anything else, or an unset variable, uses numba when it is importable).

Both backends stay importable as ``numpy_backend`` and ``numba_backend`` so
the benchmark suite and the agreement tests can compare them directly;
everything else in the package goes through the module-level names, which are
bound to the active backend.

All kernels operate on dense arrays plus an explicit int64 index array
selecting the rows of the current tree node, so recursion never copies
column data.
"""

from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

_KERNEL_NAMES = (
    "entropy_bits",
    "class_counts",
    "categorical_counts",
    "threshold_counts",
    "weighted_entropy_bits",
    "subset_mean",
)


def _numba_requested() -> bool:
    flag = os.environ.get("ATTRIFOREST_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _np_entropy_bits(counts):
    """Shannon entropy in bits of a count vector; 0*log(0) == 0."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    p = counts[counts > 0.0] / total
    return float(-(p * np.log2(p)).sum())


def _np_class_counts(labels, idx):
    """Binary label counts (n0, n1) over the selected rows."""
    sel = labels[idx]
    n1 = int(sel.sum())
    return np.array([sel.size - n1, n1], dtype=np.int64)


def _np_categorical_counts(codes, labels, idx, n_cats):
    """Contingency table (n_cats, 2) of category code vs binary label."""
    flat = codes[idx] * 2 + labels[idx]
    return np.bincount(flat, minlength=2 * n_cats).reshape(n_cats, 2).astype(np.int64)


def _np_threshold_counts(values, labels, idx, theta):
    """2x2 contingency for the {>= theta, < theta} partition (row 0 is >=)."""
    sel_v = values[idx]
    sel_y = labels[idx]
    ge = sel_v >= theta
    out = np.empty((2, 2), dtype=np.int64)
    out[0, 1] = int(sel_y[ge].sum())
    out[0, 0] = int(ge.sum()) - out[0, 1]
    out[1, 1] = int(sel_y[~ge].sum())
    out[1, 0] = int((~ge).sum()) - out[1, 1]
    return out


def _np_weighted_entropy_bits(table):
    """Size-weighted mean of per-row entropies of a contingency table."""
    table = np.asarray(table, dtype=np.float64)
    total = table.sum()
    acc = 0.0
    for row in table:
        n_v = row.sum()
        if n_v > 0.0:
            acc += (n_v / total) * _np_entropy_bits(row)
    return acc


def _np_subset_mean(values, idx):
    return float(values[idx].mean())


numpy_backend = SimpleNamespace(
    name="numpy",
    entropy_bits=_np_entropy_bits,
    class_counts=_np_class_counts,
    categorical_counts=_np_categorical_counts,
    threshold_counts=_np_threshold_counts,
    weighted_entropy_bits=_np_weighted_entropy_bits,
    subset_mean=_np_subset_mean,
)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

def _build_numba_backend():
    from numba import njit

    @njit(cache=True)
    def entropy_bits(counts):
        total = 0.0
        for c in counts:
            total += c
        h = 0.0
        for c in counts:
            if c > 0.0:
                p = c / total
                h -= p * math.log2(p)
        return h

    @njit(cache=True)
    def class_counts(labels, idx):
        out = np.zeros(2, dtype=np.int64)
        for i in idx:
            out[labels[i]] += 1
        return out

    @njit(cache=True)
    def categorical_counts(codes, labels, idx, n_cats):
        out = np.zeros((n_cats, 2), dtype=np.int64)
        for i in idx:
            out[codes[i], labels[i]] += 1
        return out

    @njit(cache=True)
    def threshold_counts(values, labels, idx, theta):
        out = np.zeros((2, 2), dtype=np.int64)
        for i in idx:
            if values[i] >= theta:
                out[0, labels[i]] += 1
            else:
                out[1, labels[i]] += 1
        return out

    @njit(cache=True)
    def weighted_entropy_bits(table):
        total = 0.0
        for r in range(table.shape[0]):
            for c in range(table.shape[1]):
                total += table[r, c]
        acc = 0.0
        for r in range(table.shape[0]):
            n_v = 0.0
            for c in range(table.shape[1]):
                n_v += table[r, c]
            if n_v > 0.0:
                h = 0.0
                for c in range(table.shape[1]):
                    if table[r, c] > 0:
                        p = table[r, c] / n_v
                        h -= p * math.log2(p)
                acc += (n_v / total) * h
        return acc

    @njit(cache=True)
    def subset_mean(values, idx):
        acc = 0.0
        for i in idx:
            acc += values[i]
        return acc / idx.size

    def _entropy_bits(counts):
        # njit wrapper: accept any sequence, hand a float64 array to the kernel
        return float(entropy_bits(np.ascontiguousarray(counts, dtype=np.float64)))

    def _weighted_entropy_bits(table):
        return float(weighted_entropy_bits(np.ascontiguousarray(table, dtype=np.float64)))

    return SimpleNamespace(
        name="numba",
        entropy_bits=_entropy_bits,
        class_counts=class_counts,
        categorical_counts=categorical_counts,
        threshold_counts=threshold_counts,
        weighted_entropy_bits=_weighted_entropy_bits,
        subset_mean=subset_mean,
    )


def _select_backend():
    if _numba_requested():
        try:
            return _build_numba_backend()
        except ImportError:
            pass
    return numpy_backend


_active = _select_backend()

BACKEND = _active.name
entropy_bits = _active.entropy_bits
class_counts = _active.class_counts
categorical_counts = _active.categorical_counts
threshold_counts = _active.threshold_counts
weighted_entropy_bits = _active.weighted_entropy_bits
subset_mean = _active.subset_mean


def numba_backend():
    """Build (compiling if needed) and return the numba backend.

    Raises ImportError when numba is unavailable. Used by benchmarks and
    agreement tests; regular code should use the module-level kernels.
    """
    if _active.name == "numba":
        return _active
    return _build_numba_backend()
