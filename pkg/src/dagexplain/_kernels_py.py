"""Pure numpy split search; the fallback when the compiled ``_kernels`` module is missing."""

from __future__ import annotations

import math

import numpy as np


def _xlog2x(p):
    # 0 * log2(0) := 0
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


def _entropy(c1, n):
    c1 = np.asarray(c1, dtype=float)
    n = np.asarray(n, dtype=float)
    return -(_xlog2x(c1 / n) + _xlog2x((n - c1) / n))


def gain_ratio_counts(l0: int, l1: int, r0: int, r1: int) -> float:
    """Gain ratio of a binary split given class counts on each side; 0 if a side is empty."""
    nl, nr = l0 + l1, r0 + r1
    n = nl + nr
    if nl == 0 or nr == 0:
        return 0.0
    h = _ent_scalar(l1 + r1, n)
    if h == 0.0:
        return 0.0
    gain = h - (nl / n) * _ent_scalar(l1, nl) - (nr / n) * _ent_scalar(r1, nr)
    split_info = _ent_scalar(nl, n)
    return max(gain, 0.0) / split_info


def _ent_scalar(c1, n) -> float:
    out = 0.0
    for c in (c1, n - c1):
        if c > 0:
            p = c / n
            out -= p * math.log2(p)
    return out


def best_split(X: np.ndarray, y: np.ndarray, features, use_gain_ratio: bool = True) -> tuple[int, float, float]:
    """Best ``x[f] <= threshold`` split over ``features``.

    Scored by gain ratio, or by plain information gain when
    ``use_gain_ratio`` is false.  Thresholds are midpoints between
    consecutive distinct values.  Returns ``(-1, nan, -1.0)`` when no feature
    has two distinct values.  Ties keep the earliest feature in ``features``
    and the smallest threshold.
    """
    n = X.shape[0]
    best = (-1, math.nan, -1.0)
    if n < 2:
        return best
    y = np.asarray(y, dtype=np.int64)
    total1 = int(y.sum())
    h = _ent_scalar(total1, n)
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    for f in features:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        valid = xs[1:] != xs[:-1]
        if not valid.any():
            continue
        if h == 0.0:
            # pure node: every split has zero gain
            gr = np.zeros(n - 1)
        else:
            l1 = np.cumsum(y[order])[:-1].astype(float)
            r1 = total1 - l1
            gain = h - (nl / n) * _entropy(l1, nl) - (nr / n) * _entropy(r1, nr)
            gr = np.maximum(gain, 0.0)
            if use_gain_ratio:
                gr = gr / _entropy(nl, n)
        gr = np.where(valid, gr, -1.0)
        i = int(np.argmax(gr))
        if gr[i] > best[2]:
            best = (int(f), float((xs[i] + xs[i + 1]) / 2.0), float(gr[i]))
    return best
