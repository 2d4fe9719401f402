"""Numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or disabled. Results must be
bit-identical to ``_ckernels``; the floating-point expression order in
``nearest_remap`` and ``weighted_fuse`` mirrors the Cython source on purpose.
"""

import numpy as np


def confusion_counts(actual, predicted, n_classes):
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    flat = np.bincount(actual * n_classes + predicted, minlength=n_classes * n_classes)
    return flat.reshape(n_classes, n_classes).astype(np.int64)


def roc_sweep(scores, positive):
    """Cumulative (fp, tp) counts at each distinct score threshold, descending.

    Returns two int64 arrays starting with 0; the last entries equal the
    negative and positive totals.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = positive[order].astype(np.int64)
    tp = np.cumsum(p)
    fp = np.cumsum(1 - p)
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    zero = np.zeros(1, dtype=np.int64)
    return np.concatenate([zero, fp[ends]]), np.concatenate([zero, tp[ends]])


def weighted_fuse(stack, weights):
    """Sum_k weights[k] * stack[k], each row then divided by its total.

    ``stack`` has shape (models, examples, classes).
    """
    stack = np.asarray(stack, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    acc = np.zeros(stack.shape[1:], dtype=np.float64)
    for k in range(stack.shape[0]):
        acc = acc + weights[k] * stack[k]
    total = np.zeros(acc.shape[0], dtype=np.float64)
    for j in range(acc.shape[1]):
        total = total + acc[:, j]
    return acc / total[:, None]


def nearest_remap(src, inv, offset, fill):
    """Inverse-mapped nearest-neighbour resampling about the image center.

    For each output pixel (x, y) the source coordinate is
    ``inv @ (p - c) + c + offset`` with c the center of the pixel grid,
    rounded half-up. Out-of-range sources take ``fill``.
    """
    src = np.asarray(src, dtype=np.uint8)
    h, w, ch = src.shape
    a00, a01 = float(inv[0][0]), float(inv[0][1])
    a10, a11 = float(inv[1][0]), float(inv[1][1])
    bx, by = float(offset[0]), float(offset[1])
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    dx = np.arange(w, dtype=np.float64) - cx
    dy = np.arange(h, dtype=np.float64) - cy
    dxg = dx[None, :]
    dyg = dy[:, None]
    sx = np.floor(((a00 * dxg + a01 * dyg) + cx + bx) + 0.5)
    sy = np.floor(((a10 * dxg + a11 * dyg) + cy + by) + 0.5)
    sx, sy = np.broadcast_arrays(sx, sy)
    inside = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    out = np.full((h, w, ch), fill, dtype=np.uint8)
    out[inside] = src[sy[inside].astype(np.intp), sx[inside].astype(np.intp)]
    return out
