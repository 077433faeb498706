"""NumPy fallback kernel for the split-statistic series.

The series of qhat values over all admissible splits is computed with
row/column-difference bookkeeping. Three pairwise-distance pools are
maintained while the split position tau moves right; moving it by one
transfers element z[tau] from the right cluster to the left, so

    within_left  += sum_i<tau |z[i] - z[tau]|^alpha        (row sum)
    within_right -= sum_j>tau |z[tau] - z[j]|^alpha        (column sum)
    cross        += column sum - row sum

which makes every step linear in the series length and the whole series
quadratic. The T x T distance matrix is never materialised. Correctness is
defined by elementwise agreement with the from-scratch evaluation in
perfsentry.cpd.series.
"""

from __future__ import annotations

import numpy as np


def _dists(a: np.ndarray, scalar: float, alpha: float) -> np.ndarray:
    d = np.abs(a - scalar)
    if alpha != 1.0:
        d **= alpha
    return d


def qhat_values(
    z: np.ndarray, alpha: float, min_side: int, size_weight: bool = True
) -> np.ndarray:
    """qhat at every admissible split of ``z``, in split order.

    ``min_side`` is the smallest cluster size allowed on either side of a
    split (already clamped to >= 2 by the caller). Admissible positions are
    tau in [min_side, len(z) - min_side]; the returned array has one value
    per position. Too-short series yield an empty array.
    """
    t = z.size
    lo = min_side
    hi = t - min_side
    if hi < lo:
        return np.empty(0, dtype=np.float64)

    # Pools at the first admissible split.
    left, right = z[:lo], z[lo:]
    if alpha == 1.0:
        cross = float(np.abs(left[:, None] - right[None, :]).sum())
        wl = float(np.abs(left[:, None] - left[None, :]).sum()) / 2.0
        wr = float(np.abs(right[:, None] - right[None, :]).sum()) / 2.0
    else:
        cross = float((np.abs(left[:, None] - right[None, :]) ** alpha).sum())
        wl = float((np.abs(left[:, None] - left[None, :]) ** alpha).sum()) / 2.0
        wr = float((np.abs(right[:, None] - right[None, :]) ** alpha).sum()) / 2.0

    out = np.empty(hi - lo + 1, dtype=np.float64)
    for k, tau in enumerate(range(lo, hi + 1)):
        n = float(tau)
        m = float(t - tau)
        e = (
            2.0 * cross / (n * m)
            - 2.0 * wl / (n * (n - 1.0))
            - 2.0 * wr / (m * (m - 1.0))
        )
        out[k] = (n * m / (n + m)) * e if size_weight else e
        if tau < hi:
            row = float(_dists(z[:tau], z[tau], alpha).sum())
            col = float(_dists(z[tau + 1 :], z[tau], alpha).sum())
            wl += row
            wr -= col
            cross += col - row
    return out
