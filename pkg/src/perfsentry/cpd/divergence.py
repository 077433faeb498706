"""Empirical divergence between two clusters and its size-weighted form.

For clusters X (n points) and Y (m points) and exponent ``alpha`` the
divergence is

    E(X, Y; alpha) = (2 / (n m)) * sum_{i,j} |X_i - Y_j|^alpha
                     - (1 / C(n,2)) * sum_{i<k} |X_i - X_k|^alpha
                     - (1 / C(m,2)) * sum_{j<k} |Y_j - Y_k|^alpha

and the split statistic weights it by the cluster sizes:

    qhat = (m n / (m + n)) * E(X, Y; alpha)

Both within-cluster averages need at least two points per side.

The population divergence is non-negative for alpha in (0, 2), but this
finite-sample estimator uses unbiased within-cluster averages and can dip
below zero when a small cluster is more dispersed than the gap between the
clusters (e.g. X=[0,10], Y=[4,6] gives -2). Detection only ever maximises
the statistic, so such splits are never interesting.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from perfsentry.errors import ClusterTooSmallError, InvalidObservationError, InvalidParamsError


def as_observations(values: Sequence[float]) -> np.ndarray:
    """Validate a sequence of observations and return it as a float64 array.

    Non-finite values are rejected outright; silently dropping them would
    shift every downstream index.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidObservationError(f"expected a 1-D series, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise InvalidObservationError(
            f"invalid observation: non-finite value at index {bad}"
        )
    return arr


def check_alpha(alpha: float) -> float:
    if not (0.0 < alpha < 2.0):
        raise InvalidParamsError(f"alpha must be in (0, 2), got {alpha}")
    return float(alpha)


def _pair_dists(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    d = np.abs(a[:, None] - b[None, :])
    if alpha != 1.0:
        d **= alpha
    return d


def _divergence_terms(x: np.ndarray, y: np.ndarray, alpha: float) -> float:
    n, m = x.size, y.size
    cross = float(_pair_dists(x, y, alpha).sum())
    within_x = float(np.triu(_pair_dists(x, x, alpha), k=1).sum())
    within_y = float(np.triu(_pair_dists(y, y, alpha), k=1).sum())
    return (
        2.0 * cross / (n * m)
        - within_x / math.comb(n, 2)
        - within_y / math.comb(m, 2)
    )


def empirical_divergence(
    left: Sequence[float], right: Sequence[float], alpha: float = 1.0
) -> float:
    """Divergence between the two clusters; zero iff they look alike."""
    alpha = check_alpha(alpha)
    x = as_observations(left)
    y = as_observations(right)
    if x.size < 2 or y.size < 2:
        raise ClusterTooSmallError(
            f"cluster too small: need at least 2 observations per side, "
            f"got {x.size} and {y.size}"
        )
    return _divergence_terms(x, y, alpha)


def qhat(left: Sequence[float], right: Sequence[float], alpha: float = 1.0) -> float:
    """Size-weighted divergence of one candidate split."""
    alpha = check_alpha(alpha)
    x = as_observations(left)
    y = as_observations(right)
    if x.size < 2 or y.size < 2:
        raise ClusterTooSmallError(
            f"cluster too small: need at least 2 observations per side, "
            f"got {x.size} and {y.size}"
        )
    n, m = x.size, y.size
    return (n * m / (n + m)) * _divergence_terms(x, y, alpha)
