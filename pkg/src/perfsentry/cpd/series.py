"""The split-statistic series over all admissible split positions.

Two implementations share one contract:

* ``qhat_series_naive`` evaluates every split from scratch (cubic in the
  series length). It exists as the correctness oracle and the benchmark
  baseline.
* ``qhat_series_incremental`` derives each split from the previous one in
  linear time (quadratic overall). It dispatches to the compiled kernel
  when the extension built, otherwise to the NumPy fallback.

A split at tau needs ``min_cluster_size`` observations on both sides, and
additionally two per side for the within-cluster averages, so the effective
minimum side is ``max(min_cluster_size, 2)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from perfsentry.cpd import _qhat_py
from perfsentry.cpd.divergence import as_observations, check_alpha, _divergence_terms
from perfsentry.cpd.params import CandidateSplit
from perfsentry.errors import InvalidParamsError

try:
    from perfsentry.cpd import _qhat_cy
except ImportError:  # extension not built; NumPy fallback takes over
    _qhat_cy = None

_ACTIVE = _qhat_cy if _qhat_cy is not None else _qhat_py


def active_kernel() -> str:
    """Which kernel backs the incremental series: 'native' or 'python'."""
    return "native" if _qhat_cy is not None else "python"


def min_side(min_cluster_size: int) -> int:
    if min_cluster_size < 1:
        raise InvalidParamsError(
            f"min_cluster_size must be >= 1, got {min_cluster_size}"
        )
    return max(min_cluster_size, 2)


def qhat_values(
    z: np.ndarray, alpha: float, min_cluster_size: int, size_weight: bool = True
) -> np.ndarray:
    """Raw statistic array for pre-validated input (hot path, no checks)."""
    return _ACTIVE.qhat_values(
        np.ascontiguousarray(z, dtype=np.float64),
        alpha,
        min_side(min_cluster_size),
        size_weight,
    )


def qhat_values_naive(
    z: np.ndarray, alpha: float, min_cluster_size: int, size_weight: bool = True
) -> np.ndarray:
    """From-scratch statistic array; the oracle the kernels are held to."""
    t = z.size
    lo = min_side(min_cluster_size)
    hi = t - lo
    if hi < lo:
        return np.empty(0, dtype=np.float64)
    out = np.empty(hi - lo + 1, dtype=np.float64)
    for k, tau in enumerate(range(lo, hi + 1)):
        n, m = tau, t - tau
        e = _divergence_terms(z[:tau], z[tau:], alpha)
        out[k] = (n * m / (n + m)) * e if size_weight else e
    return out


def _to_candidates(values: np.ndarray, first_index: int) -> list[CandidateSplit]:
    return [
        CandidateSplit(index=first_index + k, qhat=float(q))
        for k, q in enumerate(values)
    ]


def qhat_series_naive(
    series: Sequence[float], alpha: float = 1.0, min_cluster_size: int = 3
) -> list[CandidateSplit]:
    """One CandidateSplit per admissible split, each computed from scratch.

    A series shorter than twice the minimum side has no admissible splits
    and yields an empty list.
    """
    alpha = check_alpha(alpha)
    z = as_observations(series)
    lo = min_side(min_cluster_size)
    return _to_candidates(qhat_values_naive(z, alpha, min_cluster_size), lo)


def qhat_series_incremental(
    series: Sequence[float], alpha: float = 1.0, min_cluster_size: int = 3
) -> list[CandidateSplit]:
    """Same contract as qhat_series_naive, quadratic instead of cubic."""
    alpha = check_alpha(alpha)
    z = as_observations(series)
    lo = min_side(min_cluster_size)
    return _to_candidates(qhat_values(z, alpha, min_cluster_size), lo)
