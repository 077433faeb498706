"""Divisive change-point detection on scalar series."""

from perfsentry.cpd.detect import detect_change_points, significance_test, subseed
from perfsentry.cpd.divergence import empirical_divergence, qhat
from perfsentry.cpd.params import CandidateSplit, DetectedPoint, DivergenceParams
from perfsentry.cpd.series import (
    active_kernel,
    qhat_series_incremental,
    qhat_series_naive,
)

__all__ = [
    "CandidateSplit",
    "DetectedPoint",
    "DivergenceParams",
    "active_kernel",
    "detect_change_points",
    "empirical_divergence",
    "qhat",
    "qhat_series_incremental",
    "qhat_series_naive",
    "significance_test",
    "subseed",
]
