"""Parameter and result containers for the divisive detector."""

from __future__ import annotations

from dataclasses import dataclass

from perfsentry.errors import InvalidParamsError


@dataclass(frozen=True)
class DivergenceParams:
    """Knobs of the divisive change-point search.

    alpha: exponent applied to pairwise absolute differences, in (0, 2).
    min_cluster_size: smallest number of observations allowed on each side
        of a split; governs how soon after a change it can be reported.
    permutation_count: permutations drawn by the significance test.
    p_threshold: detection continues while the permutation p-value is
        strictly below this.
    max_change_points: optional cap on the number of points returned.
    size_weight: scale the divergence by m*n/(m+n) (the default). Turning
        this off is an experiment that removes the bias toward splits near
        the middle of long clusters; it is off the beaten path and not used
        by the pipeline.
    """

    alpha: float = 1.0
    min_cluster_size: int = 3
    permutation_count: int = 100
    p_threshold: float = 0.05
    max_change_points: int | None = None
    size_weight: bool = True

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise InvalidParamsError(f"alpha must be in (0, 2), got {self.alpha}")
        if self.min_cluster_size < 1:
            raise InvalidParamsError(
                f"min_cluster_size must be >= 1, got {self.min_cluster_size}"
            )
        if self.permutation_count < 1:
            raise InvalidParamsError(
                f"permutation_count must be >= 1, got {self.permutation_count}"
            )
        if not (0.0 < self.p_threshold < 1.0):
            raise InvalidParamsError(
                f"p_threshold must be in (0, 1), got {self.p_threshold}"
            )
        if self.max_change_points is not None and self.max_change_points < 1:
            raise InvalidParamsError(
                f"max_change_points must be >= 1 or None, got {self.max_change_points}"
            )


@dataclass(frozen=True)
class CandidateSplit:
    """One admissible split position and its statistic.

    ``index`` is 0-based: observations [0, index) fall left of the split and
    [index, len) right of it, within the cluster the series was taken from.
    """

    index: int
    qhat: float


@dataclass(frozen=True)
class DetectedPoint:
    """A significant change point in a full series.

    ``index`` is the 0-based position of the first observation of the new
    regime. ``order`` is 1-based detection order (1 = found first, i.e. the
    most prominent split).
    """

    index: int
    qhat: float
    order: int
    p_value: float
