"""Detection orchestration: windowing, per-series recompute, parallel fan-out.

Runs after every ingestion. Each affected series is windowed, run through
the detector, dressed with stable regions / hazard / suspect commits, and
its stored change points replaced atomically. Work is parallel across
series; a failure in one series never blocks the others.

Reproducibility: the detection seed for a series is a stable hash of the
pipeline seed, the series identity, and the window start, so recomputes are
repeatable while distinct series stay decorrelated.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from perfsentry.cpd import DivergenceParams, detect_change_points, subseed
from perfsentry.errors import HazardUndefinedError, InvalidParamsError
from perfsentry.model import (
    ChangePoint,
    ResultPoint,
    SeriesKey,
    StableRegion,
    hazard_level,
    suspect_range,
    utcnow,
)
from perfsentry.store import Store, TaskResultBundle


@dataclass(frozen=True)
class WindowPolicy:
    """Analysis window: up to ``max_points`` recent results, optionally
    stretched back to the nearest previously computed change point."""

    max_points: int = 500
    extend_to_prior_change: bool = True


@dataclass(frozen=True)
class PipelineConfig:
    params: DivergenceParams = field(default_factory=DivergenceParams)
    window: WindowPolicy = field(default_factory=WindowPolicy)
    seed: int = 0
    max_workers: int | None = None

    def __post_init__(self):
        if self.window.max_points < 2 * self.params.min_cluster_size:
            raise InvalidParamsError(
                f"window max_points ({self.window.max_points}) must be at least twice "
                f"min_cluster_size ({self.params.min_cluster_size})"
            )


def window(
    points: Sequence[ResultPoint],
    prior_points: Sequence[ChangePoint],
    policy: WindowPolicy,
) -> list[ResultPoint]:
    """The sub-sequence the detector analyzes.

    Short series pass through whole. Longer ones start at the latest prior
    change point at or before the plain cutoff, so an old change anchors
    the window instead of being re-discovered truncated; without such a
    point the window is simply the trailing ``max_points`` results.
    """
    points = list(points)
    if len(points) <= policy.max_points:
        return points
    cutoff = len(points) - policy.max_points
    if not policy.extend_to_prior_change:
        return points[cutoff:]
    index_by_order = {p.order: i for i, p in enumerate(points)}
    prior_indices = [
        index_by_order[cp.commit_order]
        for cp in prior_points
        if cp.commit_order in index_by_order
    ]
    anchors = [i for i in prior_indices if i <= cutoff]
    start = max(anchors) if anchors else cutoff
    return points[start:]


def series_seed(base_seed: int, series_id: str, window_start_order: int) -> int:
    return subseed(base_seed, series_id, window_start_order)


@dataclass(frozen=True)
class MovementDiff:
    added: tuple[ChangePoint, ...]
    moved: tuple[tuple[ChangePoint, ChangePoint], ...]
    removed: tuple[ChangePoint, ...]


def point_movement_diff(
    before: Sequence[ChangePoint], after: Sequence[ChangePoint]
) -> MovementDiff:
    """How a recompute changed a series' stored set.

    Points are matched by detection order; a matched pair whose revisions
    differ has moved. Orders present on only one side are added/removed.
    """
    before_by_order = {p.order_index: p for p in before}
    after_by_order = {p.order_index: p for p in after}
    added = tuple(
        after_by_order[o] for o in sorted(after_by_order.keys() - before_by_order.keys())
    )
    removed = tuple(
        before_by_order[o] for o in sorted(before_by_order.keys() - after_by_order.keys())
    )
    moved = tuple(
        (before_by_order[o], after_by_order[o])
        for o in sorted(before_by_order.keys() & after_by_order.keys())
        if before_by_order[o].revision != after_by_order[o].revision
    )
    return MovementDiff(added=added, moved=moved, removed=removed)


def recompute_series(
    store: Store, key: SeriesKey, config: PipelineConfig
) -> list[ChangePoint]:
    """Detect on the windowed series and atomically replace its stored set."""
    points = store.series_vector(key)
    prior = store.change_points(key)
    win = window(points, prior, config.window)
    if not win:
        store.replace_change_points(key, [])
        return []

    values = [p.value for p in win]
    seed = series_seed(config.seed, key.id, win[0].order)
    detected = detect_change_points(values, config.params, seed)
    if not detected:
        store.replace_change_points(key, [])
        return []

    # Stable regions partition the window at the detected indices.
    boundaries = [0] + [d.index for d in detected] + [len(win)]
    regions = [
        StableRegion.from_values(
            values[s:e], start_order=win[s].order, end_order=win[e - 1].order
        )
        for s, e in zip(boundaries[:-1], boundaries[1:])
    ]

    tested = [p.revision for p in points]
    commit_log = store.commit_log(key.project)
    computed_at = utcnow()
    out = []
    for i, d in enumerate(detected):
        before, after = regions[i], regions[i + 1]
        try:
            hazard = hazard_level(before, after)
        except HazardUndefinedError:
            hazard = None
        revision = win[d.index].revision
        out.append(
            ChangePoint(
                series=key,
                revision=revision,
                order_index=d.order,
                qhat=d.qhat,
                p_value=d.p_value,
                hazard=hazard,
                region_before=before,
                region_after=after,
                suspect_range=suspect_range(revision, tested, commit_log),
                computed_at=computed_at,
            )
        )
    store.replace_change_points(key, out)
    return out


@dataclass
class SeriesOutcome:
    series_id: str
    added: int = 0
    moved: int = 0
    removed: int = 0
    points: int = 0
    duration_s: float = 0.0
    error: str | None = None

    def to_doc(self) -> dict:
        return {
            "series": self.series_id,
            "added": self.added,
            "moved": self.moved,
            "removed": self.removed,
            "points": self.points,
            "duration_s": self.duration_s,
            "error": self.error,
        }


@dataclass
class RecomputeReport:
    scope: str
    seed: int
    outcomes: list[SeriesOutcome]
    wall_time_s: float

    @property
    def series_processed(self) -> int:
        return len(self.outcomes)

    @property
    def errors(self) -> list[SeriesOutcome]:
        return [o for o in self.outcomes if o.error is not None]

    def totals(self) -> dict:
        ok = [o for o in self.outcomes if o.error is None]
        return {
            "series": len(self.outcomes),
            "failed": len(self.errors),
            "added": sum(o.added for o in ok),
            "moved": sum(o.moved for o in ok),
            "removed": sum(o.removed for o in ok),
        }

    def to_doc(self) -> dict:
        return {
            "scope": self.scope,
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
            "totals": self.totals(),
            "series": [o.to_doc() for o in self.outcomes],
        }


def _recompute_one(store: Store, key: SeriesKey, config: PipelineConfig) -> SeriesOutcome:
    outcome = SeriesOutcome(series_id=key.id)
    started = time.perf_counter()
    try:
        before = store.change_points(key)
        after = recompute_series(store, key, config)
        diff = point_movement_diff(before, after)
        outcome.added = len(diff.added)
        outcome.moved = len(diff.moved)
        outcome.removed = len(diff.removed)
        outcome.points = len(after)
    except Exception as exc:  # isolation: one bad series must not block the rest
        outcome.error = f"{type(exc).__name__}: {exc}"
    outcome.duration_s = time.perf_counter() - started
    return outcome


def _recompute_many(
    store: Store, keys: Sequence[SeriesKey], config: PipelineConfig, scope: str
) -> RecomputeReport:
    started = time.perf_counter()
    keys = sorted(keys)
    if config.max_workers == 1 or len(keys) <= 1:
        outcomes = [_recompute_one(store, key, config) for key in keys]
    else:
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            outcomes = list(
                pool.map(lambda key: _recompute_one(store, key, config), keys)
            )
    return RecomputeReport(
        scope=scope,
        seed=config.seed,
        outcomes=outcomes,
        wall_time_s=time.perf_counter() - started,
    )


def recompute_after_ingest(
    store: Store, bundle: TaskResultBundle, config: PipelineConfig
) -> RecomputeReport:
    """Recompute exactly the series the bundle touched."""
    keys = sorted(set(bundle.series_keys()))
    return _recompute_many(store, keys, config, scope=f"bundle:{bundle.revision}")


def recompute_all(
    store: Store, project: str | None, config: PipelineConfig
) -> RecomputeReport:
    """Recompute every series of a project (or everything when None)."""
    keys = store.series_keys(project)
    scope = f"project:{project}" if project else "all"
    return _recompute_many(store, keys, config, scope=scope)
