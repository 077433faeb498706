"""Domain vocabulary shared by the store, pipeline, and API.

Everything here is an immutable value type, safe to share across threads.
Records serialize to/from plain dicts (``to_doc``/``from_doc``) so the
store and the HTTP layer speak one dialect.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from fnmatch import fnmatchcase
from math import log
from typing import Sequence

import numpy as np

from perfsentry.errors import (
    EmptyRegionError,
    HazardUndefinedError,
    InputError,
    InvalidObservationError,
    UntestedRevisionError,
)

SERIES_KEY_FIELDS = ("project", "variant", "task", "test", "config", "measurement")

ACKNOWLEDGED = "acknowledged"
HIDDEN = "hidden"
TRIAGE_STATES = (ACKNOWLEDGED, HIDDEN)

HIGHER_IS_BETTER = "higher-is-better"
LOWER_IS_BETTER = "lower-is-better"


def parse_timestamp(value: str | datetime) -> datetime:
    if isinstance(value, datetime):
        ts = value
    else:
        try:
            ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
        except (ValueError, AttributeError) as exc:
            raise InputError(f"bad timestamp {value!r}: {exc}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True, order=True)
class SeriesKey:
    """Unique identity of one measured time series."""

    project: str
    variant: str
    task: str
    test: str
    config: str
    measurement: str

    def __post_init__(self):
        for name in SERIES_KEY_FIELDS:
            value = getattr(self, name)
            if not value:
                raise InputError(f"series key field {name!r} must be non-empty")
            if "/" in value:
                # "/" separates fields in ids and URLs.
                raise InputError(f"series key field {name!r} must not contain '/': {value!r}")

    @property
    def id(self) -> str:
        return "/".join(getattr(self, name) for name in SERIES_KEY_FIELDS)

    @classmethod
    def from_id(cls, series_id: str) -> "SeriesKey":
        parts = series_id.split("/")
        if len(parts) != len(SERIES_KEY_FIELDS):
            raise InputError(f"bad series id {series_id!r}: expected 6 '/'-separated fields")
        return cls(*parts)

    def to_doc(self) -> dict:
        return {name: getattr(self, name) for name in SERIES_KEY_FIELDS}

    @classmethod
    def from_doc(cls, doc: dict) -> "SeriesKey":
        return cls(**{name: doc[name] for name in SERIES_KEY_FIELDS})


def change_point_id(series: SeriesKey, revision: str) -> str:
    """Stable identifier of a change point: digest of (series, revision)."""
    material = f"{series.id}\n{revision}".encode("utf-8")
    return hashlib.blake2b(material, digest_size=12).hexdigest()


@dataclass(frozen=True)
class ResultPoint:
    """One measured scalar at one tested revision of a series."""

    series: SeriesKey
    revision: str
    order: int
    timestamp: datetime
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise InvalidObservationError(
                f"invalid observation: non-finite value for {self.series.id} @ {self.revision}"
            )

    def to_doc(self) -> dict:
        return {
            "revision": self.revision,
            "order": self.order,
            "timestamp": format_timestamp(self.timestamp),
            "value": self.value,
        }


@dataclass(frozen=True)
class StableRegion:
    """A maximal run of results between change points, with its statistics.

    Bounds are inclusive commit orders. Variance is the population variance
    (divide by count): a region is treated as the complete cluster, not a
    sample from one. The median of an even count is the mean of the two
    central values.
    """

    start_order: int
    end_order: int
    count: int
    min: float
    max: float
    median: float
    mean: float
    variance: float

    @classmethod
    def from_values(
        cls, values: Sequence[float], start_order: int, end_order: int
    ) -> "StableRegion":
        stats = region_stats(values)
        return cls(start_order=start_order, end_order=end_order, **stats)

    def to_doc(self) -> dict:
        return {
            "start_order": self.start_order,
            "end_order": self.end_order,
            "count": self.count,
            "min": self.min,
            "max": self.max,
            "median": self.median,
            "mean": self.mean,
            "variance": self.variance,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "StableRegion":
        return cls(**doc)


def region_stats(values: Sequence[float]) -> dict:
    """min/max/median/mean/population-variance/count of a region's values.

    Computed over the sorted values so every statistic is bit-for-bit
    independent of input order.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyRegionError("empty region: statistics need at least one value")
    if not np.all(np.isfinite(arr)):
        raise InvalidObservationError("invalid observation: non-finite value in region")
    arr = np.sort(arr)
    return {
        "count": int(arr.size),
        "min": float(arr[0]),
        "max": float(arr[-1]),
        "median": float(np.median(arr)),
        "mean": float(arr.mean()),
        "variance": float(arr.var()),
    }


def hazard_level(before: StableRegion, after: StableRegion) -> float:
    """Log ratio of the mean before the change to the mean after.

    Positive means the series dropped (a regression when higher is better);
    mirror-image changes have equal magnitude and opposite sign. Undefined
    unless both means are positive.
    """
    if before.mean <= 0 or after.mean <= 0:
        raise HazardUndefinedError(
            f"hazard undefined: non-positive mean ({before.mean}, {after.mean})"
        )
    # log(b) - log(a) rather than log(b/a): subtraction negates exactly, so
    # hazard(A,B) == -hazard(B,A) holds bit for bit.
    return log(before.mean) - log(after.mean)


@dataclass(frozen=True)
class SuspectRange:
    """Commits that could have caused a change: everything strictly after
    the previous tested revision, up to and including the change revision.

    ``truncated`` marks the degenerate case where the change sits at the
    first tested revision and no earlier history exists.
    """

    revisions: tuple[str, ...]
    truncated: bool = False

    def to_doc(self) -> dict:
        return {"revisions": list(self.revisions), "truncated": self.truncated}

    @classmethod
    def from_doc(cls, doc: dict) -> "SuspectRange":
        return cls(revisions=tuple(doc["revisions"]), truncated=doc["truncated"])


def suspect_range(
    change_revision: str,
    tested_revisions: Sequence[str],
    full_commit_log: Sequence[str],
) -> SuspectRange:
    """Suspect commits for a change detected at ``change_revision``."""
    if change_revision not in tested_revisions:
        raise UntestedRevisionError(f"not a tested revision: {change_revision}")
    log_index = {rev: i for i, rev in enumerate(full_commit_log)}
    if change_revision not in log_index:
        raise InputError(f"revision {change_revision} missing from commit log")

    tested_positions = sorted(
        log_index[rev] for rev in tested_revisions if rev in log_index
    )
    change_pos = log_index[change_revision]
    prior = [p for p in tested_positions if p < change_pos]
    if not prior:
        return SuspectRange(revisions=(change_revision,), truncated=True)
    start = prior[-1] + 1
    return SuspectRange(revisions=tuple(full_commit_log[start : change_pos + 1]))


@dataclass(frozen=True)
class ChangePoint:
    """A detected distributional change on one series.

    ``order_index`` is the detection order from the divisive search (1 =
    found first). The commit order of the change itself equals
    ``region_after.start_order``. ``hazard`` is None when either flanking
    mean is non-positive.
    """

    series: SeriesKey
    revision: str
    order_index: int
    qhat: float
    p_value: float
    hazard: float | None
    region_before: StableRegion
    region_after: StableRegion
    suspect_range: SuspectRange
    computed_at: datetime

    @property
    def id(self) -> str:
        return change_point_id(self.series, self.revision)

    @property
    def commit_order(self) -> int:
        return self.region_after.start_order

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "series": self.series.to_doc(),
            "revision": self.revision,
            "order_index": self.order_index,
            "qhat": self.qhat,
            "p_value": self.p_value,
            "hazard": self.hazard,
            "region_before": self.region_before.to_doc(),
            "region_after": self.region_after.to_doc(),
            "suspect_range": self.suspect_range.to_doc(),
            "computed_at": format_timestamp(self.computed_at),
        }

    def content_doc(self) -> dict:
        """Serialization without volatile fields; two recomputes of the same
        data compare equal on this."""
        doc = self.to_doc()
        del doc["computed_at"]
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "ChangePoint":
        return cls(
            series=SeriesKey.from_doc(doc["series"]),
            revision=doc["revision"],
            order_index=doc["order_index"],
            qhat=doc["qhat"],
            p_value=doc["p_value"],
            hazard=doc["hazard"],
            region_before=StableRegion.from_doc(doc["region_before"]),
            region_after=StableRegion.from_doc(doc["region_after"]),
            suspect_range=SuspectRange.from_doc(doc["suspect_range"]),
            computed_at=parse_timestamp(doc["computed_at"]),
        )


@dataclass(frozen=True)
class TriageRecord:
    """Immutable processed copy of a change point (acknowledged or hidden).

    Survives recomputes: the identity (series, revision) plus a snapshot of
    the point as it looked when actioned. ``stale`` marks actions taken
    against an id that no longer matched a raw point.
    """

    series: SeriesKey
    revision: str
    state: str
    actor: str
    processed_at: datetime
    stale: bool = False
    snapshot: dict | None = None

    def __post_init__(self):
        if self.state not in TRIAGE_STATES:
            raise InputError(f"unknown triage state {self.state!r}")

    @property
    def point_id(self) -> str:
        return change_point_id(self.series, self.revision)

    def to_doc(self) -> dict:
        return {
            "series": self.series.to_doc(),
            "revision": self.revision,
            "state": self.state,
            "actor": self.actor,
            "processed_at": format_timestamp(self.processed_at),
            "stale": self.stale,
            "snapshot": self.snapshot,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "TriageRecord":
        return cls(
            series=SeriesKey.from_doc(doc["series"]),
            revision=doc["revision"],
            state=doc["state"],
            actor=doc["actor"],
            processed_at=parse_timestamp(doc["processed_at"]),
            stale=doc.get("stale", False),
            snapshot=doc.get("snapshot"),
        )


@dataclass(frozen=True)
class TicketSelectors:
    """Glob patterns a ticket uses to claim series; '*' matches anything."""

    project: str = "*"
    variant: str = "*"
    task: str = "*"
    test: str = "*"

    def matches(self, key: SeriesKey) -> bool:
        return (
            fnmatchcase(key.project, self.project)
            and fnmatchcase(key.variant, self.variant)
            and fnmatchcase(key.task, self.task)
            and fnmatchcase(key.test, self.test)
        )

    def to_doc(self) -> dict:
        return {
            "project": self.project,
            "variant": self.variant,
            "task": self.task,
            "test": self.test,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "TicketSelectors":
        return cls(**{k: doc.get(k, "*") for k in ("project", "variant", "task", "test")})


@dataclass(frozen=True)
class TicketRecord:
    """A tracked issue used to annotate and auto-clear change points."""

    ticket_id: str
    selectors: TicketSelectors
    first_failing_revision: str
    fix_revision: str | None
    summary: str

    def __post_init__(self):
        if not self.ticket_id:
            raise InputError("ticket_id must be non-empty")
        if not self.first_failing_revision:
            raise InputError(f"ticket {self.ticket_id}: first_failing_revision is required")

    def to_doc(self) -> dict:
        return {
            "ticket_id": self.ticket_id,
            "selectors": self.selectors.to_doc(),
            "first_failing_revision": self.first_failing_revision,
            "fix_revision": self.fix_revision,
            "summary": self.summary,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "TicketRecord":
        return cls(
            ticket_id=doc["ticket_id"],
            selectors=TicketSelectors.from_doc(doc.get("selectors", {})),
            first_failing_revision=doc["first_failing_revision"],
            fix_revision=doc.get("fix_revision"),
            summary=doc.get("summary", ""),
        )
