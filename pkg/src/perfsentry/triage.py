"""Triage views over the store: grouped lists, ticket matching, trend data,
and the audit report.

A raw change point is always in exactly one of three buckets:

* ticket-matched: a tracked issue already covers it; suppressed from both
  lists (ticket precedence is evaluated first);
* processed: someone acknowledged or hid it;
* unprocessed: still waiting for triage.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from fnmatch import fnmatchcase
from typing import Sequence

from perfsentry.errors import InputError
from perfsentry.model import (
    ChangePoint,
    SeriesKey,
    TicketRecord,
    TriageRecord,
    format_timestamp,
)
from perfsentry.store import Store

SORT_KEYS = ("hazard", "date", "test")
DEFAULT_EXCLUDED_TAGS = ("canary", "informational")


@dataclass(frozen=True)
class TriageFilter:
    """Listing controls; patterns are shell globs."""

    processed: bool = False
    project: str = "*"
    variant: str = "*"
    task: str = "*"
    test: str = "*"
    min_hazard: float | None = None
    sort: str = "hazard"
    exclude_tags: tuple[str, ...] = DEFAULT_EXCLUDED_TAGS

    def __post_init__(self):
        if self.sort not in SORT_KEYS:
            raise InputError(f"sort must be one of {SORT_KEYS}, got {self.sort!r}")
        if self.min_hazard is not None and self.min_hazard < 0:
            raise InputError(f"min_hazard must be >= 0, got {self.min_hazard}")

    def matches_key(self, key: SeriesKey) -> bool:
        return (
            fnmatchcase(key.project, self.project)
            and fnmatchcase(key.variant, self.variant)
            and fnmatchcase(key.task, self.task)
            and fnmatchcase(key.test, self.test)
        )


@dataclass(frozen=True)
class TicketMatch:
    ticket: TicketRecord
    matched_on: str  # "first_failing" | "fix"
    matched_revision: str
    ambiguous: bool  # ticket revision is inside the range but was never tested

    def to_doc(self) -> dict:
        return {
            "ticket_id": self.ticket.ticket_id,
            "summary": self.ticket.summary,
            "matched_on": self.matched_on,
            "matched_revision": self.matched_revision,
            "ambiguous": self.ambiguous,
        }


def match_tickets(
    tickets: Sequence[TicketRecord], key: SeriesKey, points: Sequence[ChangePoint]
) -> dict[str, list[TicketMatch]]:
    """Ticket annotations per change-point id.

    A ticket annotates a point when its selectors match the series and its
    first-failing or fix revision falls inside the point's suspect range.
    A match on an untested in-range revision is flagged ambiguous.
    """
    out: dict[str, list[TicketMatch]] = {}
    relevant = [t for t in tickets if t.selectors.matches(key)]
    if not relevant:
        return out
    for point in points:
        in_range = set(point.suspect_range.revisions)
        matches = []
        for ticket in relevant:
            for attr, label in (
                ("first_failing_revision", "first_failing"),
                ("fix_revision", "fix"),
            ):
                revision = getattr(ticket, attr)
                if revision and revision in in_range:
                    matches.append(
                        TicketMatch(
                            ticket=ticket,
                            matched_on=label,
                            matched_revision=revision,
                            ambiguous=revision != point.revision,
                        )
                    )
        if matches:
            out[point.id] = matches
    return out


def _ticket_matches_identity(
    tickets: Sequence[TicketRecord], key: SeriesKey, revision: str
) -> bool:
    """Exact-revision ticket match, for identities whose raw point is gone."""
    return any(
        t.selectors.matches(key)
        and revision in (t.first_failing_revision, t.fix_revision)
        for t in tickets
    )


@dataclass
class PointView:
    """One change point dressed for display."""

    point: ChangePoint
    build_date: str | None
    triage_state: str  # unprocessed | acknowledged | hidden
    tickets: list[TicketMatch] = field(default_factory=list)
    tags: tuple[str, ...] = ()
    direction: str = "higher-is-better"

    def to_doc(self) -> dict:
        doc = self.point.to_doc()
        doc["date"] = self.build_date
        doc["triage_state"] = self.triage_state
        doc["tickets"] = [m.to_doc() for m in self.tickets]
        doc["tags"] = list(self.tags)
        doc["direction"] = self.direction
        return doc


def _collect_views(store: Store, flt: TriageFilter) -> list[PointView]:
    latest_triage = store.latest_triage()
    tickets = store.tickets()
    views: list[PointView] = []
    for key in store.series_keys():
        if not flt.matches_key(key):
            continue
        meta = store.series_meta(key)
        if any(tag in flt.exclude_tags for tag in meta.get("tags", ())):
            continue
        points = store.change_points(key)
        if not points:
            continue
        annotations = match_tickets(tickets, key, points)
        timestamps = {
            p.revision: format_timestamp(p.timestamp) for p in store.series_vector(key)
        }
        for point in points:
            record = latest_triage.get(point.id)
            state = record.state if record is not None else "unprocessed"
            views.append(
                PointView(
                    point=point,
                    build_date=timestamps.get(point.revision),
                    triage_state=state,
                    tickets=annotations.get(point.id, []),
                    tags=tuple(meta.get("tags", ())),
                    direction=meta.get("direction", "higher-is-better"),
                )
            )
    return views


def _passes_hazard(view: PointView, flt: TriageFilter) -> bool:
    if flt.min_hazard is None:
        return True
    return view.point.hazard is not None and abs(view.point.hazard) >= flt.min_hazard


def _sort_views(views: list[PointView], sort: str) -> list[PointView]:
    if sort == "hazard":
        # Largest |hazard| first; points with no hazard sink to the bottom.
        return sorted(
            views,
            key=lambda v: (
                v.point.hazard is None,
                -(abs(v.point.hazard) if v.point.hazard is not None else 0.0),
                v.point.series.test,
            ),
        )
    if sort == "date":
        return sorted(views, key=lambda v: (v.build_date or "", v.point.series.test), reverse=True)
    return sorted(views, key=lambda v: (v.point.series.test, v.point.series.id))


def encode_cursor(order: int, project: str, revision: str) -> str:
    payload = json.dumps([order, project, revision]).encode("utf-8")
    return base64.urlsafe_b64encode(payload).decode("ascii")


def decode_cursor(cursor: str) -> tuple[int, str, str]:
    try:
        order, project, revision = json.loads(base64.urlsafe_b64decode(cursor))
        return int(order), str(project), str(revision)
    except Exception:
        raise InputError(f"bad cursor {cursor!r}") from None


@dataclass
class RevisionGroup:
    project: str
    revision: str
    order: int
    date: str | None
    views: list[PointView]
    summary: dict

    def to_doc(self) -> dict:
        return {
            "project": self.project,
            "revision": self.revision,
            "order": self.order,
            "date": self.date,
            "points": [v.to_doc() for v in self.views],
            "summary": self.summary,
        }


def grouped_change_points(
    store: Store,
    flt: TriageFilter,
    limit: int | None = None,
    cursor: str | None = None,
) -> tuple[list[RevisionGroup], str | None]:
    """Triage lists grouped by revision, newest first, cursor-paginated.

    The unprocessed view excludes triaged points and anything a ticket
    already covers; the processed view shows triaged points until a ticket
    covers them.
    """
    views = _collect_views(store, flt)

    selected: list[PointView] = []
    for view in views:
        if view.tickets:
            continue  # ticket precedence: covered points leave both lists
        if flt.processed != (view.triage_state != "unprocessed"):
            continue
        if not _passes_hazard(view, flt):
            continue
        selected.append(view)

    by_group: dict[tuple[str, str], list[PointView]] = {}
    for view in selected:
        by_group.setdefault((view.point.series.project, view.point.revision), []).append(view)

    groups = []
    for (project, revision), members in by_group.items():
        order = store.commit_order(project, revision) or 0
        states = [v.triage_state for v in members]
        groups.append(
            RevisionGroup(
                project=project,
                revision=revision,
                order=order,
                date=max((v.build_date for v in members if v.build_date), default=None),
                views=_sort_views(members, flt.sort),
                summary={
                    "total": len(members),
                    "unprocessed": states.count("unprocessed"),
                    "acknowledged": states.count("acknowledged"),
                    "hidden": states.count("hidden"),
                },
            )
        )
    groups.sort(key=lambda g: (-g.order, g.project, g.revision))

    if cursor is not None:
        mark = decode_cursor(cursor)
        groups = [
            g for g in groups if (-g.order, g.project, g.revision) > (-mark[0], mark[1], mark[2])
        ]
    next_cursor = None
    if limit is not None and len(groups) > limit:
        groups = groups[:limit]
        last = groups[-1]
        next_cursor = encode_cursor(last.order, last.project, last.revision)
    return groups, next_cursor


def trend_data(store: Store, key: SeriesKey) -> dict:
    """Everything a trend graph needs: values, tiled stable-region segments,
    change points with their triage state, and ticket markers."""
    points = store.series_vector(key)
    change_points = store.change_points(key)
    latest_triage = store.latest_triage()
    tickets = store.tickets()
    annotations = match_tickets(tickets, key, change_points)
    meta = store.series_meta(key)

    # Consecutive regions share boundaries, so the chain
    # [before(p1), after(p1)=before(p2), ...] tiles the analyzed window.
    segments = []
    if change_points:
        ordered = sorted(change_points, key=lambda p: p.commit_order)
        segments = [ordered[0].region_before.to_doc()] + [
            p.region_after.to_doc() for p in ordered
        ]

    point_docs = []
    for point in sorted(change_points, key=lambda p: p.commit_order):
        record = latest_triage.get(point.id)
        doc = point.to_doc()
        doc["triage_state"] = record.state if record is not None else "unprocessed"
        doc["tickets"] = [m.to_doc() for m in annotations.get(point.id, [])]
        point_docs.append(doc)

    tested = {p.revision for p in points}
    order_of = {p.revision: p.order for p in points}
    markers = []
    seen = set()
    for matches in annotations.values():
        for m in matches:
            plot_rev = m.matched_revision if m.matched_revision in tested else None
            if plot_rev is None:
                # Untested ticket revision: pin the marker to the tested
                # boundary of the range it fell in (the point's revision).
                for point in change_points:
                    if m.matched_revision in point.suspect_range.revisions:
                        plot_rev = point.revision
                        break
            if plot_rev is None or (m.ticket.ticket_id, plot_rev) in seen:
                continue
            seen.add((m.ticket.ticket_id, plot_rev))
            markers.append(
                {
                    "ticket_id": m.ticket.ticket_id,
                    "summary": m.ticket.summary,
                    "revision": plot_rev,
                    "order": order_of[plot_rev],
                    "matched_on": m.matched_on,
                }
            )
    markers.sort(key=lambda m: (m["order"], m["ticket_id"]))

    return {
        "series": key.to_doc(),
        "series_id": key.id,
        "meta": meta,
        "values": [p.to_doc() for p in points],
        "segments": segments,
        "change_points": point_docs,
        "tickets": markers,
    }


def audit_report(store: Store) -> dict:
    """Post-hoc effectiveness counters over triage history.

    Counts identities by their latest triage state:
    acknowledged-but-no-raw-point, acknowledged-without-ticket, and
    hidden-with-ticket.
    """
    latest = store.latest_triage()
    tickets = store.tickets()
    raw_by_id: dict[str, ChangePoint] = {}
    for key in store.series_keys():
        for point in store.change_points(key):
            raw_by_id[point.id] = point

    ack_without_raw = 0
    ack_without_ticket = 0
    hidden_with_ticket = 0
    for pid, record in latest.items():
        raw = raw_by_id.get(pid)
        if raw is not None:
            matched = bool(match_tickets(tickets, record.series, [raw]).get(pid))
        else:
            matched = _ticket_matches_identity(tickets, record.series, record.revision)
        if record.state == "acknowledged":
            if raw is None:
                ack_without_raw += 1
            if not matched:
                ack_without_ticket += 1
        elif record.state == "hidden" and matched:
            hidden_with_ticket += 1

    return {
        "acknowledged_without_raw_point": ack_without_raw,
        "acknowledged_without_ticket": ack_without_ticket,
        "hidden_with_ticket": hidden_with_ticket,
    }
