"""Embedded document store: results, change points, triage, tickets, commits.

A single JSON document on disk, mutated in memory under a lock and written
back atomically (temp file + rename). The interface is deliberately narrow
so a server-backed database could replace it without touching callers.

Contracts that matter to callers:

* ingestion is idempotent on (series, revision) and all-or-nothing per
  bundle;
* change points are replaced atomically per series, and a replacement that
  changes nothing semantically is a no-op (``computed_at`` alone never
  counts as a change);
* triage records are append-only and survive recomputes;
* ``point_registry`` remembers every change-point id ever stored so stale
  triage actions can still be attributed and audited.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from perfsentry.errors import (
    BundleRejectedError,
    InputError,
    StoreError,
    UnregisteredProjectError,
)
from perfsentry.model import (
    HIGHER_IS_BETTER,
    LOWER_IS_BETTER,
    ChangePoint,
    ResultPoint,
    SeriesKey,
    TicketRecord,
    TriageRecord,
    change_point_id,
    format_timestamp,
    parse_timestamp,
    utcnow,
)

BUNDLE_FIELDS = ("project", "variant", "task", "revision", "order", "timestamp", "results")
RESULT_FIELDS = ("test", "config", "measurement", "value")


@dataclass(frozen=True)
class BundleResult:
    test: str
    config: str
    measurement: str
    value: float
    tags: tuple[str, ...] = ()
    direction: str = HIGHER_IS_BETTER


@dataclass(frozen=True)
class TaskResultBundle:
    """All results of one task build at one revision, as uploaded by CI."""

    project: str
    variant: str
    task: str
    revision: str
    order: int
    timestamp: datetime
    results: tuple[BundleResult, ...]

    def series_keys(self) -> list[SeriesKey]:
        return [
            SeriesKey(
                project=self.project,
                variant=self.variant,
                task=self.task,
                test=r.test,
                config=r.config,
                measurement=r.measurement,
            )
            for r in self.results
        ]


def parse_bundle(doc: dict) -> TaskResultBundle:
    """Validate one bundle document; collects every problem before rejecting."""
    problems: list[str] = []
    for name in BUNDLE_FIELDS:
        if name not in doc:
            problems.append(f"missing field {name!r}")
    if problems:
        raise BundleRejectedError("bundle rejected", problems)

    raw_results = doc["results"]
    if not isinstance(raw_results, list) or not raw_results:
        raise BundleRejectedError(
            "bundle rejected", ["results must be a non-empty list"]
        )

    results = []
    for i, entry in enumerate(raw_results):
        for name in RESULT_FIELDS:
            if name not in entry:
                problems.append(f"results[{i}]: missing field {name!r}")
        if problems:
            continue
        value = entry["value"]
        if not isinstance(value, (int, float)) or not np.isfinite(value):
            problems.append(
                f"results[{i}] ({entry['test']}/{entry['config']}/{entry['measurement']}): "
                f"non-finite value {value!r}"
            )
            continue
        direction = entry.get("direction", HIGHER_IS_BETTER)
        if direction not in (HIGHER_IS_BETTER, LOWER_IS_BETTER):
            problems.append(f"results[{i}]: unknown direction {direction!r}")
            continue
        results.append(
            BundleResult(
                test=str(entry["test"]),
                config=str(entry["config"]),
                measurement=str(entry["measurement"]),
                value=float(value),
                tags=tuple(entry.get("tags", ())),
                direction=direction,
            )
        )
    if problems:
        raise BundleRejectedError("bundle rejected", problems)

    try:
        order = int(doc["order"])
    except (TypeError, ValueError):
        raise BundleRejectedError("bundle rejected", [f"bad order {doc['order']!r}"]) from None
    return TaskResultBundle(
        project=str(doc["project"]),
        variant=str(doc["variant"]),
        task=str(doc["task"]),
        revision=str(doc["revision"]),
        order=order,
        timestamp=parse_timestamp(doc["timestamp"]),
        results=tuple(results),
    )


def load_bundles(path: str | Path) -> list[TaskResultBundle]:
    """Read a bundle file: a single bundle object or a list of them."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read bundle file {path}: {exc}") from None
    docs = doc if isinstance(doc, list) else [doc]
    if not docs:
        raise InputError(f"no records in {path}")
    return [parse_bundle(d) for d in docs]


def load_commit_lines(path: str | Path) -> list[str]:
    """Read a commit-log file: one revision per line, newest last."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read commit log {path}: {exc}") from None
    revisions = [line.strip() for line in text.splitlines() if line.strip()]
    if not revisions:
        raise InputError(f"no records in {path}")
    return revisions


def load_tickets(path: str | Path) -> list[TicketRecord]:
    """Read a ticket file: a JSON array of ticket records."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read ticket file {path}: {exc}") from None
    docs = doc if isinstance(doc, list) else [doc]
    if not docs:
        raise InputError(f"no records in {path}")
    tickets = []
    for i, entry in enumerate(docs):
        try:
            tickets.append(TicketRecord.from_doc(entry))
        except KeyError as exc:
            raise InputError(f"ticket[{i}]: missing field {exc}") from None
    return tickets


class Store:
    """In-process document store with optional JSON persistence."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.RLock()
        self._doc = {
            "version": 1,
            "projects": {},        # project -> {"revisions": [...], "orders": {rev: int}}
            "series": {},          # series_id -> {"key", "meta", "points": {rev: {...}}}
            "change_points": {},   # series_id -> [point docs]
            "point_registry": {},  # point_id -> {"series": id, "revision": rev}
            "triage_records": [],  # append-only
            "tickets": {},         # ticket_id -> doc
        }
        if self.path is not None and self.path.exists():
            self.load()

    # ------------------------------------------------------------------
    # persistence

    def load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("version") != 1:
            raise StoreError(f"unsupported store version {doc.get('version')!r}")
        with self._lock:
            self._doc = doc

    def save(self) -> None:
        if self.path is None:
            return
        with self._lock:
            payload = json.dumps(self._doc, sort_keys=True)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=str(self.path.parent), suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # ------------------------------------------------------------------
    # commit log

    def import_commit_log(self, project: str, revisions: Sequence[str]) -> int:
        """Register/extend a project's ordered revision list (newest last).

        Re-importing a prefix-consistent list is idempotent; returns the
        number of newly appended revisions.
        """
        if not project:
            raise InputError("project must be non-empty")
        cleaned = [r.strip() for r in revisions if r.strip()]
        if not cleaned:
            raise InputError("no records: commit log is empty")
        if len(set(cleaned)) != len(cleaned):
            raise InputError("commit log contains duplicate revisions")
        with self._lock:
            entry = self._doc["projects"].setdefault(
                project, {"revisions": [], "orders": {}}
            )
            existing = entry["revisions"]
            if existing and cleaned[: len(existing)] != existing:
                raise InputError(
                    f"commit log for {project} conflicts with already-imported history"
                )
            new = cleaned[len(existing):]
            base = len(existing)
            for i, rev in enumerate(new):
                entry["orders"][rev] = base + i + 1
            entry["revisions"] = cleaned
            return len(new)

    def projects(self) -> list[str]:
        with self._lock:
            return sorted(self._doc["projects"])

    def commit_log(self, project: str) -> list[str]:
        with self._lock:
            entry = self._doc["projects"].get(project)
            return list(entry["revisions"]) if entry else []

    def commit_order(self, project: str, revision: str) -> int | None:
        with self._lock:
            entry = self._doc["projects"].get(project)
            if not entry:
                return None
            return entry["orders"].get(revision)

    # ------------------------------------------------------------------
    # results

    def ingest_bundle(self, bundle: TaskResultBundle) -> int:
        """Unbundle into per-series points; returns series actually updated.

        All-or-nothing: the bundle is fully validated against the commit log
        before anything is written. Re-ingesting an identical bundle updates
        nothing.
        """
        with self._lock:
            entry = self._doc["projects"].get(bundle.project)
            if entry is None:
                raise UnregisteredProjectError(
                    f"unregistered project {bundle.project!r}: import its commit log first"
                )
            known = entry["orders"].get(bundle.revision)
            if known is not None and known != bundle.order:
                raise BundleRejectedError(
                    "bundle rejected",
                    [
                        f"order {bundle.order} conflicts with commit-log order "
                        f"{known} for revision {bundle.revision}"
                    ],
                )
            if known is None:
                top = max(entry["orders"].values(), default=0)
                if bundle.order <= top:
                    raise BundleRejectedError(
                        "bundle rejected",
                        [
                            f"revision {bundle.revision} is not in the commit log and its "
                            f"order {bundle.order} does not extend it (max {top})"
                        ],
                    )
                entry["revisions"].append(bundle.revision)
                entry["orders"][bundle.revision] = bundle.order

            updated = 0
            for key, result in zip(bundle.series_keys(), bundle.results):
                series = self._doc["series"].setdefault(
                    key.id,
                    {
                        "key": key.to_doc(),
                        "meta": {"direction": result.direction, "tags": sorted(result.tags)},
                        "points": {},
                    },
                )
                point_doc = {
                    "order": bundle.order,
                    "timestamp": format_timestamp(bundle.timestamp),
                    "value": result.value,
                }
                if series["points"].get(bundle.revision) != point_doc:
                    series["points"][bundle.revision] = point_doc
                    updated += 1
            return updated

    def series_keys(self, project: str | None = None) -> list[SeriesKey]:
        with self._lock:
            keys = [SeriesKey.from_doc(s["key"]) for s in self._doc["series"].values()]
        if project is not None:
            keys = [k for k in keys if k.project == project]
        return sorted(keys)

    def series_meta(self, key: SeriesKey) -> dict:
        with self._lock:
            series = self._doc["series"].get(key.id)
            if series is None:
                return {"direction": HIGHER_IS_BETTER, "tags": []}
            return dict(series["meta"])

    def series_vector(
        self, key: SeriesKey, window: tuple[int, int] | None = None
    ) -> list[ResultPoint]:
        """Results for one series sorted by commit order; [] for unknown keys.

        ``window`` filters to inclusive (low, high) commit-order bounds.
        """
        with self._lock:
            series = self._doc["series"].get(key.id)
            if series is None:
                return []
            raw = [
                (doc["order"], rev, doc["timestamp"], doc["value"])
                for rev, doc in series["points"].items()
            ]
        raw.sort()
        points = [
            ResultPoint(
                series=key,
                revision=rev,
                order=order,
                timestamp=parse_timestamp(ts),
                value=value,
            )
            for order, rev, ts, value in raw
        ]
        if window is not None:
            low, high = window
            points = [p for p in points if low <= p.order <= high]
        return points

    # ------------------------------------------------------------------
    # change points

    def change_points(self, key: SeriesKey) -> list[ChangePoint]:
        with self._lock:
            docs = list(self._doc["change_points"].get(key.id, []))
        return [ChangePoint.from_doc(d) for d in docs]

    def all_change_points(self, project: str | None = None) -> list[ChangePoint]:
        with self._lock:
            docs = [d for docs in self._doc["change_points"].values() for d in docs]
        points = [ChangePoint.from_doc(d) for d in docs]
        if project is not None:
            points = [p for p in points if p.series.project == project]
        return points

    def replace_change_points(self, key: SeriesKey, points: Sequence[ChangePoint]) -> bool:
        """Atomically swap the stored set for one series.

        Returns False (and writes nothing, keeping the previous timestamps)
        when the new set is semantically identical to the stored one.
        """
        for p in points:
            if p.series != key:
                raise StoreError(
                    f"change point for {p.series.id} passed to replace on {key.id}"
                )
        new_docs = [p.to_doc() for p in sorted(points, key=lambda p: p.commit_order)]
        with self._lock:
            old_docs = self._doc["change_points"].get(key.id, [])
            strip = lambda d: {k: v for k, v in d.items() if k != "computed_at"}
            if [strip(d) for d in old_docs] == [strip(d) for d in new_docs]:
                return False
            self._doc["change_points"][key.id] = new_docs
            for doc in new_docs:
                self._doc["point_registry"][doc["id"]] = {
                    "series": key.id,
                    "revision": doc["revision"],
                }
            return True

    def point_identity(self, point_id: str) -> tuple[SeriesKey, str] | None:
        """Resolve an id to (series, revision), even for points recomputes
        have since moved or removed."""
        with self._lock:
            entry = self._doc["point_registry"].get(point_id)
            if entry is None:
                return None
            return SeriesKey.from_id(entry["series"]), entry["revision"]

    def current_point(self, point_id: str) -> ChangePoint | None:
        identity = self.point_identity(point_id)
        if identity is None:
            return None
        key, revision = identity
        for point in self.change_points(key):
            if point.revision == revision:
                return point
        return None

    # ------------------------------------------------------------------
    # triage

    def record_triage(
        self,
        series: SeriesKey,
        revision: str,
        state: str,
        actor: str,
        stale: bool = False,
        snapshot: dict | None = None,
    ) -> TriageRecord:
        """Append a processed copy. Repeating the latest identical action is
        idempotent (no duplicate record)."""
        record = TriageRecord(
            series=series,
            revision=revision,
            state=state,
            actor=actor,
            processed_at=utcnow(),
            stale=stale,
            snapshot=snapshot,
        )
        with self._lock:
            latest = self._latest_triage().get(record.point_id)
            if latest is not None and latest["state"] == state and latest["actor"] == actor:
                return TriageRecord.from_doc(latest)
            self._doc["triage_records"].append(record.to_doc())
        return record

    def triage_records(self) -> list[TriageRecord]:
        with self._lock:
            docs = list(self._doc["triage_records"])
        return [TriageRecord.from_doc(d) for d in docs]

    def _latest_triage(self) -> dict[str, dict]:
        latest: dict[str, dict] = {}
        for doc in self._doc["triage_records"]:
            pid = change_point_id(SeriesKey.from_doc(doc["series"]), doc["revision"])
            latest[pid] = doc  # append order == chronological order
        return latest

    def latest_triage(self) -> dict[str, TriageRecord]:
        """Latest record per point identity; that state governs display."""
        with self._lock:
            latest = dict(self._latest_triage())
        return {pid: TriageRecord.from_doc(doc) for pid, doc in latest.items()}

    # ------------------------------------------------------------------
    # tickets

    def upsert_ticket(self, ticket: TicketRecord) -> None:
        with self._lock:
            self._doc["tickets"][ticket.ticket_id] = ticket.to_doc()

    def tickets(self) -> list[TicketRecord]:
        with self._lock:
            docs = list(self._doc["tickets"].values())
        return sorted(
            (TicketRecord.from_doc(d) for d in docs), key=lambda t: t.ticket_id
        )

    # ------------------------------------------------------------------
    # hashing

    def state_hash(self) -> str:
        """Digest of the semantic store content.

        ``computed_at`` timestamps are excluded: two recomputes of identical
        data hash identically regardless of when they ran.
        """
        with self._lock:
            doc = json.loads(json.dumps(self._doc, sort_keys=True))
        for docs in doc["change_points"].values():
            for point in docs:
                point.pop("computed_at", None)
        return hashlib.sha256(
            json.dumps(doc, sort_keys=True).encode("utf-8")
        ).hexdigest()

    def collections_hash(self, names: Iterable[str]) -> str:
        """Digest of selected collections verbatim (for immutability checks)."""
        with self._lock:
            subset = {name: self._doc[name] for name in names}
            payload = json.dumps(subset, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()
