"""HTTP surface for triage: change-point lists, triage actions, ticket and
result ingestion, trend data, recompute, and the audit report.

Versioned JSON contract under /api/v1. Timestamps are ISO-8601 UTC. The
companion web UI is a pure client of these endpoints and can be served
statically from the same process.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from perfsentry.errors import InputError
from perfsentry.model import SeriesKey, TicketRecord, TriageRecord
from perfsentry.pipeline import PipelineConfig, recompute_after_ingest, recompute_all
from perfsentry.store import Store, parse_bundle
from perfsentry.triage import (
    DEFAULT_EXCLUDED_TAGS,
    TriageFilter,
    audit_report,
    grouped_change_points,
    trend_data,
)


def create_app(
    store: Store,
    config: PipelineConfig | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    config = config or PipelineConfig()
    app = FastAPI(title="perfsentry", version="1")

    @app.exception_handler(InputError)
    async def _input_error(request: Request, exc: InputError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok"}

    def _filter_from_query(
        processed: bool,
        project: str,
        variant: str,
        task: str,
        test: str,
        min_hazard: float | None,
        sort: str,
        include_tags: str | None,
    ) -> TriageFilter:
        excluded = list(DEFAULT_EXCLUDED_TAGS)
        if include_tags:
            for tag in include_tags.split(","):
                tag = tag.strip()
                if tag in excluded:
                    excluded.remove(tag)
        return TriageFilter(
            processed=processed,
            project=project,
            variant=variant,
            task=task,
            test=test,
            min_hazard=min_hazard,
            sort=sort,
            exclude_tags=tuple(excluded),
        )

    @app.get("/api/v1/change-points")
    def list_change_points(
        status: str = Query("unprocessed", pattern="^(unprocessed|processed)$"),
        project: str = "*",
        variant: str = "*",
        task: str = "*",
        test: str = "*",
        min_hazard: float | None = None,
        sort: str = "hazard",
        include_tags: str | None = None,
        limit: int = Query(50, ge=1, le=500),
        cursor: str | None = None,
    ):
        flt = _filter_from_query(
            status == "processed", project, variant, task, test, min_hazard, sort, include_tags
        )
        groups, next_cursor = grouped_change_points(store, flt, limit=limit, cursor=cursor)
        return {
            "status": status,
            "groups": [g.to_doc() for g in groups],
            "next_cursor": next_cursor,
        }

    def _apply_triage(ids: list[str], state: str, actor: str) -> dict:
        if not ids:
            raise HTTPException(status_code=400, detail="ids must be a non-empty list")
        if not actor:
            raise HTTPException(status_code=400, detail="actor is required")
        records: list[TriageRecord] = []
        warnings: list[dict] = []
        unknown: list[str] = []
        for point_id in ids:
            identity = store.point_identity(point_id)
            if identity is None:
                unknown.append(point_id)
                continue
            key, revision = identity
            current = store.current_point(point_id)
            stale = current is None
            if stale:
                warnings.append({"id": point_id, "reason": "stale"})
            records.append(
                store.record_triage(
                    key,
                    revision,
                    state,
                    actor,
                    stale=stale,
                    snapshot=current.to_doc() if current else None,
                )
            )
        if unknown:
            raise HTTPException(
                status_code=404, detail=f"unknown change point ids: {unknown}"
            )
        store.save()
        return {
            "records": [r.to_doc() for r in records],
            "warnings": warnings,
        }

    @app.post("/api/v1/change-points/acknowledge")
    def acknowledge_many(payload: dict = Body(...)):
        return _apply_triage(payload.get("ids", []), "acknowledged", payload.get("actor", ""))

    @app.post("/api/v1/change-points/hide")
    def hide_many(payload: dict = Body(...)):
        return _apply_triage(payload.get("ids", []), "hidden", payload.get("actor", ""))

    @app.post("/api/v1/change-points/{point_id}/acknowledge")
    def acknowledge_one(point_id: str, payload: dict = Body(...)):
        return _apply_triage([point_id], "acknowledged", payload.get("actor", ""))

    @app.post("/api/v1/change-points/{point_id}/hide")
    def hide_one(point_id: str, payload: dict = Body(...)):
        return _apply_triage([point_id], "hidden", payload.get("actor", ""))

    @app.get("/api/v1/series/{series_id:path}/trend")
    def series_trend(series_id: str):
        key = SeriesKey.from_id(series_id)
        return trend_data(store, key)

    @app.get("/api/v1/audit")
    def audit():
        return audit_report(store)

    @app.post("/api/v1/ingest/results")
    def ingest_results(payload: dict | list = Body(...)):
        docs = payload if isinstance(payload, list) else [payload]
        bundles = [parse_bundle(d) for d in docs]
        updated = 0
        reports = []
        for bundle in bundles:
            updated += store.ingest_bundle(bundle)
            reports.append(recompute_after_ingest(store, bundle, config).to_doc())
        store.save()
        return {"bundles": len(bundles), "series_updated": updated, "recompute": reports}

    @app.post("/api/v1/ingest/tickets")
    def ingest_tickets(payload: dict | list = Body(...)):
        docs = payload if isinstance(payload, list) else [payload]
        for doc in docs:
            store.upsert_ticket(TicketRecord.from_doc(doc))
        store.save()
        return {"tickets": len(docs)}

    @app.post("/api/v1/recompute")
    def recompute(payload: dict = Body(default={})):
        project = payload.get("project")
        if project is None and not payload.get("all", False):
            raise HTTPException(
                status_code=400, detail="pass a project or set all=true"
            )
        report = recompute_all(store, project, config)
        store.save()
        return report.to_doc()

    if static_dir is not None and Path(static_dir).is_dir():
        # Mounted last so /api/* always wins.
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
