"""HTTP ingestion service for telemetry events.

POST /v1/events takes a JSON array of wire-format events and answers
with an acknowledgement; malformed bodies get 400, storage trouble 503.
GET /v1/events mirrors the store's query filters. GET /healthz says ok.
"""

from __future__ import annotations

import json
from typing import Iterable

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .telemetry import EventStore, StorageError, parse_rfc3339_utc, ValidationError


def create_app(store: EventStore) -> FastAPI:
    app = FastAPI(title="ccpa-optout telemetry", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.post("/v1/events")
    async def ingest(request: Request) -> JSONResponse:
        raw = await request.body()
        try:
            batch = json.loads(raw)
        except ValueError:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        if not isinstance(batch, list):
            return JSONResponse({"error": "body must be a JSON array of events"}, status_code=400)
        try:
            ack = store.ingest(batch)
        except StorageError as exc:
            return JSONResponse({"error": str(exc), "retryable": True}, status_code=503)
        return JSONResponse(
            {
                "accepted": ack.accepted,
                "rejected": [{"index": i, "reason": reason} for i, reason in ack.rejected],
            }
        )

    @app.get("/v1/events")
    def query(
        user_id: str | None = None,
        condition: str | None = None,
        event_kind: list[str] | None = Query(default=None),
        ts_from: str | None = None,
        ts_to: str | None = None,
    ) -> JSONResponse:
        try:
            start = parse_rfc3339_utc(ts_from) if ts_from else None
            end = parse_rfc3339_utc(ts_to) if ts_to else None
        except ValidationError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        time_range = (start, end) if (start or end) else None
        events = store.query(
            user_id=user_id,
            condition=condition,
            event_kinds=event_kind,
            time_range=time_range,
        )
        return JSONResponse([e.to_wire() for e in events])

    return app


def run_server(store_path: str, host: str = "127.0.0.1", port: int = 8080) -> None:
    import uvicorn

    app = create_app(EventStore(store_path))
    uvicorn.run(app, host=host, port=port, log_level="warning")
