"""HTTP surface: snapshot, command, event stream, telemetry, results."""
from __future__ import annotations

import json
import queue
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .. import telemetry
from .schemas import Command, TelemetryBatch
from .session import CommandRejected, DuplicateCommand, NotebookSession


def _sse(delta: dict) -> str:
    body = json.dumps(delta, ensure_ascii=False)
    return f"id: {delta['server_seq']}\nevent: delta\ndata: {body}\n\n"


def create_app(sessions: dict[str, NotebookSession]) -> FastAPI:
    app = FastAPI(title="branchbook service")

    def _session(nb_id: str) -> NotebookSession:
        if nb_id not in sessions:
            raise HTTPException(status_code=404, detail="UnknownNotebook")
        return sessions[nb_id]

    @app.get("/nb/{nb_id}/snapshot")
    def snapshot(nb_id: str):
        return _session(nb_id).snapshot()

    @app.post("/nb/{nb_id}/command")
    def command(nb_id: str, cmd: Command):
        session = _session(nb_id)
        try:
            return session.apply(cmd)
        except DuplicateCommand as exc:
            return JSONResponse(
                status_code=409,
                content={
                    "server_seq": exc.server_seq,
                    "client_seq": exc.client_seq,
                    "duplicate": True,
                },
            )
        except CommandRejected as exc:
            return JSONResponse(
                status_code=400,
                content={"error": exc.error, "message": exc.message},
            )

    @app.get("/nb/{nb_id}/events")
    def events(
        nb_id: str,
        after: int = 0,
        limit: Optional[int] = None,
        heartbeat: float = 15.0,
    ):
        session = _session(nb_id)
        if limit is not None and limit <= 0:
            return StreamingResponse(iter(()), media_type="text/event-stream")
        backlog, live = session.subscribe(after)

        def stream():
            sent = 0
            try:
                for delta in backlog:
                    yield _sse(delta)
                    sent += 1
                    if limit is not None and sent >= limit:
                        return
                while True:
                    try:
                        delta = live.get(timeout=heartbeat)
                    except queue.Empty:
                        yield ": ping\n\n"
                        continue
                    yield _sse(delta)
                    sent += 1
                    if limit is not None and sent >= limit:
                        return
            finally:
                session.unsubscribe(live)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/nb/{nb_id}/telemetry")
    def ingest(nb_id: str, batch: TelemetryBatch):
        session = _session(nb_id)
        try:
            count = session.ingest_telemetry(batch.events)
        except telemetry.TelemetryError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": type(exc).__name__, "message": str(exc)},
            )
        return {"count": count}

    @app.get("/nb/{nb_id}/telemetry")
    def read_telemetry(nb_id: str):
        session = _session(nb_id)
        with session.lock:
            events = [
                {"t_ms": e.t_ms, "kind": e.kind, "payload": e.payload}
                for e in session.telemetry
            ]
        return {"events": events}

    @app.get("/nb/{nb_id}/results")
    def results(nb_id: str, format: str = "csv"):
        session = _session(nb_id)
        if format not in ("csv", "json"):
            return JSONResponse(
                status_code=400,
                content={"error": "BadFormat", "message": f"unknown format '{format}'"},
            )
        payload = session.results(format)
        media = "text/csv" if format == "csv" else "application/json"
        return Response(content=payload, media_type=media)

    return app
