"""
FastAPI batch surface for scenario evaluation
"""

import json
import logging
import os
from pathlib import Path

from dotenv import load_dotenv
from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.concurrency import run_in_threadpool
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .errors import (
    ConfigError,
    ContractError,
    EventClockError,
    EventNeverHappens,
    ResourceError,
    UnreadableConfig,
)
from .exporter import ReportExporter
from .scenario import parse_scenario, run_scenario, sweep_scenario
from .schema import report_json_schema

logger = logging.getLogger(__name__)

load_dotenv()


def settings() -> tuple[str, int]:
    """Host and port from EVENTCLOCK_HOST / EVENTCLOCK_PORT."""
    return (
        os.getenv("EVENTCLOCK_HOST", "127.0.0.1"),
        int(os.getenv("EVENTCLOCK_PORT", "8000")),
    )


def output_dir() -> Path | None:
    value = os.getenv("EVENTCLOCK_OUTPUT_DIR")
    return Path(value) if value else None


def _status(e: EventClockError) -> int:
    if isinstance(e, (ConfigError, ContractError, UnreadableConfig)):
        return 400
    if isinstance(e, EventNeverHappens):
        return 422
    if isinstance(e, ResourceError):
        return 413
    return 500


def _raise_http(e: EventClockError):
    detail = {"error": e.kind, "field": getattr(e, "field", None),
              "message": getattr(e, "message", None) or str(e)}
    raise HTTPException(status_code=_status(e), detail=detail) from e


async def _read_config(file: UploadFile):
    raw = await file.read()
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise UnreadableConfig(f"{file.filename} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise UnreadableConfig(f"{file.filename} must hold a JSON object")
    return parse_scenario(data), raw


def _run_document(config, raw: bytes) -> dict:
    result = run_scenario(config)
    exporter = ReportExporter()
    out = output_dir()
    if out is not None:
        exporter.write_report(out, result, raw, config.tolerances)
    return exporter.report_document(result, raw, config.tolerances)


def _sweep_document(config, raw: bytes) -> dict:
    result = sweep_scenario(config)
    exporter = ReportExporter()
    out = output_dir()
    if out is not None:
        exporter.write_sweep(out, result, raw, config.tolerances)
    return exporter.sweep_document(result, raw, config.tolerances)


def create_app() -> FastAPI:
    app = FastAPI(title="eventclock", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    async def health_check():
        return {"status": "healthy", "version": __version__}

    @app.get("/api/schema")
    async def schema():
        return report_json_schema()

    @app.post("/api/run")
    async def run(file: UploadFile = File(...)):
        """Evaluate an uploaded scenario file and return its report document."""
        try:
            config, raw = await _read_config(file)
            # numerical work runs off the event loop
            return await run_in_threadpool(_run_document, config, raw)
        except EventClockError as e:
            logger.info("run rejected %s: %s", file.filename, e)
            _raise_http(e)

    @app.post("/api/sweep")
    async def sweep(file: UploadFile = File(...)):
        try:
            config, raw = await _read_config(file)
            return await run_in_threadpool(_sweep_document, config, raw)
        except EventClockError as e:
            logger.info("sweep rejected %s: %s", file.filename, e)
            _raise_http(e)

    return app


app = create_app()
