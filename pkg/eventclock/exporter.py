"""
Exporter Module
Turns scenario results into report documents, JSON and CSV.
"""

import hashlib
import io
import json
import logging
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .config import Tolerances
from .schema import ReportDocument, SweepDocument

logger = logging.getLogger(__name__)

UNITS = "hbar=1"


def _encode(value):
    """json.dumps fallback for numpy scalars and complex numbers."""
    if isinstance(value, complex | np.complexfloating):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def provenance(config_bytes: bytes, tol: Tolerances) -> dict:
    return {
        "config_sha256": hashlib.sha256(config_bytes).hexdigest(),
        "tool_version": __version__,
        "tolerances": tol.model_dump(),
    }


class ReportExporter:
    def __init__(self, generated_at: str | None = None):
        # Fixed for the exporter's lifetime so a batch shares one stamp
        self.generated_at = generated_at or _timestamp()

    def report_document(self, result, config_bytes: bytes, tol: Tolerances) -> dict:
        """
        Report document for one scenario result.

        Everything except `generated_at` is a function of the config bytes.
        """
        document = {
            "units": UNITS,
            "scenario": result.name,
            "report": result.report.to_dict(),
            "diagnostics": result.diagnostics,
            "provenance": provenance(config_bytes, tol),
            "generated_at": self.generated_at,
        }
        # Round-trip through the published schema
        ReportDocument.model_validate(json.loads(self.to_json(document)))
        return document

    def sweep_document(self, sweep, config_bytes: bytes, tol: Tolerances) -> dict:
        document = {
            "units": UNITS,
            "scenario": sweep.name,
            "kind": sweep.kind,
            "parameter": sweep.parameter,
            "rows": [asdict(row) for row in sweep.rows],
            "flags": sweep.flags,
            "provenance": provenance(config_bytes, tol),
            "generated_at": self.generated_at,
        }
        SweepDocument.model_validate(json.loads(self.to_json(document)))
        return document

    def to_json(self, document: dict) -> str:
        return json.dumps(document, sort_keys=True, indent=2, default=_encode) + "\n"

    def export_distribution_csv(self, times, p) -> bytes:
        """p(t|Π) samples with columns t, p."""
        df = pd.DataFrame({"t": np.asarray(times, dtype=float), "p": np.asarray(p, dtype=float)})
        output = io.BytesIO()
        df.to_csv(output, index=False, encoding="utf-8", float_format="%.17g")
        output.seek(0)
        return output.read()

    def export_sweep_csv(self, sweep) -> bytes:
        df = pd.DataFrame([asdict(row) for row in sweep.rows])
        output = io.BytesIO()
        df.to_csv(output, index=False, encoding="utf-8", float_format="%.17g")
        output.seek(0)
        return output.read()

    def write_report(self, out_dir: str | Path, result, config_bytes: bytes, tol: Tolerances) -> dict[str, Path]:
        """Write <name>.report.json and <name>.distribution.csv; returns the paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        document = self.report_document(result, config_bytes, tol)
        paths = {
            "report": out / f"{result.name}.report.json",
            "distribution": out / f"{result.name}.distribution.csv",
        }
        paths["report"].write_text(self.to_json(document), encoding="utf-8")
        paths["distribution"].write_bytes(
            self.export_distribution_csv(result.times, result.distribution)
        )
        logger.info("wrote %s", ", ".join(str(p) for p in paths.values()))
        return paths

    def write_sweep(self, out_dir: str | Path, sweep, config_bytes: bytes, tol: Tolerances) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        document = self.sweep_document(sweep, config_bytes, tol)
        paths = {
            "sweep": out / f"{sweep.name}.sweep.json",
            "table": out / f"{sweep.name}.sweep.csv",
        }
        paths["sweep"].write_text(self.to_json(document), encoding="utf-8")
        paths["table"].write_bytes(self.export_sweep_csv(sweep))
        logger.info("wrote %s", ", ".join(str(p) for p in paths.values()))
        return paths
