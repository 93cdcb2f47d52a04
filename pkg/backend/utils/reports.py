import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from apps.grid.main import write_field_csv
from apps.grid.models import Field
from config import SRC_LOG_LEVELS, VERSION
from constants import MESSAGES
from utils.errors import SolverError, _plain

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["MAIN"])


def dumps(data: Any) -> str:
    """Byte-stable JSON: sorted keys, fixed indent, numpy values made plain."""
    return json.dumps(_plain(data), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def write_meta(output_dir: Path, command: str, status: str) -> Path:
    meta = {
        "command": command,
        "status": status,
        "version": VERSION,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    return _write(Path(output_dir) / "meta.json", dumps(meta))


def write_report(
    output_dir: Path,
    command: str,
    report: dict,
    fields: Optional[dict[str, Field]] = None,
) -> Path:
    """report.json (no timestamp), one CSV per field and meta.json."""
    output_dir = Path(output_dir)
    path = _write(output_dir / "report.json", dumps(report))
    for name, field in (fields or {}).items():
        write_field_csv(field, output_dir / f"{name}.csv")
    write_meta(output_dir, command, "ok")
    log.info(MESSAGES.REPORT_WRITTEN(path))
    return path


def write_failure(output_dir: Path, command: str, error: SolverError) -> Path:
    output_dir = Path(output_dir)
    path = _write(output_dir / "failure.json", dumps(error.to_report()))
    write_meta(output_dir, command, "failed")
    log.info(MESSAGES.REPORT_WRITTEN(path))
    return path
