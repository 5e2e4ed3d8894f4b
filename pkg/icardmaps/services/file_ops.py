"""
File operations service for icardmaps.
JSON documents, selftest CSV tables and versioned names, all relative to
the data directory.
"""
import json
import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from icardmaps.services.errors import InputError

logger = logging.getLogger(__name__)

# ICARDMAPS_DATA_DIR overrides the package-local data/ directory
BASE_DIR = Path(os.environ.get("ICARDMAPS_DATA_DIR", Path(__file__).parent.parent / "data"))

CONFIG_DIR = "config_files"
REPORTS_DIR = "reports"
BOUQUETS_DIR = "bouquets"


def get_full_path(filepath: str) -> Path:
    """Resolve a data-relative path against the current BASE_DIR."""
    return BASE_DIR / filepath


def read_json(filepath: str) -> Dict[str, Any]:
    """
    Load a JSON document stored under the data directory.

    Raises:
        FileNotFoundError: the document does not exist
        json.JSONDecodeError: the document is not valid JSON
    """
    return json.loads(get_full_path(filepath).read_text(encoding="utf-8"))


def write_json(filepath: str, data: Union[Dict[str, Any], List[Any]], create_dirs: bool = True) -> str:
    """Store data as indented JSON and return the absolute path written."""
    target = get_full_path(filepath)
    if create_dirs:
        target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(data, indent=2), encoding="utf-8")
    logger.debug("wrote %s", target)
    return str(target)


def load_json_path(path: Union[str, Path]) -> Any:
    """Read a JSON input file named on the command line or in a request."""
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"input file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def file_exists(filepath: str) -> bool:
    return get_full_path(filepath).exists()


def get_file_modified_time(filepath: str) -> Optional[str]:
    """ISO timestamp of the last write, or None for a missing file."""
    target = get_full_path(filepath)
    if not target.exists():
        return None
    return datetime.fromtimestamp(target.stat().st_mtime).isoformat()


def create_versioned_filename(base_name: str, identifier: str, extension: str = "json") -> str:
    """
    Name for a saved artifact, e.g. "selftest_seed0__20240115_103000.json".

    Args:
        base_name: Artifact kind ("selftest", "engine_config")
        identifier: Short run label
        extension: Suffix without the dot
    """
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return f"{base_name}_{identifier}__{stamp}.{extension}"


def ensure_base_directories() -> None:
    for name in (CONFIG_DIR, REPORTS_DIR, BOUQUETS_DIR):
        get_full_path(name).mkdir(parents=True, exist_ok=True)


def list_files(directory: str, extension: str = ".json") -> List[str]:
    """Sorted bare filenames in a data subdirectory; empty when it is missing."""
    folder = get_full_path(directory)
    if not folder.is_dir():
        return []
    return sorted(entry.name for entry in folder.iterdir() if entry.name.endswith(extension))


def write_report_table(filepath: str, rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    """Write report rows as CSV with a fixed column order."""
    target = get_full_path(filepath)
    target.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(list(rows), columns=list(columns)).to_csv(target, index=False)
    return str(target)


def read_report_table(filepath: str) -> pd.DataFrame:
    return pd.read_csv(get_full_path(filepath))
