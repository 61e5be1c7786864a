import os
import json
from typing import Any, Dict, List, Optional, Sequence
import logging

import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.12g'


def round_floats(data: Any, digits: int = 12) -> Any:
    """Round every float in a nested structure to ``digits`` significant digits."""
    if isinstance(data, float):
        return float(f"{data:.{digits}g}")
    if isinstance(data, dict):
        return {key: round_floats(value, digits) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [round_floats(value, digits) for value in data]
    return data


def to_json(data: Any) -> str:
    """Summary record as printed by the CLI: sorted keys, 12 significant digits."""
    return json.dumps(round_floats(data), indent=2, sort_keys=True)


def _make_parent(file_path: str) -> None:
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def save_summary(summary: Dict[str, Any], file_path: str) -> None:
    """Write a command summary to ``file_path`` exactly as it is printed."""
    try:
        _make_parent(file_path)
        with open(file_path, 'w', encoding='utf-8') as f:
            f.write(to_json(summary) + "\n")
        logger.info(f"Saved {summary.get('command', 'summary')} record to {file_path}")
    except OSError as e:
        logger.error(f"Could not write summary {file_path}: {e}")
        raise


def load_json(file_path: str) -> Dict[str, Any]:
    """Parse a JSON object from ``file_path``, e.g. a scenario file."""
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Could not read {file_path}: {e}")
        raise
    if not isinstance(data, dict):
        raise ValueError(f"{file_path} must hold a JSON object, got {type(data).__name__}")
    logger.debug(f"Loaded {len(data)} top-level keys from {file_path}")
    return data


def write_csv(rows: List[Dict[str, Any]], file_path: str, columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """
    Write rows to CSV with a fixed column order.

    Args:
        rows: One dict per row
        file_path: Destination path
        columns: Header order; defaults to the keys of the first row

    Returns:
        The DataFrame that was written
    """
    frame = pd.DataFrame(rows, columns=list(columns) if columns else None)
    _make_parent(file_path)
    frame.to_csv(file_path, index=False, float_format=FLOAT_FORMAT, encoding='utf-8')
    logger.info(f"Wrote {len(frame)} rows to {file_path}")
    return frame
