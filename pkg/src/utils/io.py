"""
Report writers: JSON, CSV and gnuplot data files
"""

import csv
import json
import math
import os
from datetime import datetime, timezone
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from config.settings import CSV_DELIMITER, FLOAT_FORMAT


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats for JSON"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return repr(value)
        return value
    return value


def format_float(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def _timestamp_line(comment: str) -> str:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return f"{comment} generated {stamp}\n"


def write_json(path: str, payload: Any) -> str:
    """UTF-8 JSON with sorted keys; floats use round-trip repr"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_plain(payload), handle, sort_keys=True, indent=2)
        handle.write("\n")
    return path


def write_csv(
    path: str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    timestamp: bool = True,
) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if timestamp:
            handle.write(_timestamp_line("#"))
        writer = csv.writer(handle, delimiter=CSV_DELIMITER, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_float(v) for v in row])
    return path


def write_gnuplot(
    path: str,
    header: Sequence[str],
    blocks: Iterable[Sequence[Sequence[Any]]],
    timestamp: bool = True,
    titles: Optional[Sequence[str]] = None,
) -> str:
    """Whitespace-separated blocks, two blank lines between data sets"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        if timestamp:
            handle.write(_timestamp_line("#"))
        handle.write("# " + " ".join(header) + "\n")
        for index, block in enumerate(blocks):
            if index:
                handle.write("\n\n")
            if titles is not None:
                handle.write(f"# {titles[index]}\n")
            for row in block:
                handle.write(" ".join(format_float(v) for v in row) + "\n")
    return path
