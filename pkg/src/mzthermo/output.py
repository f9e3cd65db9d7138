"""CSV and JSON writers with embedded run metadata.

Files are byte-reproducible: floats use a fixed format, JSON keys are
sorted, and the timestamp is omitted unless explicitly requested.
"""
from __future__ import annotations

import json
import math
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from . import __version__


def fmt(v: Any) -> str:
    """Cell formatting: ints verbatim, floats with 15 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.15g}"
    return str(v)


def provenance(timestamp: bool = False) -> dict:
    """Toolkit version plus a timestamp only when asked for or pinned by SOURCE_DATE_EPOCH."""
    ts: Optional[str] = None
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        ts = datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    elif timestamp:
        ts = datetime.now(tz=timezone.utc).isoformat()
    return {"version": __version__, "timestamp": ts}


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    return obj


def dumps(doc: Mapping) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    meta: Mapping[str, Any],
) -> None:
    lines = [f"# mzthermo {__version__}"]
    for k in sorted(meta):
        lines.append(f"# {k}: {json.dumps(_jsonable(meta[k]), sort_keys=True)}")
    lines.append(",".join(header))
    for r in rows:
        lines.append(",".join(fmt(v) for v in r))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path: Path) -> tuple[list[str], list[list[float]]]:
    """Header and numeric rows of a file written by :func:`write_csv`."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [[float(c) for c in ln.split(",")] for ln in lines[1:]]


def write_json(
    path: Path,
    spec: Mapping,
    seeds: Any,
    results: Sequence,
    timestamp: bool = False,
    extra: Optional[Mapping] = None,
) -> None:
    doc = {"spec": spec, "seeds": seeds, "results": list(results), "provenance": provenance(timestamp)}
    if extra:
        doc.update(extra)
    Path(path).write_text(dumps(doc), encoding="utf-8")
