"""
File formats.

Time series:
    delimited text, one row per sample, one column per channel. Commas,
    semicolons, tabs or spaces separate values; a non-numeric first line is
    treated as a header; blank lines and lines starting with '#' are skipped.

Models (JSON):
    {"kind": "innovations_model", "name": ..., "n_x": 2, "n_y": 2,
     "A": [[...]], "K": [[...]], "Q": [[...]], "C": [[...]]}

Reports (JSON):
    arbitrary nested dictionaries; floats are written with repr precision so
    every double round-trips exactly. NaN and infinities are written as null.

Frequency responses:
    two columns "omega value", 17 significant digits, for external plotting.
"""

import json
import math
import re
from pathlib import Path
from typing import Any, Dict, Sequence, Union

import numpy as np

from ssicert.core.errors import DimensionMismatch, ParseError
from ssicert.core.models import InnovationsModel, TimeSeries

PathLike = Union[str, Path]

_SEPARATOR = re.compile(r"[,;\t ]+")
MODEL_KIND = "innovations_model"


def _split(line: str):
    return [tok for tok in _SEPARATOR.split(line.strip()) if tok]


def _column_of(line: str, index: int) -> int:
    """1-based character column where token ``index`` starts."""
    position = 0
    for k, match in enumerate(re.finditer(r"[^,;\t ]+", line)):
        if k == index:
            return match.start() + 1
        position = match.end()
    return position + 1


def read_timeseries(path: PathLike) -> TimeSeries:
    """
    Read a delimited text time series.

    Raises:
        ParseError: on a non-numeric value or a row of the wrong length,
            naming the offending line and column.
    """
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = _split(line)
            try:
                values = [float(tok) for tok in tokens]
            except ValueError:
                if not rows and width is None:
                    # header
                    width = len(tokens)
                    continue
                bad = next(i for i, tok in enumerate(tokens) if not _is_number(tok))
                raise ParseError(f"{path}: non-numeric value {tokens[bad]!r}",
                                 lineno, _column_of(raw, bad))
            if width is None:
                width = len(values)
            if len(values) != width:
                raise ParseError(f"{path}: expected {width} columns, found {len(values)}", lineno)
            if not all(math.isfinite(v) for v in values):
                raise ParseError(f"{path}: non-finite value", lineno)
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no samples found")
    return TimeSeries(np.array(rows))


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def write_timeseries(ts: TimeSeries, path: PathLike) -> Path:
    """Write a time series as CSV with a y1,y2,... header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join(f"y{i + 1}" for i in range(ts.n_y))
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for row in ts.samples:
            f.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def _matrix(doc: Dict[str, Any], key: str, shape) -> np.ndarray:
    if key not in doc:
        raise ParseError(f"model document has no field {key!r}")
    try:
        value = np.array(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"field {key!r} is not a numeric matrix")
    value = np.atleast_2d(value)
    if value.shape != shape:
        raise DimensionMismatch(f"field {key!r} has shape {value.shape}, expected {shape}")
    return value


def model_to_dict(model: InnovationsModel) -> Dict[str, Any]:
    return {
        "kind": MODEL_KIND,
        "name": model.name,
        "n_x": model.n_x,
        "n_y": model.n_y,
        "A": model.A.tolist(),
        "K": model.K.tolist(),
        "Q": model.Q.tolist(),
        "C": model.C.tolist(),
    }


def model_from_dict(doc: Dict[str, Any]) -> InnovationsModel:
    """
    Build an innovations model from its document form.

    Raises:
        ParseError: on missing or non-numeric fields.
        DimensionMismatch: if a matrix disagrees with n_x / n_y.
    """
    if doc.get("kind", MODEL_KIND) != MODEL_KIND:
        raise ParseError(f"unsupported model kind {doc.get('kind')!r}")
    try:
        n, ny = int(doc["n_x"]), int(doc["n_y"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("model document needs integer fields n_x and n_y")
    return InnovationsModel(
        A=_matrix(doc, "A", (n, n)),
        K=_matrix(doc, "K", (n, ny)),
        Q=_matrix(doc, "Q", (ny, ny)),
        C=_matrix(doc, "C", (ny, n)),
        name=doc.get("name"),
    )


def _load_json(path: PathLike) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno)


def load_model(path: PathLike) -> InnovationsModel:
    """Read an innovations model from JSON."""
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: model document must be a JSON object")
    return model_from_dict(doc)


def save_model(model: InnovationsModel, path: PathLike) -> Path:
    """Write an innovations model as JSON."""
    return save_report(model_to_dict(model), path)


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def save_report(report: Dict[str, Any], path: PathLike) -> Path:
    """Write a report dictionary as indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_plain(report), f, indent=2)
        f.write("\n")
    return path


def load_report(path: PathLike) -> Dict[str, Any]:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: report must be a JSON object")
    return doc


def write_frequency_response(path: PathLike, omegas: Sequence[float],
                             values: Sequence[float]) -> Path:
    """Write 'omega value' rows with 17 significant digits."""
    omegas = np.asarray(omegas, dtype=float)
    values = np.asarray(values, dtype=float)
    if omegas.shape != values.shape:
        raise DimensionMismatch("omegas and values must have the same length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("# omega value\n")
        for w, v in zip(omegas, values):
            f.write(f"{w:.17g} {v:.17g}\n")
    return path
