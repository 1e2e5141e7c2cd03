"""Serialisation helpers: deterministic JSON documents and delimited text."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

__all__ = ["to_jsonable", "dumps", "write_document", "write_table", "fmt_complex", "fmt_real"]


def to_jsonable(obj):
    """Recursively convert numpy / complex values; complex numbers become ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(doc) -> str:
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n"


def write_document(path, doc) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def write_table(path, header: list[str], rows, comments: list[str] = ()) -> None:
    """Tab-separated text with ``#`` comment lines and a header row; full precision."""
    lines = [f"# {c}" for c in comments]
    lines.append("\t".join(header))
    for row in rows:
        lines.append("\t".join(repr(float(v)) if not isinstance(v, (int, str)) else str(v)
                               for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def fmt_real(x: float, digits: int = 10) -> str:
    return f"{x:.{digits}g}"


def fmt_complex(z: complex, digits: int = 10) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 else "+"
    return f"{z.real:.{digits}g} {sign} {abs(z.imag):.{digits}g}i"
