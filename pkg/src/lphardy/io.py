"""Schema-checked input and deterministic JSON / CSV output."""

from __future__ import annotations

import csv
import enum
import json
import math
import sys
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .errors import SchemaError
from .polyalg import MultiPoly, SeparableRational

FLOAT_FORMAT = ".17g"


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    """``name`` like ``"rational.v1"``."""
    text = resources.files("lphardy").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def _pointer(path) -> str:
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in path]
    return "/" + "/".join(parts) if parts else ""


def validate(doc: Any, schema: str) -> None:
    """Raise :class:`SchemaError` with a JSON pointer to the first violation."""
    validator = jsonschema.Draft202012Validator(load_schema(schema))
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        e = errors[0]
        raise SchemaError(e.message, pointer=_pointer(e.absolute_path))


def rational_from_doc(doc: Any) -> SeparableRational:
    validate(doc, "rational.v1")
    n = doc["n"]
    for i, t in enumerate(doc["numerator"]):
        if len(t["index"]) != n:
            raise SchemaError(f"index has length {len(t['index'])}, expected {n}", pointer=f"/numerator/{i}/index")
    if len(doc["denominators"]) != n:
        raise SchemaError(f"expected {n} denominators, got {len(doc['denominators'])}", pointer="/denominators")
    for k, d in enumerate(doc["denominators"]):
        if all(c["re"] == 0 and c.get("im", 0) == 0 for c in d):
            raise SchemaError("denominator is identically zero", pointer=f"/denominators/{k}")
    return SeparableRational.from_json(doc)


def polynomial_from_doc(doc: Any) -> MultiPoly:
    validate(doc, "polynomial.v1")
    n = doc["n"]
    terms = []
    for i, t in enumerate(doc["terms"]):
        if len(t["index"]) != n:
            raise SchemaError(f"index has length {len(t['index'])}, expected {n}", pointer=f"/terms/{i}/index")
        terms.append((tuple(t["index"]), complex(t["re"], t.get("im", 0.0))))
    return MultiPoly.from_terms(n, terms)


def read_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}", pointer="") from exc


def read_rational(path: str) -> SeparableRational:
    return rational_from_doc(read_json(path))


def check_samples_header(header: list[str]) -> int:
    """Validate ``x1,...,xn,value``; returns ``n``."""
    validate(header, "samples.v1")
    n = len(header) - 1
    expected = [f"x{k + 1}" for k in range(n)] + ["value"]
    for i, (got, want) in enumerate(zip(header, expected)):
        if got != want:
            raise SchemaError(f"expected column {want!r}, got {got!r}", pointer=f"/{i}")
    return n


# ---------------------------------------------------------------------------
# output


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, FLOAT_FORMAT)
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, enum.Enum):
        return _encode(obj.value, indent, level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode({"re": float(obj.real), "im": float(obj.imag)}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "to_json"):
        return _encode(obj.to_json(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON with floats at 17 significant digits and non-finite values as null."""
    return _encode(obj, indent, 0) + "\n"


def write_json(obj: Any, path: str | None) -> str:
    text = dumps(obj)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def write_csv(rows: list[dict], path: str | None, columns: list[str]) -> None:
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt_float(float(r[c])) if isinstance(r[c], (float, np.floating)) else r[c] for c in columns])
    finally:
        if fh is not sys.stdout:
            fh.close()
