"""Versioned JSON documents and CSV tables.

Floats are written with 17 significant digits so every document round-trips
exactly; nothing time-dependent is recorded, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import subprocess
from functools import lru_cache
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .circle_fourier import MeasureSpec, TrigPolynomial
from .conformal import ConformalMapRecord, map_from_density, map_from_taylor
from .series import PowerSeries

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    """A document is malformed or fails its schema."""


@lru_cache(maxsize=1)
def version_string() -> str:
    """Package version, with ``git describe`` appended when available."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return __version__
    desc = out.stdout.strip()
    return f"{__version__}+g{desc}" if out.returncode == 0 and desc else __version__


# --- serialization --------------------------------------------------------


def format_float(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x}")
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, doc: dict) -> None:
    validate(doc)
    Path(path).write_text(dumps(doc) + "\n")


def read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    validate(doc)
    return doc


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_boundary_csv(path, points: np.ndarray) -> None:
    write_csv(path, ["x", "y"], ((float(p.real), float(p.imag)) for p in points))


# --- schemas --------------------------------------------------------------

_NUM_LIST = {"type": "array", "items": {"type": "number"}}
_TRIG = {
    "type": "object",
    "required": ["N", "re", "im"],
    "properties": {"N": {"type": "integer", "minimum": 0}, "re": _NUM_LIST, "im": _NUM_LIST},
}
_SERIES = {"type": "object", "required": ["re", "im"], "properties": {"re": _NUM_LIST, "im": _NUM_LIST}}
_HEADER = {
    "schema_version": {"const": SCHEMA_VERSION},
    "version": {"type": "string"},
    "config": {"type": "object"},
}

SCHEMAS = {
    "map": {
        "type": "object",
        "required": ["schema_version", "kind", "version", "config", "mode", "a", "C", "N_s", "W", "mu_part", "f"],
        "properties": {
            **_HEADER,
            "kind": {"const": "map"},
            "mode": {"enum": ["singular", "consistent", "taylor"]},
            "a": {"type": "number", "minimum": 0},
            "C": {"type": ["number", "null"], "exclusiveMinimum": 0},
            "N_s": {"type": "integer", "minimum": 1},
            "W": _TRIG,
            "mu_part": _TRIG,
            "f": _SERIES,
        },
    },
    "branch": {
        "type": "object",
        "required": ["schema_version", "kind", "version", "config", "stop_reason", "points"],
        "properties": {
            **_HEADER,
            "kind": {"const": "branch"},
            "stop_reason": {"type": "string"},
            "points": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["a", "C", "logC", "residual", "iterations", "W"],
                    "properties": {"W": _TRIG, "a": {"type": "number"}, "C": {"type": "number"}},
                },
            },
        },
    },
    "audit": {
        "type": "object",
        "required": ["schema_version", "kind", "version", "config", "report"],
        "properties": {**_HEADER, "kind": {"const": "audit"}, "report": {"type": "object"}},
    },
    "measure": {
        "type": "object",
        "required": ["modes"],
        "properties": {
            "modes": {
                "type": "object",
                "patternProperties": {"^-?[0-9]+$": {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}},
                "additionalProperties": False,
            },
            "N": {"type": "integer", "minimum": 0},
        },
    },
}


def validate(doc, kind: str | None = None) -> None:
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    kind = kind or doc.get("kind")
    if kind not in SCHEMAS:
        raise DocumentError(f"unknown document kind {kind!r}")
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DocumentError(f"{kind} document invalid at {path}: {exc.message}") from exc


# --- encoders / decoders -------------------------------------------------


def encode_trig(p: TrigPolynomial) -> dict:
    """Coefficients for ``n = -N..N``."""
    return {"N": p.N, "is_real": p.is_real, "re": p.coeffs.real.tolist(), "im": p.coeffs.imag.tolist()}


def decode_trig(d: dict) -> TrigPolynomial:
    re, im = np.asarray(d["re"], float), np.asarray(d["im"], float)
    if re.size != 2 * d["N"] + 1 or im.size != re.size:
        raise DocumentError(f"coefficient arrays do not match N={d['N']}")
    return TrigPolynomial(re + 1j * im, d.get("is_real", True))


def encode_series(s: PowerSeries) -> dict:
    return {"re": s.taylor.real.tolist(), "im": s.taylor.imag.tolist()}


def decode_series(d: dict) -> PowerSeries:
    re, im = np.asarray(d["re"], float), np.asarray(d["im"], float)
    if re.size != im.size:
        raise DocumentError("series real/imaginary parts differ in length")
    return PowerSeries(re + 1j * im)


def header(kind: str, config: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "version": version_string(), "config": config}


def map_document(rec: ConformalMapRecord, config: dict, geometry: dict | None = None) -> dict:
    doc = header("map", config)
    doc.update(
        mode=rec.mode,
        a=rec.a,
        C=rec.C,
        N_s=rec.f.N_s - 1 if rec.mode != "taylor" else rec.f.N_s,
        hash=rec.digest(),
        W=encode_trig(rec.W),
        mu_part=encode_trig(rec.mu_part),
        f=encode_series(rec.f),
    )
    if geometry is not None:
        doc["geometry"] = geometry
    return doc


def map_from_document(doc: dict) -> ConformalMapRecord:
    """Rebuild the record from its densities and check it against the stored ``f``."""
    validate(doc, "map")
    stored = decode_series(doc["f"])
    if doc["mode"] == "taylor":
        return map_from_taylor(stored.taylor, doc["C"])
    rec = map_from_density(
        decode_trig(doc["W"]), decode_trig(doc["mu_part"]), doc["mode"], doc["a"], doc["C"], doc["N_s"]
    )
    n = min(rec.f.N_s, stored.N_s) + 1
    if np.max(np.abs(rec.f.taylor[:n] - stored.taylor[:n])) > 1e-12:
        raise DocumentError("stored Taylor coefficients disagree with the densities")
    return rec


def measure_from_document(doc: dict):
    """Real 4-fold measure density from ``{"modes": {"n": value or [re, im]}}``."""
    validate(doc, "measure")
    modes = {}
    for key, val in doc["modes"].items():
        modes[int(key)] = complex(val[0], val[1]) if isinstance(val, list) else float(val)
    N = doc.get("N", max((abs(n) for n in modes), default=0))
    spec = MeasureSpec.explicit(TrigPolynomial.from_modes(modes, N, True))
    if not spec.is_four_fold():
        raise DocumentError("measure density must only contain modes divisible by 4")
    return spec
