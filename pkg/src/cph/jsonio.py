"""JSON interchange for input documents and reports.

Matrices are row-major nested lists.  Each entry is either a real number or
a two-element ``[re, im]`` list.  Reports always write ``[re, im]`` pairs so
that they re-parse to exactly the same values.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from numbers import Real

import numpy as np

from .opcore import ToleranceConfig

__all__ = [
    "InputError",
    "InputDocument",
    "SCHEMA_VERSION",
    "parse_matrix",
    "encode_matrix",
    "load_document",
    "parse_document",
    "dump_report",
]

SCHEMA_VERSION = "1"
KINDS = ("kraus", "markov", "matrix-list")
_TOL_KEYS = ("herm_tol", "psd_tol", "eig_tol", "conv_tol", "max_iter")


class InputError(ValueError):
    """Malformed input document (CLI exit code 2)."""


@dataclass(frozen=True)
class InputDocument:
    kind: str
    matrices: list = field(repr=False)
    name: str | None
    tolerances: dict
    digest: str


def _parse_entry(x, where):
    if isinstance(x, bool):
        raise InputError(f"{where}: booleans are not numbers")
    if isinstance(x, Real):
        value = complex(float(x), 0.0)
    elif isinstance(x, list) and len(x) == 2 and all(
        isinstance(v, Real) and not isinstance(v, bool) for v in x
    ):
        value = complex(float(x[0]), float(x[1]))
    else:
        raise InputError(f"{where}: entry must be a number or a [re, im] pair, got {x!r}")
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise InputError(f"{where}: entry is not finite")
    return value


def parse_matrix(rows, where: str = "matrix") -> np.ndarray:
    """Nested list to a complex array, validating the shape."""
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputError(f"{where}: expected a non-empty list of rows")
    width = len(rows[0])
    if width == 0 or any(len(r) != width for r in rows):
        raise InputError(f"{where}: rows must be non-empty and of equal length")
    return np.array(
        [[_parse_entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(rows)],
        dtype=complex,
    )


def _clean(x: float):
    x = float(x)
    return x if math.isfinite(x) else None


def encode_matrix(M) -> list:
    """Complex array to nested ``[re, im]`` lists."""
    M = np.asarray(M, dtype=complex)
    return [[[_clean(z.real), _clean(z.imag)] for z in row] for row in M]


def parse_document(text: str) -> InputDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise InputError(f"'kind' must be one of {', '.join(KINDS)}")
    if "payload" not in doc:
        raise InputError("missing 'payload'")
    payload = doc["payload"]
    if kind == "markov":
        matrices = [parse_matrix(payload, "payload")]
    else:
        if not isinstance(payload, list) or not payload:
            raise InputError("payload must be a non-empty list of matrices")
        matrices = [parse_matrix(m, f"payload[{k}]") for k, m in enumerate(payload)]
    shapes = {m.shape for m in matrices}
    if len(shapes) != 1 or any(r != c for r, c in shapes):
        raise InputError("matrices must be square and of one common size")

    meta = doc.get("metadata") or {}
    if not isinstance(meta, dict):
        raise InputError("'metadata' must be an object")
    name = meta.get("name")
    tolerances = meta.get("tolerances") or {}
    if not isinstance(tolerances, dict) or set(tolerances) - set(_TOL_KEYS):
        raise InputError(f"metadata.tolerances accepts only {', '.join(_TOL_KEYS)}")
    try:
        ToleranceConfig().with_overrides(**tolerances)
    except (TypeError, ValueError) as exc:
        raise InputError(f"metadata.tolerances: {exc}") from None
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return InputDocument(kind, matrices, name, dict(tolerances), digest)


def load_document(path: str) -> InputDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_document(text)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _clean(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, np.ndarray):
        return encode_matrix(x) if x.ndim == 2 else _jsonable(x.tolist())
    return x


def dump_report(report: dict) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
