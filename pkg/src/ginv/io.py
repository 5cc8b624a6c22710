"""JSON file formats.

Matrix:          {"rows": m, "cols": n, "data": [[re, im], ...]}   (row-major)
Block instance:  {"m": m, "n": n, "lambda": [re, im], "A": <matrix>, ...}
Pair:            {"a": <matrix>, "b": <matrix>, "lambda": [re, im], "mu": [re, im]}
Cline pair:      {"B": <matrix>, "C": <matrix>}

Parsers reject length mismatches and non-finite values; error messages name
the offending location (e.g. ``A.data[3][1]``).
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .blocks import BlockInstance
from .core import as_matrix
from .errors import FormatError

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "complex_to_json",
    "complex_from_json",
    "block_to_json",
    "block_from_json",
    "instance_to_json",
    "instance_from_json",
    "load_json",
    "dumps",
    "digest",
]


def _num(x: float) -> float:
    # normalise -0.0 so digests do not depend on the sign of zero
    x = float(x)
    return 0.0 if x == 0 else x


def complex_to_json(z) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _finite(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where}: expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise FormatError(f"{where}: non-finite value {value!r}")
    return float(value)


def complex_from_json(obj, where: str = "value") -> complex:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise FormatError(f"{where}: expected [re, im]")
    return complex(_finite(obj[0], f"{where}[0]"), _finite(obj[1], f"{where}[1]"))


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "data": [complex_to_json(z) for z in m.ravel()],
    }


def _dim(obj, key, where):
    if key not in obj:
        raise FormatError(f"{where}: missing key {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise FormatError(f"{where}.{key}: expected a positive integer, got {v!r}")
    return v


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    rows, cols = _dim(obj, "rows", where), _dim(obj, "cols", where)
    data = obj.get("data")
    if not isinstance(data, list):
        raise FormatError(f"{where}.data: expected a list")
    if len(data) != rows * cols:
        raise FormatError(f"{where}.data: length {len(data)} != rows*cols = {rows * cols}")
    values = [complex_from_json(e, f"{where}.data[{i}]") for i, e in enumerate(data)]
    return np.array(values, dtype=np.complex128).reshape(rows, cols)


def block_to_json(inst: BlockInstance) -> dict:
    return {
        "m": inst.m,
        "n": inst.n,
        "lambda": complex_to_json(inst.lam),
        "A": matrix_to_json(inst.A),
        "B": matrix_to_json(inst.B),
        "C": matrix_to_json(inst.C),
        "D": matrix_to_json(inst.D),
    }


def block_from_json(obj, where: str = "instance") -> BlockInstance:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    m, n = _dim(obj, "m", where), _dim(obj, "n", where)
    lam = complex_from_json(obj.get("lambda", [1.0, 0.0]), f"{where}.lambda")
    blocks = {}
    for name, shape in {"A": (m, m), "B": (m, n), "C": (n, m), "D": (n, n)}.items():
        if name not in obj:
            raise FormatError(f"{where}: missing block {name!r}")
        blocks[name] = matrix_from_json(obj[name], f"{where}.{name}")
        if blocks[name].shape != shape:
            raise FormatError(f"{where}.{name}: shape {blocks[name].shape} != {shape}")
    return BlockInstance(lam=lam, **blocks)


def instance_to_json(inst) -> dict:
    """Serialize a matrix, BlockInstance or dict of matrices / scalars."""
    if isinstance(inst, BlockInstance):
        return block_to_json(inst)
    if isinstance(inst, dict):
        out = {}
        for key, value in inst.items():
            if np.ndim(value) == 0:
                out[key] = complex_to_json(value)
            else:
                out[key] = matrix_to_json(value)
        return out
    return matrix_to_json(inst)


def instance_from_json(obj, where: str = "instance"):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    if {"A", "B", "C", "D"} <= obj.keys():
        return block_from_json(obj, where)
    if {"rows", "cols", "data"} <= obj.keys():
        return matrix_from_json(obj, where)
    out = {}
    for key, value in obj.items():
        if isinstance(value, dict):
            out[key] = matrix_from_json(value, f"{where}.{key}")
        else:
            out[key] = complex_from_json(value, f"{where}.{key}")
    return out


def _reject_constant(name):
    raise FormatError(f"non-finite constant {name!r}")


def load_json(path) -> object:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def digest(doc) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
