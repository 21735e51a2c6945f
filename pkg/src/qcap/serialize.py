"""JSON/CSV codecs for matrices, channels, codes and report records.

Matrix wire format: a matrix is an array of rows, each row an array of
[re, im] float pairs.  Python's json round-trips doubles through repr, so
serialization is drift-free.  CSV numerics are written with 17 significant
digits for the same reason.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Any

import numpy as np

from .errors import FormatError


def matrix_to_pairs(m: np.ndarray) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_pairs(rows: Any) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise FormatError("matrix must be a nonempty array of rows")
    width = None
    out = []
    for row in rows:
        if not isinstance(row, list) or (width is not None and len(row) != width):
            raise FormatError("matrix rows must be arrays of equal length")
        width = len(row)
        line = []
        for entry in row:
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) for x in entry)
            ):
                raise FormatError("matrix entries must be [re, im] number pairs")
            line.append(complex(entry[0], entry[1]))
        out.append(line)
    if width == 0:
        raise FormatError("matrix rows must be nonempty")
    return np.array(out, dtype=np.complex128)


def channel_to_dict(ch) -> dict:
    return {
        "name": ch.name,
        "input_dim": ch.input_dim,
        "output_dim": ch.output_dim,
        "kraus": [matrix_to_pairs(a) for a in ch.kraus_ops],
    }


def channel_from_dict(data: Any):
    from .channels import KrausChannel

    if not isinstance(data, dict):
        raise FormatError("channel record must be a JSON object")
    try:
        name = data.get("name", "")
        input_dim = data["input_dim"]
        output_dim = data["output_dim"]
        kraus = data["kraus"]
    except KeyError as exc:
        raise FormatError(f"channel record is missing field {exc}") from exc
    if not isinstance(input_dim, int) or not isinstance(output_dim, int):
        raise FormatError("input_dim and output_dim must be integers")
    if not isinstance(kraus, list) or not kraus:
        raise FormatError("kraus must be a nonempty array of matrices")
    ops = [matrix_from_pairs(mat) for mat in kraus]
    for a in ops:
        if a.shape != (output_dim, input_dim):
            raise FormatError(
                f"kraus operator has shape {a.shape}, expected ({output_dim}, {input_dim})"
            )
    return KrausChannel(input_dim=input_dim, output_dim=output_dim,
                        kraus_ops=tuple(ops), name=str(name))


def load_channel(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read channel file {path}: {exc}") from exc
    return channel_from_dict(data)


def save_channel(ch, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(channel_to_dict(ch)))


def code_to_dict(code) -> dict:
    return {
        "ambient_dim": code.ambient_dim,
        "code_dim": code.code_dim,
        "basis": matrix_to_pairs(code.basis),
    }


def code_from_dict(data: Any):
    from .codes import CodeSubspace

    if not isinstance(data, dict):
        raise FormatError("code record must be a JSON object")
    try:
        basis = matrix_from_pairs(data["basis"])
        m, k = data["ambient_dim"], data["code_dim"]
    except KeyError as exc:
        raise FormatError(f"code record is missing field {exc}") from exc
    if basis.shape != (m, k):
        raise FormatError(f"basis has shape {basis.shape}, expected ({m}, {k})")
    return CodeSubspace(ambient_dim=m, code_dim=k, basis=basis)


def jsonable(obj):
    """Convert dataclasses / numpy values / complex numbers to JSON-safe data."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_pairs(obj) if obj.ndim == 2 else [jsonable(z) for z in obj]
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def canonical_json(obj) -> str:
    """Deterministic JSON rendering: sorted keys, fixed layout, trailing newline."""
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def csv_number(x) -> str:
    """Full round-trip decimal formatting (17 significant digits) for CSV cells."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")
