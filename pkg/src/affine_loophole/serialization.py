"""JSON forms shared by the CLI: matrices as nested ``[re, im]`` pairs."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidStateError


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    if isinstance(data, dict):
        data = data.get("matrix")
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidStateError(f"malformed matrix: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidStateError(f"matrix must be N x N x [re, im], got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def load_matrix_file(path) -> np.ndarray:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidStateError(f"cannot read matrix file {path}: {exc}") from exc
    return matrix_from_json(data)


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
