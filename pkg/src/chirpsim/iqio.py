"""Raw IQ sample files: interleaved little-endian float64 pairs.

The binary carries no header; a JSON sidecar at ``<path>.json`` records the
scheme, spreading factor, indices and bit payload that produced the samples.
One complex sample costs 16 bytes (I then Q, both float64, little-endian),
so any external DSP or plotting tool can consume the file directly.
"""

from __future__ import annotations

import json
import os

import numpy as np

BYTES_PER_SAMPLE = 16
SIDECAR_SCHEMA = 1


class IqFormatError(Exception):
    """Raised when an IQ file does not parse."""


def write_iq(path, samples: np.ndarray) -> None:
    samples = np.ascontiguousarray(samples, dtype="<c16")
    if samples.ndim != 1:
        raise ValueError(f"expected a 1-D sample vector, got shape {samples.shape}")
    samples.tofile(path)


def read_iq(path) -> np.ndarray:
    size = os.path.getsize(path)
    if size == 0:
        raise IqFormatError(f"{path}: empty IQ file")
    if size % BYTES_PER_SAMPLE != 0:
        raise IqFormatError(
            f"{path}: truncated I/Q pair at byte {size - (size % BYTES_PER_SAMPLE)} "
            f"(file size {size} is not a multiple of {BYTES_PER_SAMPLE})"
        )
    return np.fromfile(path, dtype="<c16")


def sidecar_path(path) -> str:
    return str(path) + ".json"


def write_sidecar(path, meta: dict) -> None:
    doc = {"schema": SIDECAR_SCHEMA, **meta}
    with open(sidecar_path(path), "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def read_sidecar(path) -> dict | None:
    p = sidecar_path(path)
    if not os.path.exists(p):
        return None
    try:
        with open(p, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise IqFormatError(f"{p}: bad sidecar: {e}") from None
