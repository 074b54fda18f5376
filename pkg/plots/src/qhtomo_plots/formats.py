"""Readers for the tomography pipeline's documented file formats.

Grid files (.qhg) are one UTF-8 JSON header line terminated by a newline,
followed by a raw little-endian float64 payload of n_points x n_points values
in row-major order; the header carries half_width and n_points. Metric files
are plain CSVs with a header row. This module deliberately re-implements the
parsing instead of importing the producing package, so the two sides are
coupled only through the formats themselves.
"""

from __future__ import annotations

import csv
import json

import numpy as np


class ParseError(ValueError):
    """Malformed artifact file; `offset` is the failing byte position."""

    def __init__(self, path, offset, message):
        super().__init__(f"{path}: byte {offset}: {message}")
        self.path = str(path)
        self.offset = int(offset)


def read_grid(path):
    """Returns (half_width, n_points, values) from a .qhg grid file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    newline = raw.find(b"\n")
    if newline < 0:
        raise ParseError(path, len(raw), "missing header-terminating newline")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(path, getattr(exc, "pos", 0), f"invalid JSON header: {exc}") from None
    if not isinstance(header, dict):
        raise ParseError(path, 0, "header must be a JSON object")
    for key in ("half_width", "n_points"):
        if key not in header:
            raise ParseError(path, 0, f"header missing field {key!r}")
    n = int(header["n_points"])
    payload = raw[newline + 1 :]
    expected = 8 * n * n
    if len(payload) != expected:
        raise ParseError(
            path,
            newline + 1 + min(len(payload), expected),
            f"payload has {len(payload)} bytes, expected {expected}",
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(n, n)
    return float(header["half_width"]), n, values


def grid_axis(half_width, n_points):
    """Cell-center coordinates matching the producer's grid convention."""
    step = 2.0 * half_width / n_points
    return -half_width + (np.arange(n_points) + 0.5) * step


def read_csv_rows(path, required_fields=()):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [f for f in required_fields if f not in fields]
        if missing:
            raise ParseError(path, 0, f"CSV missing column(s) {missing}")
        rows = list(reader)
    if not rows:
        raise ParseError(path, 0, "CSV has a header but no data rows")
    return rows


def read_manifest(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.pos, f"invalid manifest JSON: {exc}") from None
    if not isinstance(doc, dict) or "config" not in doc:
        raise ParseError(path, 0, "manifest must be a JSON object with a 'config' field")
    return doc
