"""File formats and atomic persistence.

Binary artifacts share one convention: a single UTF-8 JSON header line
terminated by a newline, followed by a raw little-endian payload. All writes
go through a temp-file-plus-rename so readers never observe partial files.
Parse failures raise ParseError carrying the byte offset of the problem.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile

import numpy as np

from .simulate import HomodyneDataset, NoiseModel
from .states import DensityMatrix, StateSpec, WignerGrid
from .tomography import Sinogram

DATASET_SUFFIX = ".qhd"
GRID_SUFFIX = ".qhg"
SINOGRAM_SUFFIX = ".qhs"
DENSITY_MATRIX_SUFFIX = ".qhm"


class ParseError(ValueError):
    """Malformed artifact file; `offset` is the failing byte position."""

    def __init__(self, path, offset, message):
        super().__init__(f"{path}: byte {offset}: {message}")
        self.path = str(path)
        self.offset = int(offset)


def atomic_write_bytes(path, payload: bytes):
    """Write payload to path via a same-directory temp file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def _pack(header: dict, payload: bytes):
    return json.dumps(header, sort_keys=True).encode("utf-8") + b"\n" + payload


def _read_header(path):
    """Returns (header dict, payload bytes, payload byte offset)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    newline = raw.find(b"\n")
    if newline < 0:
        raise ParseError(path, len(raw), "missing header-terminating newline")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        pos = getattr(exc, "pos", getattr(exc, "start", 0))
        raise ParseError(path, pos, f"invalid JSON header: {exc}") from None
    if not isinstance(header, dict):
        raise ParseError(path, 0, "header must be a JSON object")
    return header, raw[newline + 1 :], newline + 1


def _require(header, path, *keys):
    for key in keys:
        if key not in header:
            raise ParseError(path, 0, f"header missing field {key!r}")


def _payload_floats(path, payload, offset, count):
    expected = 8 * count
    if len(payload) != expected:
        raise ParseError(
            path, offset + min(len(payload), expected), f"payload has {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype="<f8").copy()


def write_dataset(path, data: HomodyneDataset):
    header = {
        "n": data.n,
        "eta": data.noise.eta,
        "gamma": data.noise.gamma,
        "seed": data.seed,
        "state": json.loads(data.state.to_json()),
    }
    interleaved = np.empty(2 * data.n)
    interleaved[0::2] = data.z
    interleaved[1::2] = data.phi
    atomic_write_bytes(path, _pack(header, interleaved.astype("<f8").tobytes()))


def read_dataset(path) -> HomodyneDataset:
    header, payload, offset = _read_header(path)
    _require(header, path, "n", "eta", "seed", "state")
    n = int(header["n"])
    flat = _payload_floats(path, payload, offset, 2 * n)
    return HomodyneDataset(
        z=flat[0::2],
        phi=flat[1::2],
        noise=NoiseModel(float(header["eta"])),
        seed=int(header["seed"]),
        state=StateSpec.from_json(header["state"]),
    )


def dataset_to_csv(path, data: HomodyneDataset):
    lines = ["z,phi"]
    lines += [f"{z!r},{p!r}" for z, p in zip(data.z, data.phi)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_grid(path, grid: WignerGrid):
    header = {"half_width": grid.half_width, "n_points": grid.n_points, "dtype": "f64-le"}
    atomic_write_bytes(path, _pack(header, grid.values.astype("<f8").tobytes()))


def read_grid(path) -> WignerGrid:
    header, payload, offset = _read_header(path)
    _require(header, path, "half_width", "n_points")
    n = int(header["n_points"])
    flat = _payload_floats(path, payload, offset, n * n)
    return WignerGrid(float(header["half_width"]), n, flat.reshape(n, n))


def write_sinogram(path, sino: Sinogram):
    header = {
        "n_angles": sino.n_angles,
        "n_radial": sino.n_radial,
        "radial_half_width": sino.radial_half_width,
        "dtype": "f64-le",
    }
    atomic_write_bytes(path, _pack(header, sino.values.astype("<f8").tobytes()))


def read_sinogram(path) -> Sinogram:
    header, payload, offset = _read_header(path)
    _require(header, path, "n_angles", "n_radial", "radial_half_width")
    n_angles, n_radial = int(header["n_angles"]), int(header["n_radial"])
    flat = _payload_floats(path, payload, offset, n_angles * n_radial)
    return Sinogram(
        n_angles, n_radial, float(header["radial_half_width"]), flat.reshape(n_angles, n_radial)
    )


def write_density_matrix(path, rho: DensityMatrix):
    header = {"dim": rho.dim, "layout": "row-major", "dtype": "complex128-interleaved"}
    atomic_write_bytes(path, _pack(header, rho.entries.astype("<c16").tobytes()))


def read_density_matrix(path) -> DensityMatrix:
    header, payload, offset = _read_header(path)
    _require(header, path, "dim")
    dim = int(header["dim"])
    expected = 16 * dim * dim
    if len(payload) != expected:
        raise ParseError(
            path, offset + min(len(payload), expected), f"payload has {len(payload)} bytes, expected {expected}"
        )
    entries = np.frombuffer(payload, dtype="<c16").copy().reshape(dim, dim)
    return DensityMatrix(dim, entries)


def write_estimate_sidecar(path, result, seed, state: StateSpec):
    doc = {
        "h": result.h,
        "gamma": result.gamma,
        "n": result.n,
        "method": result.method,
        "seed": seed,
        "state": json.loads(state.to_json()),
    }
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def write_csv(path, fieldnames, rows):
    """CSV with repr-round-trippable floats, written atomically."""
    import io as _io

    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    atomic_write_text(path, buf.getvalue())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def sha256_text(text: str):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
