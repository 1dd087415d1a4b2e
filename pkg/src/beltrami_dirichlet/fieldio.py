"""Serialisation of complex grid fields.

CSV: header ``x,y,re,im`` then one row per node, rows of the grid outermost.
Binary: the four bytes ``CFLD`` followed by little-endian float64 quadruples
``(x, y, re, im)`` in the same order.  Both forms are self-describing: the
grid is recovered from the node coordinates.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import ComplexField, GridSpec

MAGIC = b"CFLD"
CSV_HEADER = ["x", "y", "re", "im"]


class FieldFormatError(ValueError):
    pass


def _quadruples(field: ComplexField) -> np.ndarray:
    spec = field.spec
    zz = spec.z
    return np.column_stack([zz.real.ravel(), zz.imag.ravel(),
                            field.values.real.ravel(), field.values.imag.ravel()])


def _from_quadruples(q: np.ndarray) -> ComplexField:
    count = q.shape[0]
    n = int(round(np.sqrt(count)))
    if n * n != count:
        raise FieldFormatError(f"{count} samples do not form a square grid")
    x = q[:n, 0]
    y = q[::n, 1]
    step = x[1] - x[0]
    half_width = n * step / 2.0
    center = complex(x[0] + half_width, y[0] + half_width)
    spec = GridSpec(center, half_width, n)
    if not (np.allclose(q[:, 0], np.tile(spec.x, n), atol=1e-9 * half_width)
            and np.allclose(q[:, 1], np.repeat(spec.y, n), atol=1e-9 * half_width)):
        raise FieldFormatError("node coordinates are not a uniform row-major grid")
    values = (q[:, 2] + 1j * q[:, 3]).reshape(n, n)
    return ComplexField(spec, values, extended=not np.all(np.isfinite(values)))


def write_csv(field: ComplexField, path) -> None:
    q = _quadruples(field)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in q:
            w.writerow([repr(float(v)) for v in row])


def read_csv(path) -> ComplexField:
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
        if header != CSV_HEADER:
            raise FieldFormatError(f"expected header {','.join(CSV_HEADER)}, got {header}")
        q = np.loadtxt(fh, delimiter=",", ndmin=2)
    return _from_quadruples(q)


def write_binary(field: ComplexField, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_quadruples(field).astype("<f8").tobytes())


def read_binary(path) -> ComplexField:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise FieldFormatError("missing CFLD magic")
    body = raw[4:]
    if len(body) % 32:
        raise FieldFormatError("truncated CFLD payload")
    q = np.frombuffer(body, dtype="<f8").reshape(-1, 4)
    return _from_quadruples(q)


def read_field(path) -> ComplexField:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    return read_binary(path) if head == MAGIC else read_csv(path)


def write_field(field: ComplexField, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        write_csv(field, path)
    else:
        write_binary(field, path)
