"""GLNF1 field files, CSV tables and PPM quicklooks.

GLNF1 layout (little-endian): the 5 magic bytes ``GLNF1``, u32 n, f64 L,
then n*n float64 values per component in row-major order of the internal
[i, j] arrays.  One component means a ScalarField, two a VectorField2; the
count is inferred from the payload length.  Grid centers are not stored, so
fields read back always live on the centered grid.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .fields import GridSpec, ScalarField, VectorField2

__all__ = [
    "MAGIC",
    "write_field",
    "read_field",
    "write_field_csv",
    "write_profile_csv",
    "write_ppm",
    "fmt",
]

MAGIC = b"GLNF1"
_HEAD = struct.Struct("<5sId")


def fmt(x) -> str:
    """Lossless float formatting (17 significant digits)."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def write_field(path, field) -> None:
    if isinstance(field, VectorField2):
        comps = [field.u1, field.u2]
    elif isinstance(field, ScalarField):
        comps = [field.values]
    else:
        raise TypeError("expected a ScalarField or VectorField2")
    g = field.grid
    try:
        with open(path, "wb") as fh:
            fh.write(_HEAD.pack(MAGIC, g.n, g.half_width))
            for c in comps:
                fh.write(np.ascontiguousarray(c, dtype="<f8").tobytes())
    except OSError as exc:
        raise OSError(f"cannot write field file {path}: {exc}") from exc


def read_field(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read field file {path}: {exc}") from exc
    if len(raw) < 5 or raw[:5] != MAGIC:
        raise ValueError(f"{path}: not a GLNF1 file")
    if len(raw) < _HEAD.size:
        raise ValueError(f"{path}: truncated payload")
    _, n, L = _HEAD.unpack_from(raw)
    payload = len(raw) - _HEAD.size
    block = 8 * n * n
    if n < 16 or payload not in (block, 2 * block):
        raise ValueError(f"{path}: truncated payload")
    arr = np.frombuffer(raw, dtype="<f8", offset=_HEAD.size).astype(float)
    grid = GridSpec(L, n)
    if payload == block:
        return ScalarField(grid, arr.reshape(n, n))
    return VectorField2(grid, arr.reshape(2, n, n))


def write_field_csv(path, u: VectorField2, header: dict | None = None) -> None:
    """Columns x, y, u1, u2, |u|; one row per node."""
    g = u.grid
    X, Y = g.mesh
    cols = np.stack([X.ravel(), Y.ravel(), u.u1.ravel(), u.u2.ravel(), u.modulus().ravel()], axis=1)
    with open(path, "w", newline="\n") as fh:
        for k, v in (header or {}).items():
            fh.write(f"# {k} = {v}\n")
        fh.write("x,y,u1,u2,abs_u\n")
        for row in cols:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_profile_csv(path, profile, columns=("r", "value")) -> None:
    """1D profile as two columns; kind, boundary data and parameters in header comments."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# kind = {profile.kind}\n")
        if profile.params is not None:
            p = profile.params
            fh.write(f"# epsilon = {fmt(p.epsilon)}\n# a = {fmt(p.a)}\n# chi = {fmt(p.chi)}\n")
        for k, v in profile.bc.items():
            fh.write(f"# {k} = {v if isinstance(v, str) else fmt(v)}\n")
        fh.write(f"# residual = {fmt(profile.residual)}\n")
        fh.write(",".join(columns) + "\n")
        for r, v in zip(profile.grid.r, profile.values):
            fh.write(f"{r:.17g},{v:.17g}\n")


def write_ppm(path, field: ScalarField | np.ndarray, markers=(), grid: GridSpec | None = None) -> None:
    """Binary P6 image, linear grayscale on [0, max], markers as 3x3 red dots.

    Image rows run from top (largest y) to bottom; columns follow x.
    Markers are (x, y) points in domain coordinates.
    """
    if isinstance(field, ScalarField):
        vals, grid = np.asarray(field.values), field.grid
    else:
        vals = np.asarray(field, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite field")
    top = float(np.max(vals))
    gray = np.zeros_like(vals) if top <= 0 else np.clip(vals / top, 0, 1)
    img8 = np.round(255 * gray).astype(np.uint8)
    # [i=x, j=y] -> image rows = y descending, cols = x
    img8 = img8.T[::-1, :]
    rgb = np.repeat(img8[:, :, None], 3, axis=2)
    n_rows, n_cols = img8.shape
    for mx, my in markers:
        if grid is None:
            raise ValueError("markers need a grid")
        col = int(round((mx - grid.x[0]) / grid.h))
        row = n_rows - 1 - int(round((my - grid.y[0]) / grid.h))
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = row + dr, col + dc
                if 0 <= rr < n_rows and 0 <= cc < n_cols:
                    rgb[rr, cc] = (255, 0, 0)
    try:
        with open(path, "wb") as fh:
            fh.write(f"P6\n{n_cols} {n_rows}\n255\n".encode())
            fh.write(rgb.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write image {path}: {exc}") from exc


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
