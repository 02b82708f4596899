"""CSV and JSON serialization.

Fields are written as ``q,p,re,im`` rows and kernels as ``dq,dp,re,im`` rows,
row-major with q (or dq) slowest.  Floats use ``%.17g`` so a round trip is
exact and identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import PhaseField, PhaseGrid
from .groupoid import PairKernel

FMT = "%.17g"


def _write_rows(path, header, a, b, values):
    rows = np.column_stack([a.ravel(), b.ravel(), values.real.ravel(), values.imag.ravel()])
    np.savetxt(path, rows, fmt=FMT, delimiter=",", header=header, comments="")


def _read_rows(path, header):
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
    if first != header:
        raise ValueError(f"{path}: expected header {header!r}, got {first!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns")
    return data


def write_field(path, f: PhaseField):
    Q, P = f.grid.mesh()
    _write_rows(path, "q,p,re,im", Q, P, f.samples)


def read_field(path) -> PhaseField:
    data = _read_rows(path, "q,p,re,im")
    n = int(round(np.sqrt(data.shape[0])))
    if n * n != data.shape[0] or n < 2:
        raise ValueError(f"{path}: {data.shape[0]} rows is not a square grid")
    q = data[::n, 0]
    extent = (q[-1] - q[0]) * n / (2 * (n - 1))
    grid = PhaseGrid(extent, n)
    Q, P = grid.mesh()
    tol = 1e-9 * max(extent, 1.0)
    if np.abs(data[:, 0] - Q.ravel()).max() > tol or np.abs(data[:, 1] - P.ravel()).max() > tol:
        raise ValueError(f"{path}: coordinates do not form a cell-centered grid")
    return PhaseField(grid, (data[:, 2] + 1j * data[:, 3]).reshape(n, n))


def write_kernel(path, K: PairKernel):
    DQ, DP = K.mesh()
    _write_rows(path, "dq,dp,re,im", DQ, DP, K.samples)


def read_kernel(path, grid: PhaseGrid) -> PairKernel:
    data = _read_rows(path, "dq,dp,re,im")
    s = int(round(np.sqrt(data.shape[0])))
    if s * s != data.shape[0] or s % 2 == 0:
        raise ValueError(f"{path}: {data.shape[0]} rows is not an odd square lattice")
    K = PairKernel(grid, (data[:, 2] + 1j * data[:, 3]).reshape(s, s))
    DQ, DP = K.mesh()
    tol = 1e-9 * max(grid.extent, 1.0)
    if np.abs(data[:, 0] - DQ.ravel()).max() > tol or np.abs(data[:, 1] - DP.ravel()).max() > tol:
        raise ValueError(f"{path}: offsets do not match the difference lattice of {grid}")
    return K


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def write_json(path, obj):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=True)
    Path(path).write_text(text + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
