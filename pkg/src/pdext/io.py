"""CSV readers and writers for kernels, measures, candidates and paths.

Formats
-------
kernel     ``z,re,im`` on a uniform grid of the difference set
measure    ``position,weight`` (atoms) or ``t,value`` (density on a uniform grid)
candidate  ``t,re,im``
paths      header row of grid times, then one row per path
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import NonUniformGrid, OutOfDomain
from .gauss import GpPaths
from .kernel import DomainSet, LocalKernel
from .measure import DiscreteMeasure, GriddedDensity, Measure, UniformGrid

__all__ = [
    "read_kernel_csv",
    "ingest_kernel_csv",
    "write_kernel_csv",
    "read_measure_csv",
    "write_measure_csv",
    "write_candidate_csv",
    "write_paths_csv",
    "read_paths_csv",
    "format_number",
]


def format_number(x: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


def _read_rows(path) -> tuple[list[str] | None, np.ndarray]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = None
    try:
        float(rows[0][0])
    except ValueError:
        header = [c.strip().lower() for c in rows[0]]
        rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError(f"{path}: no data rows")
    return header, data


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for r in rows:
            w.writerow([format_number(v) for v in r])


def read_kernel_csv(path, domain: DomainSet, *, symmetrize: bool = True,
                    tol: float = 1e-9) -> LocalKernel:
    """Load a sampled kernel from ``z,re,im`` rows.

    Rows are sorted by ``z`` (stable), the spacing must be uniform, and all
    samples must lie in the closure of the difference set of ``domain``.

    Raises
    ------
    NonUniformGrid
        If the sorted ``z`` values are not equispaced.
    AsymmetricData
        If ``F(-z)`` and ``conj F(z)`` differ by more than ``tol``.
    """
    _, data = _read_rows(path)
    if data.shape[1] not in (2, 3):
        raise ValueError(f"{path}: expected columns z,re[,im]")
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    z = data[:, 0]
    if np.any(np.diff(z) == 0):
        raise NonUniformGrid(f"{path}: repeated z values")
    grid = UniformGrid.from_points(z)
    D = domain.diameter()
    if z[0] < -D * (1 + 1e-12) or z[-1] > D * (1 + 1e-12):
        raise OutOfDomain(f"{path}: samples extend beyond the difference set", points=z[[0, -1]])
    vals = data[:, 1] + (1j * data[:, 2] if data.shape[1] == 3 else 0.0)
    return LocalKernel.sampled(grid, vals, domain, symmetrize=symmetrize, tol=tol)


ingest_kernel_csv = read_kernel_csv


def write_kernel_csv(path, z, values):
    v = np.asarray(values, dtype=complex)
    _write_rows(path, ["z", "re", "im"], zip(np.asarray(z, dtype=float), v.real, v.imag))


def read_measure_csv(path) -> Measure:
    """Load ``position,weight`` atoms or a ``t,value`` density (uniform ``t``)."""
    header, data = _read_rows(path)
    if header is None or len(header) != 2:
        raise ValueError(f"{path}: header 'position,weight' or 't,value' required")
    if header == ["position", "weight"]:
        return DiscreteMeasure(data[:, 0], data[:, 1])
    if header == ["t", "value"]:
        order = np.argsort(data[:, 0], kind="stable")
        grid = UniformGrid.from_points(data[order, 0])
        return GriddedDensity(grid, data[order, 1])
    raise ValueError(f"{path}: unknown header {header}")


def write_measure_csv(path, mu: Measure):
    if isinstance(mu, DiscreteMeasure):
        if mu.dim != 1:
            raise ValueError("only one-dimensional atoms are written to CSV")
        _write_rows(path, ["position", "weight"], zip(mu.positions[:, 0], mu.weights))
    elif isinstance(mu, GriddedDensity):
        _write_rows(path, ["t", "value"], zip(mu.grid.points(), mu.values))
    else:
        raise TypeError(f"cannot serialize {type(mu).__name__}")


def write_candidate_csv(path, t, values):
    v = np.asarray(values, dtype=complex)
    _write_rows(path, ["t", "re", "im"], zip(np.asarray(t, dtype=float), v.real, v.imag))


def write_paths_csv(path, paths: GpPaths):
    _write_rows(path, [format_number(t) for t in paths.grid], paths.paths)


def read_paths_csv(path, seed: int = -1) -> GpPaths:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    grid = np.array([float(c) for c in rows[0]])
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    return GpPaths(grid, data.reshape(-1, grid.size), seed)
