"""Finite positive measures on the line and their Fourier transforms.

A measure is either a finite set of weighted atoms or a nonnegative density
sampled on a uniform grid. Transforms use the convention

    mu_hat(t) = integral of exp(i t x) d mu(x),

with trapezoid quadrature for gridded densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidMeasure, NegativeDensity, NonUniformGrid

__all__ = [
    "UniformGrid",
    "Measure",
    "DiscreteMeasure",
    "GriddedDensity",
    "fourier_transform",
    "fourier_on_grid",
    "total_mass",
    "polya_density",
    "cauchy_density",
    "uniform_density",
    "point_mass",
    "dual_grid",
]

# Largest block of the (t, x) phase matrix formed at once on the direct path.
_CHUNK = 1 << 21


@dataclass(frozen=True)
class UniformGrid:
    """Equispaced grid ``start + k * step`` for ``k = 0, ..., count - 1``."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.step)):
            raise ValueError("grid start and step must be finite")
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"grid count must be an integer >= 2, got {self.count}")
        object.__setattr__(self, "count", int(self.count))

    @classmethod
    def linspace(cls, lo: float, hi: float, count: int) -> "UniformGrid":
        if hi <= lo:
            raise ValueError("linspace requires hi > lo")
        return cls(float(lo), (hi - lo) / (count - 1), int(count))

    @property
    def stop(self) -> float:
        """Last grid point."""
        return self.start + (self.count - 1) * self.step

    def points(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count, dtype=float)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.count, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w

    def __len__(self):
        return self.count

    def __getitem__(self, k):
        if not -self.count <= k < self.count:
            raise IndexError(k)
        return self.start + (k % self.count) * self.step

    @classmethod
    def from_points(cls, pts, rtol: float = 1e-9) -> "UniformGrid":
        """Recover a grid from sorted, equispaced sample locations."""
        pts = np.asarray(pts, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise NonUniformGrid("need at least two grid points")
        d = np.diff(pts)
        h = (pts[-1] - pts[0]) / (pts.size - 1)
        if h <= 0 or np.max(np.abs(d - h)) > rtol * max(abs(h), np.max(np.abs(pts))):
            raise NonUniformGrid(
                f"spacing varies by {np.max(np.abs(d - h)):.3g} around step {h:.6g}")
        return cls(float(pts[0]), float(h), int(pts.size))


class Measure:
    """Common interface of the two measure variants.

    Every measure exposes quadrature ``nodes`` (shape ``(K, d)``) and nonnegative
    ``masses`` such that integrals against the measure are ``sum(masses * f(nodes))``.
    """

    dim: int = 1

    def nodes(self) -> np.ndarray:
        raise NotImplementedError

    def masses(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def size(self) -> int:
        return self.masses().size

    def support_radius(self) -> float:
        """Largest node norm carrying positive mass."""
        m = self.masses()
        if not np.any(m > 0):
            return 0.0
        x = self.nodes()[m > 0]
        return float(np.max(np.linalg.norm(x, axis=1)))

    def is_zero(self) -> bool:
        return not np.any(self.masses() > 0)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure(Measure):
    """Finite sum of point masses ``sum_k w_k delta_{x_k}``."""

    positions: np.ndarray
    weights: np.ndarray
    allow_zero: bool = False

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pos.ndim != 2 or pos.shape[0] != w.size or w.size == 0:
            raise InvalidMeasure("positions and weights must be nonempty and of equal length")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(w))):
            raise InvalidMeasure("positions and weights must be finite")
        if np.any(w < 0):
            raise InvalidMeasure("weights must be nonnegative")
        if not self.allow_zero and not np.any(w > 0):
            raise InvalidMeasure("total mass must be positive")
        if np.unique(pos, axis=0).shape[0] != pos.shape[0]:
            raise InvalidMeasure("positions must be pairwise distinct")
        pos.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def nodes(self) -> np.ndarray:
        return self.positions

    def masses(self) -> np.ndarray:
        return self.weights


@dataclass(frozen=True, eq=False)
class GriddedDensity(Measure):
    """Nonnegative density sampled on a uniform grid, integrated by trapezoid.

    ``tail_mass`` records mass known to lie outside the grid (for truncated
    heavy-tailed densities); it is a diagnostic and does not enter transforms.
    """

    grid: UniformGrid
    values: np.ndarray
    tail_mass: float = 0.0
    allow_zero: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size != self.grid.count:
            raise InvalidMeasure(f"{v.size} values for a grid of {self.grid.count} points")
        if not np.all(np.isfinite(v)):
            raise InvalidMeasure("density values must be finite")
        if np.any(v < 0):
            raise InvalidMeasure("density values must be nonnegative")
        if not self.allow_zero and not np.any(v > 0):
            raise InvalidMeasure("total mass must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def nodes(self) -> np.ndarray:
        return self.grid.points()[:, None]

    def masses(self) -> np.ndarray:
        return self.grid.trapezoid_weights() * self.values


def point_mass(x: float = 0.0, weight: float = 1.0) -> DiscreteMeasure:
    return DiscreteMeasure(np.array([x], dtype=float), np.array([weight], dtype=float))


def cauchy_density(radius: float = 2000.0, step: float = 0.05, scale: float = 1.0) -> GriddedDensity:
    """Cauchy density ``scale / (pi (scale^2 + x^2))`` truncated to ``[-radius, radius]``.

    Its transform is ``exp(-scale |t|)`` up to the truncated tail, whose mass
    ``1 - (2/pi) arctan(radius/scale)`` is stored in ``tail_mass``.
    """
    n = int(round(2 * radius / step))
    grid = UniformGrid(-radius, 2 * radius / n, n + 1)
    x = grid.points()
    x = 0.5 * (np.abs(x) + np.abs(x[::-1]))  # exactly mirror-symmetric values
    values = scale / (np.pi * (scale * scale + x * x))
    tail = 1.0 - (2.0 / np.pi) * math.atan(radius / scale)
    return GriddedDensity(grid, values, tail_mass=tail)


def uniform_density(half_width: float = 1.0, count: int = 2001) -> GriddedDensity:
    """Uniform probability density on ``[-half_width, half_width]``."""
    grid = UniformGrid.linspace(-half_width, half_width, count)
    return GriddedDensity(grid, np.full(count, 0.5 / half_width))


def _as_freq(t, dim: int) -> np.ndarray:
    """Normalize frequency input to shape ``(m, dim)``."""
    t = np.asarray(t, dtype=float)
    if dim == 1:
        return t.reshape(-1, 1)
    if t.ndim == 1:
        if t.size != dim:
            raise ValueError(f"frequency vector must have length {dim}")
        return t[None, :]
    if t.ndim != 2 or t.shape[1] != dim:
        raise ValueError(f"frequencies must have shape (m, {dim})")
    return t


def _direct_sum(ts: np.ndarray, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``out[k] = sum_j w_j exp(i ts[k] . x[j])`` in memory-bounded blocks."""
    out = np.empty(ts.shape[0], dtype=complex)
    rows = max(1, _CHUNK // max(1, x.shape[0]))
    for s in range(0, ts.shape[0], rows):
        phase = ts[s:s + rows] @ x.T
        out[s:s + rows] = np.exp(1j * phase) @ w
    return out


def _fft_ratio(t_step: float, x_step: float) -> int | None:
    """Integer M with t_step * x_step * M == 2 pi, or None."""
    m = 2 * np.pi / (t_step * x_step)
    mi = int(round(m))
    if mi >= 1 and abs(m - mi) <= 1e-12 * m:
        return mi
    return None


def _grid_sum(tgrid: UniformGrid, xgrid: UniformGrid, w: np.ndarray) -> np.ndarray:
    """``sum_j w_j exp(i t_k x_j)`` for two uniform grids.

    When ``t_step * x_step * M = 2 pi`` for an integer ``M`` the double sum
    becomes a length-M DFT after folding the x index modulo M.
    """
    m = _fft_ratio(tgrid.step, xgrid.step)
    if m is None or m > 4 * (xgrid.count + tgrid.count):
        return _direct_sum(tgrid.points()[:, None], xgrid.points()[:, None], w)
    j = np.arange(xgrid.count)
    c = w * np.exp(1j * tgrid.start * xgrid.step * j)
    folded = np.zeros(m, dtype=complex)
    np.add.at(folded, j % m, c)
    spectrum = np.fft.ifft(folded) * m
    k = np.arange(tgrid.count)
    tk = tgrid.start + tgrid.step * k
    return spectrum[k % m] * np.exp(1j * tk * xgrid.start)


def fourier_transform(mu: Measure, t) -> complex:
    """Transform of ``mu`` at a single frequency (scalar, or vector for n-d atoms)."""
    ts = _as_freq(t, mu.dim)
    if ts.shape[0] != 1:
        raise ValueError("fourier_transform takes a single frequency; use fourier_on_grid")
    return complex(_direct_sum(ts, mu.nodes(), mu.masses())[0])


def fourier_on_grid(mu: Measure, ts) -> np.ndarray:
    """Transform of ``mu`` at every frequency of ``ts``.

    ``ts`` is a :class:`UniformGrid` or an array of frequencies. For a
    gridded density on a dual uniform grid an FFT path is taken.
    """
    if isinstance(ts, UniformGrid):
        if isinstance(mu, GriddedDensity):
            return _grid_sum(ts, mu.grid, mu.masses())
        ts = ts.points()
    return _direct_sum(_as_freq(ts, mu.dim), mu.nodes(), mu.masses())


def total_mass(mu: Measure) -> float:
    """``mu_hat(0)``, computed by the same summation as the transform."""
    return fourier_transform(mu, np.zeros(mu.dim)).real


def dual_grid(support_radius: float, n_nodes: int) -> tuple[UniformGrid, UniformGrid]:
    """Space grid on ``[-R, R]`` and its DFT-dual frequency grid.

    The space grid has ``n_nodes + 1`` points and step ``2R / n_nodes``. The
    frequency grid has step ``pi / R`` and spans one full period
    ``2 pi / x_step`` symmetrically about 0, so a trapezoid rule on it inverts a
    trapezoid transform exactly at the space nodes.
    """
    if n_nodes < 2 or n_nodes % 2:
        raise ValueError("n_nodes must be an even integer >= 2")
    R = float(support_radius)
    xg = UniformGrid(-R, 2 * R / n_nodes, n_nodes + 1)
    ht = np.pi / R
    tg = UniformGrid(-(n_nodes // 2) * ht, ht, n_nodes + 1)
    return xg, tg


def polya_density(
    g: Callable[[np.ndarray], np.ndarray],
    support_radius: float,
    ts: UniformGrid | None = None,
    *,
    n_nodes: int = 32768,
    tol_clamp: float = 1e-9,
) -> GriddedDensity:
    """Spectral density ``A(t) = (1/2 pi) int exp(i t x) g(x) dx`` of an even ``g``.

    ``g`` must vanish outside ``[-support_radius, support_radius]``. The
    integral is a trapezoid rule on ``n_nodes`` intervals of that range. When
    ``ts`` is omitted the dual frequency grid of :func:`dual_grid` is used, on
    which transforming ``A`` back reproduces ``g`` at the quadrature nodes.

    Raises
    ------
    NegativeDensity
        If some ``A(t_k) < -tol_clamp``; values in ``[-tol_clamp, 0)`` are
        clamped to zero.
    """
    xg, tg = dual_grid(support_radius, n_nodes)
    if ts is None:
        ts = tg
    gx = np.asarray(g(xg.points()), dtype=float)
    vals = _grid_sum(ts, xg, xg.trapezoid_weights() * gx) / (2 * np.pi)
    a = vals.real
    k = int(np.argmin(a))
    if a[k] < -tol_clamp:
        raise NegativeDensity(
            f"Polya density is {a[k]:.3e} at t={ts[k]:.6g}, below -{tol_clamp:g}",
            index=k, value=float(a[k]))
    a = np.where(a < 0, 0.0, a)
    return GriddedDensity(ts, a, allow_zero=True)
