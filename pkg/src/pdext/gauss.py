"""Gaussian process sampling from positive definite and conditionally negative definite functions.

Stationary paths have covariance ``F(s - t)``. Stationary-increment paths,
pinned at ``X_0 = 0``, have covariance ``(G(s) + G(t) - G(s - t)) / 2`` so that
``E|X_s - X_t|^2 = G(s - t)``. Each path draws its normals from a Philox
stream keyed by ``(seed, path index)``, so output does not depend on the
number of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NotCND, NotPSD, TooFewPaths
from .kernel import LocalKernel, check_conditionally_negative

__all__ = [
    "GpPaths",
    "covariance_factor",
    "sample_stationary",
    "sample_stationary_increment",
    "empirical_covariance",
    "increment_second_moment",
    "shift_defect",
]

CHUNK = 1024
CLIP = 1e-10


@dataclass(frozen=True, eq=False)
class GpPaths:
    """Simulated paths: ``paths[i, k]`` is path ``i`` at time ``grid[k]``."""

    grid: np.ndarray
    paths: np.ndarray
    seed: int

    def __post_init__(self):
        if self.paths.ndim != 2 or self.paths.shape[1] != self.grid.size:
            raise ValueError("paths must be n_paths x n_points")
        if not np.all(np.isfinite(self.paths)):
            raise ValueError("paths contain non-finite values")

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]


def _evaluator(F) -> Callable:
    if isinstance(F, LocalKernel):
        return F
    if callable(F):
        return F
    raise TypeError("expected a LocalKernel, an ExtensionCandidate or a callable")


def _real_matrix(C: np.ndarray) -> np.ndarray:
    C = np.asarray(C)
    if np.iscomplexobj(C):
        if np.max(np.abs(C.imag)) > 1e-12 * max(1.0, np.max(np.abs(C.real))):
            raise ValueError("Gaussian sampling needs a real covariance; the kernel is complex")
        C = C.real
    return 0.5 * (C + C.T)


def covariance_factor(C: np.ndarray, jitter: float = 0.0) -> np.ndarray:
    """Factor ``L`` with ``L L^T = C + jitter I`` from a symmetric eigendecomposition.

    Eigenvalues in ``[-1e-10 * scale, 0)`` are clipped to zero.

    Raises
    ------
    NotPSD
        If an eigenvalue is more negative than the clip level.
    """
    C = _real_matrix(C)
    n = C.shape[0]
    lam, U = np.linalg.eigh(C + jitter * np.eye(n))
    scale = max(float(np.max(np.abs(np.diag(C)))) if n else 0.0, float(np.max(np.abs(lam))) if n else 0.0)
    if n and lam[0] < -CLIP * max(scale, 1e-300):
        raise NotPSD(f"covariance has eigenvalue {lam[0]:.3e}", min_eigenvalue=float(lam[0]))
    return U * np.sqrt(np.clip(lam, 0.0, None))


def _draw(L: np.ndarray, n_paths: int, seed: int, workers: int) -> np.ndarray:
    n = L.shape[0]

    def block(start: int) -> np.ndarray:
        stop = min(n_paths, start + CHUNK)
        Z = np.empty((stop - start, L.shape[1]))
        for i in range(start, stop):
            bitgen = np.random.Philox(key=np.array([seed, i], dtype=np.uint64))
            Z[i - start] = np.random.Generator(bitgen).standard_normal(L.shape[1])
        return Z @ L.T

    starts = list(range(0, n_paths, CHUNK))
    if workers <= 1 or len(starts) == 1:
        parts = [block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(block, starts))
    return np.vstack(parts) if parts else np.zeros((0, n))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return seed


def sample_stationary(F, grid, n_paths: int, seed: int = 0, jitter: float | None = None,
                      workers: int = 1) -> GpPaths:
    """Zero-mean Gaussian paths with covariance ``F(s - t)`` on ``grid``.

    ``F`` is a :class:`LocalKernel` (evaluated with its domain check), an
    extension candidate, or any vectorized callable. ``jitter`` defaults to
    ``1e-10 * F(0)``.
    """
    seed = _check_seed(seed)
    t = np.asarray(grid, dtype=float).reshape(-1)
    f = _evaluator(F)
    C = np.asarray(f(t[:, None] - t[None, :]))
    C = _real_matrix(C)
    if jitter is None:
        jitter = 1e-10 * float(np.real(np.asarray(f(np.zeros(1)))[0]))
    L = covariance_factor(C, jitter)
    return GpPaths(t, _draw(L, int(n_paths), seed, workers), seed)


def sample_stationary_increment(G, grid, n_paths: int, seed: int = 0, tol: float | None = None,
                                workers: int = 1) -> GpPaths:
    """Gaussian paths with ``X_0 = 0`` and ``E|X_s - X_t|^2 = G(s - t)``.

    ``grid[0]`` must be 0. Only the strictly positive times are factored, so
    the first column is exactly zero.

    Raises
    ------
    NotCND
        If ``G`` fails :func:`pdext.kernel.check_conditionally_negative` on
        the grid (including the requirement ``G(0) = 0``).
    """
    seed = _check_seed(seed)
    t = np.asarray(grid, dtype=float).reshape(-1)
    if t.size == 0 or t[0] != 0.0:
        raise ValueError("the increment grid must start at t_0 = 0")
    verdict = check_conditionally_negative(G, t, tol)
    if not verdict.passed:
        raise NotCND(f"not conditionally negative definite on the grid: {verdict.to_dict()}")
    s = t[1:]
    gs = np.real(np.asarray(G(s)))
    gd = np.real(np.asarray(G(s[:, None] - s[None, :])))
    K = 0.5 * (gs[:, None] + gs[None, :] - gd)
    L = covariance_factor(K)
    X = _draw(L, int(n_paths), seed, workers)
    paths = np.hstack([np.zeros((X.shape[0], 1)), X])
    return GpPaths(t, paths, seed)


def empirical_covariance(paths: GpPaths) -> np.ndarray:
    """``X^T X / n``, the sample covariance under the zero-mean convention."""
    n = paths.n_paths
    if n < 2:
        raise TooFewPaths(f"need at least 2 paths, got {n}")
    X = paths.paths
    return X.T @ X / n


def increment_second_moment(paths: GpPaths) -> np.ndarray:
    """``M[j, k]``: sample mean of ``(X_{t_j} - X_{t_k})^2``."""
    n = paths.n_paths
    if n < 2:
        raise TooFewPaths(f"need at least 2 paths, got {n}")
    C = empirical_covariance(paths)
    d = np.diag(C)
    return d[:, None] + d[None, :] - 2 * C


def shift_defect(cov: np.ndarray, steps: int = 1) -> float:
    """``max |C[j + h, k + h] - C[j, k]|`` for a uniform grid and shift ``h = steps``."""
    h = int(steps)
    if h <= 0 or h >= cov.shape[0]:
        raise ValueError("shift must be between 1 and n_points - 1")
    return float(np.max(np.abs(cov[h:, h:] - cov[:-h, :-h])))
