"""Exponential families on finite unions of intervals.

``E_lambda(t) = |Omega|^{-1/2} exp(2 pi i lambda t)``. Gram entries are
evaluated from antiderivatives; Parseval defects of a test function use
composite Gauss-Legendre quadrature on each interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .kernel import DomainSet

__all__ = [
    "ExponentialFamily",
    "lambda_pattern",
    "exponential_gram",
    "max_offdiag",
    "parseval_defect",
    "interval_integral",
]


@dataclass(frozen=True, eq=False)
class ExponentialFamily:
    omega: DomainSet
    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float).reshape(-1)
        if lam.size == 0:
            raise ValueError("at least one frequency is required")
        if np.unique(lam).size != lam.size:
            raise ValueError("frequencies must be distinct")
        if not self.omega.length() > 0 or not math.isfinite(self.omega.length()):
            raise ValueError("Omega must have finite positive measure")
        object.__setattr__(self, "lambdas", lam)

    def evaluate(self, t) -> np.ndarray:
        """``E[k, j] = E_{lambda_k}(t_j)``."""
        t = np.asarray(t, dtype=float).reshape(-1)
        return np.exp(2j * np.pi * np.outer(self.lambdas, t)) / math.sqrt(self.omega.length())


def lambda_pattern(pattern: str, radius: float = 5.0) -> np.ndarray:
    """Frequency sets truncated to ``[-radius, radius]``.

    ``quarter`` is ``{0, 1/4} + Z`` and ``half`` is ``(1/2) Z``.
    """
    n = int(math.floor(radius)) + 1
    k = np.arange(-n, n + 1, dtype=float)
    if pattern == "quarter":
        lam = np.concatenate([k, k + 0.25])
    elif pattern == "half":
        lam = np.concatenate([k, k + 0.5])
    elif pattern == "integer":
        lam = k
    else:
        raise ValueError(f"unknown pattern {pattern!r}")
    lam = np.unique(lam)
    return lam[np.abs(lam) <= radius]


def _phase(d: float, x: float) -> complex:
    """``exp(2 pi i d x)`` with the product reduced modulo 1 first."""
    frac = math.fmod(d * x, 1.0)
    return complex(math.cos(2 * math.pi * frac), math.sin(2 * math.pi * frac))


def _sinc(x: float) -> float:
    """``sin(pi x) / (pi x)`` with the sine argument reduced modulo 2."""
    if x == 0:
        return 1.0
    return math.sin(math.pi * math.fmod(x, 2.0)) / (math.pi * x)


def interval_integral(d: float, a: float, b: float) -> complex:
    """``int_a^b exp(2 pi i d t) dt`` in closed form.

    Written as ``exp(i pi d (a + b)) (b - a) sinc(d (b - a))``, which stays
    accurate when ``d`` is close to 0.
    """
    return _phase(0.5 * d, a + b) * (b - a) * _sinc(d * (b - a))


def exponential_gram(fam: ExponentialFamily) -> np.ndarray:
    """``G[j, k] = <E_{lambda_j}, E_{lambda_k}>_{L^2(Omega)}``, exactly Hermitian."""
    lam = fam.lambdas
    n = lam.size
    vol = fam.omega.length()
    G = np.empty((n, n), dtype=complex)
    for j in range(n):
        G[j, j] = 1.0
        for k in range(j + 1, n):
            d = lam[j] - lam[k]
            v = sum(interval_integral(d, a, b) for a, b in fam.omega.intervals) / vol
            G[j, k] = v
            G[k, j] = v.conjugate()
    return G


def max_offdiag(G: np.ndarray) -> float:
    if G.shape[0] < 2:
        return 0.0
    off = G - np.diag(np.diag(G))
    return float(np.max(np.abs(off)))


def _gauss_nodes(omega: DomainSet, panels: int, order: int):
    u, w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for a, b in omega.intervals:
        edges = np.linspace(a, b, panels + 1)
        h = np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        xs.append((mid[:, None] + 0.5 * h[:, None] * u[None, :]).ravel())
        ws.append((0.5 * h[:, None] * w[None, :]).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def parseval_defect(fam: ExponentialFamily, f: Callable, *, panels: int = 64,
                    order: int = 16) -> float:
    """``||f||^2 - sum_lambda |<f, E_lambda>|^2`` over the family.

    For an orthonormal family the value is nonnegative (Bessel's
    inequality) and shrinks as the family grows; for a family that is not
    orthonormal it can take either sign. Integrals use composite
    Gauss-Legendre quadrature with ``panels`` panels of ``order`` nodes per
    interval.
    """
    x, w = _gauss_nodes(fam.omega, panels, order)
    fx = np.asarray(f(x), dtype=complex)
    norm2 = float(np.sum(w * np.abs(fx) ** 2))
    coeffs = fam.evaluate(x).conj() @ (w * fx)
    return norm2 - float(np.sum(np.abs(coeffs) ** 2))
