"""Locally defined kernels ``F`` on a difference set ``Omega - Omega``.

A :class:`LocalKernel` couples an evaluator with its domain ``Omega`` and refuses
to evaluate outside the open difference set. The checks in this module
(positive definite, conditionally negative definite, reflection positive,
Hermitian symmetry) all reduce to dense Hermitian eigensolves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np

from .errors import AsymmetricData, DomainNotInterval, OutOfDomain
from .measure import UniformGrid

__all__ = [
    "DomainSet",
    "LocalKernel",
    "Verdict",
    "SymmetryReport",
    "builtin_kernel",
    "BUILTIN_KERNELS",
    "gram_matrix",
    "check_positive_definite",
    "check_pd_integral",
    "check_conditionally_negative",
    "check_reflection_positive",
    "hermitian_symmetry_check",
    "default_pd_tol",
]


class DomainSet:
    """Finite union of pairwise disjoint open intervals on the line.

    Endpoints may be infinite, so ``DomainSet([(-inf, inf)])`` is the whole line.
    """

    def __init__(self, intervals: Iterable[Sequence[float]]):
        iv = sorted((float(a), float(b)) for a, b in intervals)
        if not iv:
            raise ValueError("domain needs at least one interval")
        for a, b in iv:
            if math.isnan(a) or math.isnan(b) or not a < b:
                raise ValueError(f"interval ({a}, {b}) is empty or malformed")
        for (a0, b0), (a1, b1) in zip(iv, iv[1:]):
            if a1 < b0:
                raise ValueError(f"intervals ({a0}, {b0}) and ({a1}, {b1}) overlap")
        self.intervals: tuple[tuple[float, float], ...] = tuple(iv)

    @classmethod
    def interval(cls, a: float, b: float) -> "DomainSet":
        return cls([(a, b)])

    @classmethod
    def real_line(cls) -> "DomainSet":
        return cls([(-math.inf, math.inf)])

    def __repr__(self):
        return f"DomainSet({list(self.intervals)})"

    def __eq__(self, other):
        return isinstance(other, DomainSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def connected(self) -> bool:
        return len(self.intervals) == 1

    def bounds(self) -> tuple[float, float]:
        """Infimum and supremum of the domain."""
        return self.intervals[0][0], self.intervals[-1][1]

    def require_interval(self) -> tuple[float, float]:
        if not self.connected():
            raise DomainNotInterval(f"{self!r} is not a single interval")
        return self.intervals[0]

    def length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def diameter(self) -> float:
        lo, hi = self.bounds()
        return hi - lo

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x > a) & (x < b)
        return out

    def difference_intervals(self) -> list[tuple[float, float]]:
        """Open intervals ``(a_i - b_j, b_i - a_j)`` whose union is ``Omega - Omega``."""
        return [(ai - bj, bi - aj) for ai, bi in self.intervals for aj, bj in self.intervals]

    def difference_set_contains(self, z) -> np.ndarray | bool:
        z_arr = np.asarray(z, dtype=float)
        out = np.zeros(z_arr.shape, dtype=bool)
        for lo, hi in self.difference_intervals():
            out |= (z_arr > lo) & (z_arr < hi)
        return bool(out) if out.ndim == 0 else out

    def interior_grid(self, n: int, margin: float = 0.01) -> np.ndarray:
        """``n`` points spread over the intervals, away from the endpoints.

        Each interval of length ``L`` loses ``margin * L`` at both ends and
        receives a share of the points proportional to its length.
        """
        self._require_bounded()
        lengths = np.array([b - a for a, b in self.intervals])
        share = np.floor(n * lengths / lengths.sum()).astype(int)
        for k in np.argsort(-lengths)[: n - share.sum()]:
            share[k] += 1
        pts = []
        for (a, b), m in zip(self.intervals, share):
            if m == 0:
                continue
            L = b - a
            if m == 1:
                pts.append(np.array([0.5 * (a + b)]))
            else:
                pts.append(np.linspace(a + margin * L, b - margin * L, m))
        return np.concatenate(pts)

    def random_points(self, n: int, rng: np.random.Generator, margin: float = 0.0) -> np.ndarray:
        """``n`` points drawn uniformly from the (shrunken) domain, sorted."""
        self._require_bounded()
        lengths = np.array([b - a for a, b in self.intervals])
        which = rng.choice(len(lengths), size=n, p=lengths / lengths.sum())
        u = rng.uniform(margin, 1.0 - margin, size=n)
        lo = np.array([a for a, _ in self.intervals])[which]
        return np.sort(lo + u * lengths[which])

    def _require_bounded(self):
        lo, hi = self.bounds()
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("operation needs a bounded domain")

    def to_json(self) -> dict:
        return {"intervals": [[a, b] for a, b in self.intervals]}


# Builtin analytic kernels. Each entry maps parameters to
# (evaluator, one-sided derivative for x > 0, mpmath evaluator, is_real).


def _triangle(width: float = 1.0):
    w = float(width)
    f = lambda x: np.maximum(0.0, 1.0 - np.abs(x) / w)
    df = lambda x: np.where(np.abs(x) < w, -np.sign(x) / w, 0.0)
    mf = lambda x: max(mpmath.mpf(0), 1 - abs(x) / w)
    return f, df, mf


def _exponential(rate: float = 1.0):
    a = float(rate)
    f = lambda x: np.exp(-a * np.abs(x))
    df = lambda x: -a * np.sign(x) * np.exp(-a * np.abs(x))
    mf = lambda x: mpmath.exp(-a * abs(x))
    return f, df, mf


def _gaussian(rate: float = 1.0):
    a = float(rate)
    f = lambda x: np.exp(-a * np.square(x))
    df = lambda x: -2 * a * x * np.exp(-a * np.square(x))
    mf = lambda x: mpmath.exp(-a * x * x)
    return f, df, mf


def _sinc(bandwidth: float = 1.0):
    b = float(bandwidth)
    # numpy's sinc is sin(pi x) / (pi x)
    f = lambda x: np.sinc(b * np.asarray(x, dtype=float) / np.pi)

    def df(x):
        x = np.asarray(x, dtype=float)
        bx = b * x
        safe = np.where(bx == 0, 1.0, bx)
        return np.where(bx == 0, 0.0, b * (np.cos(safe) * safe - np.sin(safe)) / safe**2)

    mf = lambda x: mpmath.sinc(b * x)
    return f, df, mf


def _constant(value: float = 1.0):
    c = float(value)
    f = lambda x: np.full(np.shape(x), c)
    df = lambda x: np.zeros(np.shape(x))
    mf = lambda x: mpmath.mpf(c)
    return f, df, mf


def _split_triangle(cut: float = 0.5):
    """``1 - |x|`` on ``|x| < cut`` and 0 elsewhere."""
    c = float(cut)
    f = lambda x: np.where(np.abs(x) < c, 1.0 - np.abs(x), 0.0)
    df = lambda x: np.where(np.abs(x) < c, -np.sign(x), 0.0)
    mf = lambda x: (1 - abs(x)) if abs(x) < c else mpmath.mpf(0)
    return f, df, mf


def _power(exponent: float = 1.0, shift: float = 0.0):
    """``|x|^p + shift``; conditionally negative definite for 0 < p <= 2, shift = 0."""
    p, s = float(exponent), float(shift)
    f = lambda x: np.abs(x) ** p + s

    def df(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return p * np.sign(x) * np.abs(x) ** (p - 1)

    mf = lambda x: abs(x) ** p + s
    return f, df, mf


def _piecewise_linear(knots: Sequence[float], values: Sequence[float]):
    """Even function interpolating ``values`` at ``knots`` (on |x|), zero past the last knot."""
    k = np.asarray(knots, dtype=float)
    v = np.asarray(values, dtype=float)
    if k.ndim != 1 or k.size < 2 or k.size != v.size or k[0] != 0 or np.any(np.diff(k) <= 0):
        raise ValueError("knots must start at 0 and increase; values must match")
    f = lambda x: np.interp(np.abs(x), k, v, right=0.0)

    def df(x):
        ax = np.abs(np.asarray(x, dtype=float))
        slopes = np.diff(v) / np.diff(k)
        idx = np.clip(np.searchsorted(k, ax, side="left") - 1, 0, slopes.size - 1)
        return np.where(ax > k[-1], 0.0, np.sign(x) * slopes[idx])

    def mf(x):
        ax = abs(x)
        if ax >= k[-1]:
            return mpmath.mpf(v[-1]) if ax == k[-1] else mpmath.mpf(0)
        j = int(np.searchsorted(k, float(ax), side="right") - 1)
        t = (ax - k[j]) / (k[j + 1] - k[j])
        return v[j] + t * (v[j + 1] - v[j])

    return f, df, mf


def _builtin_kinks(name: str, params: dict) -> tuple:
    """Arguments where a builtin kernel fails to be smooth."""
    if name == "triangle":
        w = float(params.get("width", 1.0))
        return (-w, 0.0, w)
    if name in ("exponential", "power"):
        p = float(params.get("exponent", 1.0))
        return () if name == "power" and p.is_integer() and p % 2 == 0 else (0.0,)
    if name == "split_triangle":
        c = float(params.get("cut", 0.5))
        return (-c, 0.0, c)
    if name == "piecewise_linear":
        k = [float(v) for v in params["knots"]]
        return tuple(sorted({-v for v in k} | set(k)))
    return ()


BUILTIN_KERNELS: dict[str, Callable] = {
    "triangle": _triangle,
    "exponential": _exponential,
    "gaussian": _gaussian,
    "sinc": _sinc,
    "constant": _constant,
    "split_triangle": _split_triangle,
    "power": _power,
    "piecewise_linear": _piecewise_linear,
}


class LocalKernel:
    """A continuous function on ``Omega - Omega`` together with ``Omega``.

    Parameters
    ----------
    domain : DomainSet
        The set ``Omega``; evaluation is allowed on its open difference set.
    func : callable
        Vectorized evaluator, also used by :meth:`global_eval` off the domain.
    name, params : str, dict
        Identification for reports.
    derivative : callable, optional
        Derivative of ``func`` (one-sided limits where it has kinks).
    mp_func : callable, optional
        Scalar evaluator in mpmath arithmetic for extended-precision solves.
    real : bool
        Whether the kernel is real-valued.
    support : tuple, optional
        For sampled kernels, the closed range ``[lo, hi]`` covered by samples.
    kinks : tuple
        Arguments where ``F`` is continuous but not smooth; quadrature
        splits its ranges there.
    """

    def __init__(self, domain: DomainSet, func: Callable, *, name: str = "user",
                 params: dict | None = None, derivative: Callable | None = None,
                 mp_func: Callable | None = None, real: bool = True,
                 support: tuple[float, float] | None = None,
                 symmetry_defect: float = 0.0, kinks: Sequence[float] = ()):
        self.domain = domain
        self.kinks = tuple(float(k) for k in kinks)
        self._func = func
        self.name = name
        self.params = dict(params or {})
        self.derivative = derivative
        self.mp_func = mp_func
        self.real = real
        self.support = support
        self.symmetry_defect = symmetry_defect
        f0 = complex(np.asarray(func(np.zeros(1)))[0])
        if abs(f0.imag) > 1e-12 * max(1.0, abs(f0)) or f0.real < 0:
            raise ValueError(f"F(0) must be real and nonnegative, got {f0}")

    def __repr__(self):
        return f"LocalKernel({self.name!r}, {self.params}, {self.domain!r})"

    def with_domain(self, domain: DomainSet) -> "LocalKernel":
        return LocalKernel(domain, self._func, name=self.name, params=self.params,
                           derivative=self.derivative, mp_func=self.mp_func,
                           real=self.real, support=self.support,
                           symmetry_defect=self.symmetry_defect, kinks=self.kinks)

    def scaled(self, lam: float) -> "LocalKernel":
        f, d, m = self._func, self.derivative, self.mp_func
        return LocalKernel(
            self.domain, lambda x: lam * f(x), name=self.name,
            params={**self.params, "scale": lam * self.params.get("scale", 1.0)},
            derivative=None if d is None else (lambda x: lam * d(x)),
            mp_func=None if m is None else (lambda x: lam * m(x)),
            real=self.real, support=self.support, kinks=self.kinks)

    def in_domain(self, z) -> np.ndarray:
        ok = np.asarray(self.domain.difference_set_contains(z))
        if self.support is not None:
            z = np.asarray(z, dtype=float)
            ok = ok & (z >= self.support[0]) & (z <= self.support[1])
        return ok

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        ok = self.in_domain(z)
        if not np.all(ok):
            bad = np.unique(z[~ok])
            raise OutOfDomain(
                f"{bad.size} argument(s) outside Omega - Omega, e.g. {bad[:3].tolist()}",
                points=bad)
        return self.global_eval(z)

    def global_eval(self, z):
        """Evaluate the underlying formula without the domain check."""
        out = np.asarray(self._func(np.asarray(z, dtype=float)))
        return out.astype(float) if self.real else out.astype(complex)

    @property
    def value_at_zero(self) -> float:
        return float(np.real(self.global_eval(np.zeros(1))[0]))

    def mp_eval(self, z):
        if self.mp_func is None:
            raise NotImplementedError(f"kernel {self.name!r} has no extended-precision evaluator")
        return self.mp_func(z)

    @classmethod
    def sampled(cls, grid: UniformGrid, values, domain: DomainSet, *,
                symmetrize: bool = True, tol: float = 1e-9) -> "LocalKernel":
        """Kernel from samples on a uniform grid, linearly interpolated.

        With ``symmetrize`` the grid must be symmetric about 0; values are
        replaced by ``(F(z) + conj F(-z)) / 2`` and the defect before
        symmetrization is recorded. A defect above ``tol`` (relative to F(0))
        raises :class:`AsymmetricData`.
        """
        z = grid.points()
        v = np.asarray(values, dtype=complex).reshape(-1)
        if v.size != z.size:
            raise ValueError("one value per grid point is required")
        defect = 0.0
        if symmetrize:
            if abs(grid.start + grid.stop) > 1e-9 * grid.step:
                raise AsymmetricData("sample grid is not symmetric about 0")
            mirror = np.conj(v[::-1])
            defect = float(np.max(np.abs(v - mirror)))
            scale = max(1.0, abs(v[z.size // 2]))
            if defect > tol * scale:
                raise AsymmetricData(f"Hermitian defect {defect:.3e} exceeds {tol:g}", defect=defect)
            v = 0.5 * (v + mirror)
        real = bool(np.all(v.imag == 0))
        re, im = v.real.copy(), v.imag.copy()

        def f(x):
            x = np.asarray(x, dtype=float)
            out = np.interp(x, z, re, left=np.nan, right=np.nan)
            if real:
                return out
            return out + 1j * np.interp(x, z, im, left=np.nan, right=np.nan)

        return cls(domain, f, name="sampled",
                   params={"start": grid.start, "step": grid.step, "count": grid.count},
                   real=real, support=(grid.start, grid.stop), symmetry_defect=defect)


def builtin_kernel(name: str, domain: DomainSet | None = None, **params) -> LocalKernel:
    """Construct a named analytic kernel (see ``BUILTIN_KERNELS``)."""
    try:
        factory = BUILTIN_KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(BUILTIN_KERNELS)}") from None
    f, df, mf = factory(**params)
    return LocalKernel(domain or DomainSet.real_line(), f, name=name, params=params,
                       derivative=df, mp_func=mf, real=True, kinks=_builtin_kinks(name, params))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a definiteness check.

    ``value`` is the decisive statistic named by ``statistic`` (for example the
    minimum eigenvalue) and ``passed`` compares it with ``tol``.
    """

    passed: bool
    value: float
    tol: float
    statistic: str = "min_eigenvalue"
    details: dict = field(default_factory=dict)

    @property
    def min_eigenvalue(self) -> float:
        if self.statistic != "min_eigenvalue":
            raise AttributeError(f"verdict statistic is {self.statistic}")
        return self.value

    def to_dict(self) -> dict:
        return {"passed": self.passed, self.statistic: self.value, "tol": self.tol, **self.details}


def default_pd_tol(F: LocalKernel) -> float:
    return 1e-10 * max(1.0, F.value_at_zero)


def _difference_matrix(F: LocalKernel, x: np.ndarray, y: np.ndarray, sign: int = -1) -> np.ndarray:
    """Matrix ``F(x_j + sign * y_k)`` built from the upper triangle when x is y."""
    if x is y:
        m = x.size
        iu = np.triu_indices(m)
        vals = F(x[iu[0]] + sign * x[iu[1]])
        K = np.zeros((m, m), dtype=vals.dtype)
        K[iu] = vals
        lower = np.tril_indices(m, -1)
        K[lower] = np.conj(K.T[lower]) if sign < 0 else K.T[lower]
        return K
    return F(x[:, None] + sign * y[None, :])


def gram_matrix(F: LocalKernel, points) -> np.ndarray:
    """``K[j, k] = F(x_j - x_k)``, exactly Hermitian.

    Raises
    ------
    OutOfDomain
        If some difference leaves ``Omega - Omega``.
    """
    x = np.asarray(points, dtype=float).reshape(-1)
    return _difference_matrix(F, x, x)


def _eigvalsh(K: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(K)


def check_positive_definite(F: LocalKernel, points, tol: float | None = None) -> Verdict:
    """Pass iff the smallest eigenvalue of the Gram matrix is at least ``-tol``."""
    tol = default_pd_tol(F) if tol is None else tol
    ev = _eigvalsh(gram_matrix(F, points))
    lo = float(ev[0])
    return Verdict(lo >= -tol, lo, tol, "min_eigenvalue", {"points": int(np.size(points))})


def check_pd_integral(F: LocalKernel, test_functions, quadrature=None, tol: float | None = None) -> Verdict:
    """Pass iff ``<F_phi, F_phi> >= -tol`` for every supplied test function.

    ``test_functions`` holds bumps or bump combinations from
    :mod:`pdext.operators`; the double integral uses its trapezoid rule.
    """
    from .operators import QuadratureSpec, wf_inner

    quadrature = quadrature or QuadratureSpec()
    tol = default_pd_tol(F) if tol is None else tol
    vals = [wf_inner(F, phi, phi, quadrature).real for phi in test_functions]
    lo = float(min(vals)) if vals else 0.0
    return Verdict(lo >= -tol, lo, tol, "min_form", {"values": [float(v) for v in vals]})


def check_conditionally_negative(G: LocalKernel, points, tol: float | None = None,
                                 require_zero_at_origin: bool = True) -> Verdict:
    """Pass iff ``sum G(x_j - x_k) c_j conj(c_k) <= tol`` whenever ``sum c_j = 0``.

    The form is restricted to the zero-sum subspace with the projector
    ``P = I - 11^T / m`` and the largest eigenvalue of ``P M P`` is compared
    with ``tol``. With ``require_zero_at_origin`` the function must also
    vanish at 0 (within ``tol``), as needed for a stationary-increment law
    pinned at the origin.
    """
    x = np.asarray(points, dtype=float).reshape(-1)
    M = gram_matrix(G, x)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    tol = 1e-10 * scale if tol is None else tol
    m = x.size
    P = np.eye(m) - np.full((m, m), 1.0 / m)
    PMP = P @ M @ P
    PMP = 0.5 * (PMP + PMP.conj().T)
    hi = float(_eigvalsh(PMP)[-1]) if m > 1 else 0.0
    g0 = float(np.real(G.global_eval(np.zeros(1))[0]))
    origin_ok = abs(g0) <= tol or not require_zero_at_origin
    details = {"points": m, "value_at_zero": g0, "zero_at_origin": bool(abs(g0) <= tol)}
    return Verdict(hi <= tol and origin_ok, hi, tol, "max_eigenvalue", details)


def check_reflection_positive(F: LocalKernel, points, tol: float | None = None) -> Verdict:
    """Pass iff the matrix ``F(x_i + x_j)`` over nonnegative points is PSD."""
    x = np.asarray(points, dtype=float).reshape(-1)
    if np.any(x < 0):
        raise ValueError("reflection positivity uses points in [0, inf)")
    tol = default_pd_tol(F) if tol is None else tol
    K = _difference_matrix(F, x, x, sign=+1)
    if not F.real:
        K = 0.5 * (K + K.conj().T)
    lo = float(_eigvalsh(K)[0])
    return Verdict(lo >= -tol, lo, tol, "min_eigenvalue", {"points": int(x.size)})


@dataclass(frozen=True)
class SymmetryReport:
    defect: float
    bound_violation: bool
    max_excess: float
    worst_z: float | None

    def to_dict(self) -> dict:
        return {"defect": self.defect, "bound_violation": self.bound_violation,
                "max_excess": self.max_excess, "worst_z": self.worst_z}


def hermitian_symmetry_check(F: LocalKernel, samples, tol: float = 1e-12) -> SymmetryReport:
    """Largest ``|F(-z) - conj F(z)|`` over ``samples``; flags ``|F(z)| > F(0) + tol``."""
    z = np.asarray(samples, dtype=float).reshape(-1)
    fz = F(z).astype(complex)
    fm = F(-z).astype(complex)
    d = np.abs(fm - np.conj(fz))
    f0 = F.value_at_zero
    excess = np.abs(fz) - f0
    k = int(np.argmax(d)) if d.size else None
    return SymmetryReport(
        defect=float(d.max()) if d.size else 0.0,
        bound_violation=bool(np.any(excess > tol)),
        max_excess=float(max(0.0, excess.max())) if d.size else 0.0,
        worst_z=None if k is None else float(z[k]),
    )
