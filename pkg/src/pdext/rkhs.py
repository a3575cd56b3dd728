"""Finite spans in the reproducing kernel Hilbert space of a local kernel.

Elements are combinations ``u = sum_j c_j k_{a_j}`` with ``k_a(x) = F(x - a)``
and inner product

    <sum_j c_j k_{a_j}, sum_k d_k k_{b_k}> = sum_{j,k} c_j conj(d_k) F(b_k - a_j),

linear in the first argument. Membership of a function ``g`` is tested through
``q_N(g) = g^H K^+ g`` on anchor sets of growing size, and the
space of solutions of ``f'' = f`` is probed with the basis ``exp(x), exp(-x)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import IllConditioned
from .kernel import DomainSet, LocalKernel, Verdict, gram_matrix

__all__ = [
    "AnchorSet",
    "RkhsElement",
    "rkhs_inner",
    "rkhs_norm",
    "rkhs_evaluate",
    "reproducing_defect",
    "Membership",
    "membership_functional",
    "quadratic_form_matrix",
    "DefReport",
    "def_space_dimension",
    "UniquenessVerdict",
    "uniqueness_diagnostic",
    "interpolation_check",
    "DEFAULT_SCHEDULE",
]

DEFAULT_SCHEDULE = (8, 16, 32, 64)
CONDITION_LIMIT = 1e12
EIG_CUTOFF = 1e-12
RANGE_TOL = 1e-8


class AnchorSet:
    """Nonempty set of pairwise distinct anchor points."""

    def __init__(self, points, domain: DomainSet | None = None):
        pts = np.asarray(points, dtype=float).reshape(-1)
        if pts.size == 0:
            raise ValueError("anchor set must be nonempty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("anchors must be finite")
        if np.unique(pts).size != pts.size:
            raise ValueError("anchors must be pairwise distinct")
        if domain is not None and not np.all(domain.contains(pts)):
            raise ValueError(f"anchors must lie in {domain!r}")
        pts.setflags(write=False)
        self.points = pts

    @classmethod
    def uniform(cls, domain: DomainSet, n: int, margin: float = 0.01) -> "AnchorSet":
        return cls(domain.interior_grid(n, margin), domain)

    def __len__(self):
        return self.points.size

    def __repr__(self):
        return f"AnchorSet(n={self.points.size})"


@dataclass(frozen=True)
class RkhsElement:
    anchors: AnchorSet
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != len(self.anchors):
            raise ValueError("one coefficient per anchor is required")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def kernel_section(cls, a: float, coeff: complex = 1.0) -> "RkhsElement":
        """``coeff * k_a``."""
        return cls(AnchorSet([a]), np.array([coeff]))


def rkhs_inner(F: LocalKernel, u: RkhsElement, v: RkhsElement) -> complex:
    """``<u, v> = d^H M c`` with ``M[k, j] = F(b_k - a_j)``."""
    a, c = u.anchors.points, u.coeffs
    b, d = v.anchors.points, v.coeffs
    if u is v:
        M = gram_matrix(F, a).T
    else:
        M = F(b[:, None] - a[None, :])
    return complex(np.conj(d) @ M @ c)


def rkhs_norm(F: LocalKernel, u: RkhsElement) -> float:
    return math.sqrt(max(0.0, rkhs_inner(F, u, u).real))


def rkhs_evaluate(F: LocalKernel, u: RkhsElement, x):
    """``u(x) = sum_j c_j F(x - a_j)``; ``x`` may be an array."""
    xs = np.asarray(x, dtype=float)
    vals = F(xs.reshape(-1)[:, None] - u.anchors.points[None, :]) @ u.coeffs
    return complex(vals[0]) if xs.ndim == 0 else vals.reshape(xs.shape)


def reproducing_defect(F: LocalKernel, u: RkhsElement, a: float) -> float:
    """``|u(a) - <u, k_a>|``; zero up to rounding."""
    return abs(rkhs_evaluate(F, u, a) - rkhs_inner(F, u, RkhsElement.kernel_section(a)))


# Quadratic forms g^H K^+ g


@dataclass
class _FormResult:
    Q: np.ndarray               # m x m matrix G^H K^+ G
    out_of_range: np.ndarray    # m x r basis of coefficient directions with G a outside range(K)
    residuals: np.ndarray       # relative range residual per column
    condition: float
    dropped: int
    precision: str
    dps: int | None = None


def _double_form(K: np.ndarray, G: np.ndarray, cutoff: float) -> _FormResult:
    lam, U = np.linalg.eigh(K)
    lmax = float(lam[-1]) if lam.size else 0.0
    if lmax <= 0:
        keep = np.zeros(lam.size, dtype=bool)
    else:
        keep = lam > cutoff * lmax
    Uk, lk = U[:, keep], lam[keep]
    B = Uk.conj().T @ G
    Q = B.conj().T @ (B / lk[:, None])
    Q = 0.5 * (Q + Q.conj().T)
    R = G - Uk @ B
    gn = np.linalg.norm(G, axis=0)
    res = np.where(gn > 0, np.linalg.norm(R, axis=0) / np.where(gn > 0, gn, 1.0), 0.0)
    cond = float(lmax / lam[0]) if lam.size and lam[0] > 0 else math.inf
    return _FormResult(Q, _outside_directions(R, G), res, cond, int(np.sum(~keep)), "double")


def _outside_directions(R: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Coefficient directions ``alpha`` for which ``G alpha`` leaves range(K)."""
    m = G.shape[1]
    scale = max(np.linalg.norm(G), 1e-300)
    _, s, Vh = np.linalg.svd(R, full_matrices=True)
    r = int(np.sum(s > RANGE_TOL * scale))
    return Vh[:r].conj().T if r else np.zeros((m, 0))


def _mp_form(F: LocalKernel, x: np.ndarray, g_mp: Sequence[Callable], max_dps: int,
             agree: float = 1e-6):
    """``G^H K^{-1} G`` by Cholesky in extended precision with adaptive digits.

    Returns ``(Q, dps)``, or ``None`` if the Gram matrix is singular at every
    precision tried.
    """
    n, m = x.size, len(g_mp)
    dps = max(50, 4 * n)
    prev = None
    saved = mpmath.mp.dps
    try:
        while dps <= max_dps:
            mpmath.mp.dps = dps
            xm = [mpmath.mpf(float(v)) for v in x]
            K = mpmath.matrix(n, n)
            for i in range(n):
                for j in range(i + 1):
                    K[i, j] = K[j, i] = F.mp_eval(xm[i] - xm[j])
            try:
                L = mpmath.cholesky(K)
            except (ValueError, ZeroDivisionError):
                prev = None
                dps = int(dps * 1.5)
                continue
            Y = []
            for gfun in g_mp:
                b = [gfun(v) for v in xm]
                y = [mpmath.mpf(0)] * n
                for i in range(n):
                    s = b[i]
                    for k in range(i):
                        s -= L[i, k] * y[k]
                    y[i] = s / L[i, i]
                Y.append(y)
            Q = np.array([[float(mpmath.fsum(Y[p][i] * Y[r][i] for i in range(n)))
                           for r in range(m)] for p in range(m)])
            if prev is not None:
                scale = max(np.max(np.abs(Q)), 1e-300)
                if np.max(np.abs(Q - prev)) <= agree * scale:
                    return Q, dps
            prev = Q
            dps = int(dps * 1.5)
    finally:
        mpmath.mp.dps = saved
    return (prev, dps) if prev is not None else None


def quadratic_form_matrix(F: LocalKernel, anchors: AnchorSet, g: Sequence[Callable], *,
                          precision: str = "auto", g_mp: Sequence[Callable] | None = None,
                          cutoff: float = EIG_CUTOFF, max_dps: int = 2000) -> _FormResult:
    """``Q = G^H K^+ G`` for the columns ``G[:, p] = g[p](anchors)``.

    ``precision`` selects the solve:

    ``"double"``
        Symmetric eigendecomposition with eigenvalues below ``cutoff * lmax``
        dropped.
    ``"auto"``
        As ``"double"``, escalating to an extended-precision Cholesky solve
        when the Gram matrix is ill-conditioned and some ``g`` is not
        resolved by the retained eigenvectors. This requires real kernels with
        an mpmath evaluator and ``g_mp`` (mpmath versions of ``g``). If the
        Gram matrix is exactly singular, directions outside its range get an
        infinite form.
    """
    x = anchors.points
    K = gram_matrix(F, x)
    G = np.column_stack([np.asarray(gp(x), dtype=complex) for gp in g])
    res = _double_form(K, G, cutoff)
    if precision == "double":
        return res
    if precision != "auto":
        raise ValueError("precision must be 'auto' or 'double'")
    unresolved = res.dropped > 0 and np.max(res.residuals) > RANGE_TOL
    if not (unresolved or res.condition > CONDITION_LIMIT):
        return res
    if F.mp_func is None or not F.real or g_mp is None:
        return res
    out = _mp_form(F, x, g_mp, max_dps)
    if out is not None:
        Q, dps = out
        return _FormResult(Q.astype(complex), np.zeros((len(g), 0)), np.zeros(len(g)),
                           res.condition, 0, "extended", dps)
    res.precision = "double-singular"
    return res


def _restricted_eigenvalues(fr: _FormResult) -> np.ndarray:
    """Eigenvalues of Q, with ``inf`` for each direction outside range(K)."""
    m = fr.Q.shape[0]
    W = fr.out_of_range
    r = W.shape[1]
    if r == 0:
        return np.linalg.eigvalsh(fr.Q)
    # orthonormal complement of the out-of-range directions
    full, _ = np.linalg.qr(np.hstack([W, np.eye(m)]))
    N = full[:, r:m]
    finite = np.linalg.eigvalsh(N.conj().T @ fr.Q @ N) if m > r else np.zeros(0)
    return np.concatenate([finite, np.full(r, np.inf)])


@dataclass(frozen=True)
class Membership:
    """Value of ``q_N(g)`` with conditioning diagnostics."""

    q_value: float
    anchors: int
    condition: float
    dropped: int
    residual: float
    precision: str
    flag: str

    def to_dict(self) -> dict:
        return {"anchors": self.anchors, "q_value": self.q_value, "flag": self.flag,
                "condition": self.condition, "dropped": self.dropped,
                "residual": self.residual, "precision": self.precision}


def _flag(fr: _FormResult) -> str:
    if fr.condition > CONDITION_LIMIT:
        return "ill-conditioned"
    if fr.dropped:
        return "rank-deficient"
    return "ok"


def membership_functional(F: LocalKernel, g, anchors: AnchorSet, *, precision: str = "auto",
                          g_mp: Callable | None = None, cutoff: float = EIG_CUTOFF) -> Membership:
    """``q_N(g) = g^H K^+ g`` on the anchor values of ``g``.

    ``q_N(g)`` is the smallest ``C`` with ``|sum_j c_j g(a_j)|^2 <= C ||sum_j
    c_j k_{a_j}||^2`` over the anchors; ``g`` lies in the space iff these
    values stay bounded under refinement. ``g`` is a callable or the vector of
    its values at the anchors. A Gram condition number above ``1e12`` emits
    :class:`IllConditioned` and sets ``flag``.
    """
    if callable(g):
        gfun = g
    else:
        gv = np.asarray(g, dtype=complex).reshape(-1)
        if gv.size != len(anchors):
            raise ValueError("one value of g per anchor is required")
        gfun = lambda _x, _v=gv: _v
    fr = quadratic_form_matrix(F, anchors, [gfun], precision=precision,
                               g_mp=None if g_mp is None else [g_mp], cutoff=cutoff)
    q = float(_restricted_eigenvalues(fr)[0]) if fr.out_of_range.shape[1] else float(fr.Q[0, 0].real)
    flag = _flag(fr)
    if fr.condition > CONDITION_LIMIT:
        warnings.warn(f"Gram condition number {fr.condition:.3g} exceeds {CONDITION_LIMIT:g}",
                      IllConditioned, stacklevel=2)
    return Membership(q, len(anchors), fr.condition, fr.dropped, float(fr.residuals[0]),
                      fr.precision, flag)


@dataclass(frozen=True)
class DefReport:
    """Outcome of the ``f'' = f`` membership study on one interval."""

    dim: int
    schedule: tuple
    eigenvalues: list          # per schedule step, ascending (inf = outside range)
    q_values: dict             # basis name -> list of q_N per step
    ratios: list               # last / first eigenvalue, per direction
    divergence_ratio: float
    singular: bool

    def to_dict(self) -> dict:
        steps = []
        for k, n in enumerate(self.schedule):
            steps.append({
                "anchors": n,
                "q_value": {name: qs[k] for name, qs in self.q_values.items()},
                "eigenvalues": self.eigenvalues[k],
                "flag": "singular" if self.singular else "ok",
            })
        return {"dim": self.dim, "divergence_ratio": self.divergence_ratio,
                "ratios": self.ratios, "steps": steps}


_DEF_BASIS = (
    ("exp(x)", np.exp, mpmath.exp),
    ("exp(-x)", lambda x: np.exp(-np.asarray(x)), lambda x: mpmath.exp(-x)),
)


def def_space_dimension(F: LocalKernel, schedule: Sequence[int] = DEFAULT_SCHEDULE,
                        divergence_ratio: float = 10.0, *, margin: float = 0.01,
                        precision: str = "auto") -> DefReport:
    """Dimension of ``{f in H_F : f'' = f}`` on an interval, estimated numerically.

    For each anchor count in ``schedule`` the 2x2 matrix
    ``Q_N = G^H K^+ G`` with ``G = [exp(x), exp(-x)]`` is formed. Its
    eigenvalues measure the squared norm of the best unit combinations; a
    direction whose eigenvalue grows by less than ``divergence_ratio``
    between the first and last step counts as a member.
    """
    F.domain.require_interval()
    g = [b[1] for b in _DEF_BASIS]
    g_mp = [b[2] for b in _DEF_BASIS]
    eigs, qv = [], {b[0]: [] for b in _DEF_BASIS}
    singular = False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditioned)
        for n in schedule:
            fr = quadratic_form_matrix(F, AnchorSet.uniform(F.domain, n, margin), g,
                                       precision=precision, g_mp=g_mp)
            singular |= fr.precision == "double-singular"
            ev = _restricted_eigenvalues(fr)
            eigs.append([float(e) for e in ev])
            outside = fr.out_of_range
            for p, (name, _, _) in enumerate(_DEF_BASIS):
                e_p = np.zeros(len(g))
                e_p[p] = 1.0
                escaped = outside.shape[1] and np.linalg.norm(outside.conj().T @ e_p) > 1e-8
                qv[name].append(math.inf if escaped else float(fr.Q[p, p].real))
    first, last = np.array(eigs[0]), np.array(eigs[-1])
    ratios = []
    for a, b in zip(first, last):
        if not math.isfinite(b):
            ratios.append(math.inf)
        elif a <= 0:
            ratios.append(math.inf if b > 0 else 1.0)
        else:
            ratios.append(float(b / a))
    dim = int(sum(r < divergence_ratio for r in ratios))
    return DefReport(dim, tuple(schedule), eigs, qv, ratios, divergence_ratio, singular)


@dataclass(frozen=True)
class UniquenessVerdict:
    """``unique`` iff the ``f'' = f`` space is trivial; ``advisory`` marks singular Grams."""

    unique: bool
    def_dim: int
    advisory: bool
    report: DefReport

    def to_dict(self) -> dict:
        return {"verdict": "Unique" if self.unique else "NonUnique", "def_dim": self.def_dim,
                "advisory": self.advisory, "report": self.report.to_dict()}


def uniqueness_diagnostic(F: LocalKernel, schedule: Sequence[int] = DEFAULT_SCHEDULE,
                          divergence_ratio: float = 10.0) -> UniquenessVerdict:
    rep = def_space_dimension(F, schedule, divergence_ratio)
    return UniquenessVerdict(rep.dim == 0, rep.dim, rep.singular, rep)


def interpolation_check(F: LocalKernel, candidate: Callable, x: float, anchors: AnchorSet,
                        tol: float | None = None) -> Verdict:
    """Check that ``y -> G(y - x)`` restricted to the anchors obeys the extension bound.

    For a positive definite extension ``G`` of ``F`` the Cauchy-Schwarz
    inequality in the space of ``G`` gives ``q_N <= G(0)`` for every anchor
    set; since ``G(0) = F(0)`` this is ``F(0) * G(0)`` after normalizing
    ``F(0) = 1``. Pass iff ``q_N <= G(0) + tol``.
    """
    g0 = float(np.real(candidate(np.zeros(1))[0]))
    tol = 1e-10 * max(1.0, g0) if tol is None else tol
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditioned)
        m = membership_functional(F, lambda y: candidate(y - x), anchors, precision="double")
    return Verdict(m.q_value <= g0 + tol, m.q_value, tol, "q_value",
                   {"bound": g0, "x": float(x), "anchors": len(anchors), "flag": m.flag})
