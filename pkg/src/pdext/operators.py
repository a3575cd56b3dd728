"""Smoothed vectors ``F_phi`` and the derivative operator on their span.

Test functions are combinations of standard mollifier bumps. The sesquilinear
form

    <F_phi, F_psi> = int int F(y - x) phi(x) conj(psi(y)) dx dy

is computed by a tensor trapezoid rule over each pair of bump supports. The
operator ``F_phi -> -i F_{phi'}`` is represented only through its matrix
elements, since ``phi'`` leaves any finite bump span.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from scipy import integrate, linalg, special

from .errors import OutOfDomain
from .kernel import LocalKernel

__all__ = [
    "BumpFunction",
    "QuadratureSpec",
    "bump_mass",
    "wf_evaluate",
    "wf_inner",
    "wf_gram",
    "hermitian_defect",
    "sjf_matrix",
    "pencil_eigenvalues",
    "conjugation_check",
]

PIECE_ORDER = 5


@lru_cache(maxsize=None)
def bump_mass() -> float:
    """``int_{-1}^{1} exp(-1/(1-u^2)) du``."""
    val, _ = integrate.quad(lambda u: math.exp(-1.0 / (1.0 - u * u)), -1.0, 1.0,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class BumpFunction:
    """``coeff * b((x - center) / width)`` or its derivative.

    ``b(u) = exp(-1 / (1 - u^2))`` for ``|u| < 1`` and 0 otherwise. With
    ``order=1`` the function is the exact derivative in ``x`` of the
    ``order=0`` bump with the same parameters.
    """

    center: float
    width: float
    coeff: complex = 1.0
    order: int = 0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("bump width must be positive")
        if self.order not in (0, 1):
            raise ValueError("only the bump and its first derivative are supported")

    @classmethod
    def normalized(cls, center: float, width: float) -> "BumpFunction":
        """Bump with unit integral (a mollifier at ``center``)."""
        return cls(center, width, 1.0 / (width * bump_mass()))

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width

    @property
    def key(self) -> tuple:
        """Identity of the shape, ignoring the coefficient."""
        return (self.center, self.width, self.order)

    def shape(self) -> "BumpFunction":
        return replace(self, coeff=1.0)

    def derivative(self) -> "BumpFunction":
        if self.order != 0:
            raise ValueError("second derivatives are not supported")
        return replace(self, order=1)

    def scaled(self, c: complex) -> "BumpFunction":
        return replace(self, coeff=c * self.coeff)

    def reflected(self, p: float, r: float) -> "BumpFunction":
        """The function ``t -> conj(self(p + r - t))``."""
        sign = -1.0 if self.order == 1 else 1.0
        return BumpFunction(p + r - self.center, self.width,
                            sign * np.conj(complex(self.coeff)), self.order)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = (x - self.center) / self.width
        inside = np.abs(u) < 1
        us = np.where(inside, u, 0.0)
        base = np.where(inside, np.exp(-1.0 / (1.0 - us * us)), 0.0)
        if self.order == 1:
            base = base * (-2.0 * us / (1.0 - us * us) ** 2) / self.width
        return self.coeff * base


BumpCombo = Union[BumpFunction, Sequence[BumpFunction]]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor trapezoid rule with ``nodes_per_axis`` nodes per bump support."""

    nodes_per_axis: int = 200
    rule: str = "trapezoid"

    def __post_init__(self):
        if self.nodes_per_axis < 32:
            raise ValueError("nodes_per_axis must be at least 32")
        if self.rule != "trapezoid":
            raise ValueError("only the trapezoid rule is implemented")

    def nodes(self, bump: BumpFunction) -> tuple[np.ndarray, np.ndarray]:
        a, b = bump.support
        x = np.linspace(a, b, self.nodes_per_axis)
        w = np.full(x.size, (b - a) / (x.size - 1))
        w[0] = w[-1] = 0.5 * w[1]
        return x, w

    def piece_nodes(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Trapezoid rule on ``[a, b]`` after the substitution ``x = a + (b - a) I_u``.

        ``I_u`` is the regularized incomplete beta function with parameters
        ``(PIECE_ORDER + 1, PIECE_ORDER + 1)``; its derivative vanishes to
        order ``PIECE_ORDER`` at both ends, so integrands that are smooth on
        ``[a, b]`` but not flat at its ends keep high-order accuracy.
        """
        m = PIECE_ORDER + 1
        u = np.linspace(0.0, 1.0, self.nodes_per_axis)
        h = u[1] - u[0]
        x = a + (b - a) * special.betainc(m, m, u)
        w = (b - a) * h * u ** PIECE_ORDER * (1 - u) ** PIECE_ORDER / special.beta(m, m)
        return x, w


def _as_list(phi: BumpCombo) -> list[BumpFunction]:
    if isinstance(phi, BumpFunction):
        return [phi]
    return list(phi)


def _check_support(F: LocalKernel, bumps: list[BumpFunction]):
    for b in bumps:
        a, c = b.support
        inside = any(lo < a and c < hi for lo, hi in F.domain.intervals)
        if not inside:
            raise OutOfDomain(f"bump support [{a}, {c}] is not inside {F.domain!r}",
                              points=np.array([a, c]))


def _pair_integral(F: LocalKernel, bx: BumpFunction, by: BumpFunction, q: QuadratureSpec) -> complex:
    """``int int F(y - x) bx(x) conj(by(y)) dx dy`` for unit-coefficient shapes."""
    x, wx = q.nodes(bx)
    y, wy = q.nodes(by)
    a = wx * bx(x)
    b = wy * np.conj(by(y))
    K = F(y[None, :] - x[:, None])
    return complex(a @ K @ b)


def wf_inner(F: LocalKernel, phi: BumpCombo, psi: BumpCombo, q: QuadratureSpec | None = None) -> complex:
    """``<F_phi, F_psi>`` by tensor trapezoid quadrature.

    The result satisfies ``wf_inner(F, phi, psi) == conj(wf_inner(F, psi, phi))``
    exactly: every shape pair is integrated in a canonical order and the
    contributions are summed with ``math.fsum``.
    """
    q = q or QuadratureSpec()
    ps, qs = _as_list(phi), _as_list(psi)
    _check_support(F, ps + qs)
    cache: dict = {}
    re_terms, im_terms = [], []
    for bi in ps:
        for bk in qs:
            swap = bk.key < bi.key
            key = (bk.key, bi.key) if swap else (bi.key, bk.key)
            if key not in cache:
                s0, s1 = (bk, bi) if swap else (bi, bk)
                cache[key] = _pair_integral(F, s0.shape(), s1.shape(), q)
            if swap:
                w = complex(bk.coeff) * np.conj(complex(bi.coeff))
                val = np.conj(w * cache[key])
            else:
                w = complex(bi.coeff) * np.conj(complex(bk.coeff))
                val = w * cache[key]
            re_terms.append(val.real)
            im_terms.append(val.imag)
    return complex(math.fsum(re_terms), math.fsum(im_terms))


def wf_evaluate(F: LocalKernel, phi: BumpCombo, x: float, q: QuadratureSpec | None = None) -> complex:
    """``F_phi(x) = int F(x - y) phi(y) dy`` by trapezoid quadrature.

    When ``x - y`` crosses a kink of ``F`` inside the support of a bump, the
    support is split there and each piece uses :meth:`QuadratureSpec.piece_nodes`.
    """
    q = q or QuadratureSpec()
    bumps = _as_list(phi)
    _check_support(F, bumps)
    if not F.domain.contains(x):
        raise OutOfDomain(f"x={x} is not in {F.domain!r}", points=np.array([x]))
    terms = []
    for b in bumps:
        lo, hi = b.support
        cuts = sorted({x - k for k in F.kinks if lo < x - k < hi})
        if cuts:
            edges = [lo, *cuts, hi]
            pieces = [q.piece_nodes(e0, e1) for e0, e1 in zip(edges[:-1], edges[1:])]
            y = np.concatenate([p[0] for p in pieces])
            w = np.concatenate([p[1] for p in pieces])
        else:
            y, w = q.nodes(b)
        terms.append(complex(np.sum(w * b(y) * F(x - y))))
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def wf_gram(F: LocalKernel, basis: Sequence[BumpFunction], q: QuadratureSpec | None = None) -> np.ndarray:
    """``G[i, k] = <F_{phi_i}, F_{phi_k}>``."""
    n = len(basis)
    G = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for k in range(i, n):
            G[i, k] = wf_inner(F, basis[i], basis[k], q)
            G[k, i] = np.conj(G[i, k])
    return G


def _pair_defects(F, basis, q):
    d = np.zeros((len(basis), len(basis)))
    for i, bi in enumerate(basis):
        for k, bk in enumerate(basis):
            s = wf_inner(F, bi.derivative(), bk, q) + wf_inner(F, bi, bk.derivative(), q)
            d[i, k] = abs(s)
    return d


def hermitian_defect(F: LocalKernel, basis: Sequence[BumpFunction], q: QuadratureSpec | None = None,
                     *, per_pair: bool = False):
    """Largest ``|<F_{phi_i'}, F_{phi_k}> + <F_{phi_i}, F_{phi_k'}>|`` over basis pairs.

    The identity holds exactly for the continuous forms, so the value measures
    quadrature error. With ``per_pair`` the full matrix of pair defects is
    returned as well.
    """
    q = q or QuadratureSpec()
    d = _pair_defects(F, list(basis), q)
    top = float(d.max()) if d.size else 0.0
    return (top, d) if per_pair else top


def sjf_matrix(F: LocalKernel, basis: Sequence[BumpFunction], q: QuadratureSpec | None = None) -> np.ndarray:
    """``M[i, k] = <-i F_{phi_i'}, F_{phi_k}>``, matrix of ``F_phi -> -i F_{phi'}``."""
    n = len(basis)
    M = np.zeros((n, n), dtype=complex)
    for i, bi in enumerate(basis):
        di = bi.derivative().scaled(-1j)
        for k, bk in enumerate(basis):
            M[i, k] = wf_inner(F, di, bk, q)
    return M


def pencil_eigenvalues(M: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Generalized eigenvalues of ``M v = lambda G v``."""
    return linalg.eigvals(M, G)


def conjugation_check(F: LocalKernel, basis: Sequence[BumpFunction], q: QuadratureSpec | None = None) -> float:
    """Defect of the conjugation symmetry of the derivative operator.

    With ``K(t) = p + r - t`` on ``Omega = (p, r)`` and
    ``phi_K = conj(phi o K)``, the map ``F_phi -> F_{phi_K}`` commutes with
    ``F_phi -> -i F_{phi'}``, which gives

        <S F_{phi_K}, F_{psi_K}> = conj <S F_phi, F_psi>.

    Returns the largest deviation over basis pairs.
    """
    p, r = F.domain.require_interval()
    q = q or QuadratureSpec()
    basis = list(basis)
    refl = [b.reflected(p, r) for b in basis]
    M = sjf_matrix(F, basis, q)
    MK = sjf_matrix(F, refl, q)
    return float(np.max(np.abs(MK - np.conj(M)))) if M.size else 0.0
