"""Multiplication model of an extension in ``L^2(mu)``.

For a measure ``mu`` with ``mu_hat = G`` the point evaluations of the kernel
space embed as ``gamma_a(t) = exp(-i a t)`` and translation by ``s`` acts as
multiplication by ``exp(-i s t)``. With these conventions

    <gamma_b, gamma_a> = mu_hat(a - b),   V(a - b) gamma_b = gamma_a,
    <gamma_x0, V(t) gamma_x0> = mu_hat(t).

Two measures extending the same kernel give two such models; the operator
comparing them through a common anchor span is built in
:func:`scattering_operator`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotAnExtension, RankDeficient
from .extend import from_measure, restriction_residual
from .kernel import LocalKernel
from .measure import Measure
from .operators import BumpFunction, QuadratureSpec
from .rkhs import AnchorSet

__all__ = [
    "SpectralVector",
    "embed_gamma",
    "v_translate",
    "spectral_inner",
    "spectral_norm",
    "extension_via_representation",
    "bump_transform",
    "bump_spectral_form",
    "ScatterReport",
    "scattering_operator",
    "DEFAULT_TRANSLATIONS",
]

DEFAULT_TRANSLATIONS = (0.1, 0.5, 1.0)


def _spectral_nodes(mu: Measure) -> np.ndarray:
    if mu.dim != 1:
        raise ValueError("the multiplication model is implemented on the line")
    return mu.nodes()[:, 0]


@dataclass(frozen=True, eq=False)
class SpectralVector:
    """Element of ``L^2(mu)`` given by its values at the measure's nodes."""

    measure: Measure
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if v.size != self.measure.size:
            raise ValueError("one value per measure node is required")
        object.__setattr__(self, "values", v)

    def __add__(self, other: "SpectralVector") -> "SpectralVector":
        _same(self, other)
        return SpectralVector(self.measure, self.values + other.values)

    def __sub__(self, other: "SpectralVector") -> "SpectralVector":
        _same(self, other)
        return SpectralVector(self.measure, self.values - other.values)

    def scaled(self, c: complex) -> "SpectralVector":
        return SpectralVector(self.measure, c * self.values)


def _same(f: SpectralVector, g: SpectralVector):
    if f.measure is not g.measure:
        raise ValueError("vectors belong to different measures")


def embed_gamma(a: float, mu: Measure) -> SpectralVector:
    """``gamma_a`` as the function ``t -> exp(-i a t)``."""
    t = _spectral_nodes(mu)
    return SpectralVector(mu, np.exp(-1j * a * t))


def v_translate(s: float, f: SpectralVector) -> SpectralVector:
    """Translation by ``s``: multiplication by ``exp(-i s t)``."""
    t = _spectral_nodes(f.measure)
    return SpectralVector(f.measure, np.exp(-1j * s * t) * f.values)


def spectral_inner(f: SpectralVector, g: SpectralVector) -> complex:
    """``int f conj(g) d mu``, with the measure's quadrature weights."""
    _same(f, g)
    return complex(np.sum(f.measure.masses() * f.values * np.conj(g.values)))


def spectral_norm(f: SpectralVector) -> float:
    return math.sqrt(max(0.0, spectral_inner(f, f).real))


def extension_via_representation(mu: Measure, x0: float, t: float) -> complex:
    """``<gamma_x0, V(t) gamma_x0>``, which equals ``mu_hat(t)`` for every ``x0``."""
    g = embed_gamma(x0, mu)
    return spectral_inner(g, v_translate(t, g))


def bump_transform(phi: BumpFunction, t, q: QuadratureSpec | None = None,
                   chunk: int = 8192) -> np.ndarray:
    """``phi_hat(t) = int phi(x) exp(-i x t) dx`` by the bump's trapezoid rule."""
    q = q or QuadratureSpec()
    x, w = q.nodes(phi)
    a = w * phi(x)
    t = np.asarray(t, dtype=float).reshape(-1)
    out = np.empty(t.size, dtype=complex)
    for s in range(0, t.size, chunk):
        out[s:s + chunk] = np.exp(-1j * np.outer(t[s:s + chunk], x)) @ a
    return out


def bump_spectral_form(phi: Sequence[BumpFunction], psi: Sequence[BumpFunction], mu: Measure,
                       q: QuadratureSpec | None = None) -> complex:
    """``int phi_hat conj(psi_hat) d mu``, the spectral side of ``<F_phi, F_psi>``."""
    t = _spectral_nodes(mu)
    ph = sum(bump_transform(b, t, q) for b in phi)
    ps = sum(bump_transform(b, t, q) for b in psi)
    return complex(np.sum(mu.masses() * ph * np.conj(ps)))


@dataclass
class ScatterReport:
    """Comparison of two multiplication models through a common anchor span."""

    anchors: int
    translations: list
    defects: list                     # per translation, max over probes
    interior_defects: list            # same, over probes that stay inside Omega
    probe_residuals: list             # ||T gamma_a - gamma_a|| in L^2(nu)
    multiplier_samples: list          # {t, re, im, spread}
    gaps: int                         # nu-nodes without a multiplier estimate
    residual_mu: float
    residual_nu: float
    dropped: int
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "anchors": self.anchors,
            "translations": self.translations,
            "defects": self.defects,
            "interior_defects": self.interior_defects,
            "probe_residuals": self.probe_residuals,
            "multiplier_samples": self.multiplier_samples,
            "gaps": self.gaps,
            "residual_mu": self.residual_mu,
            "residual_nu": self.residual_nu,
            "dropped": self.dropped,
            **self.details,
        }


class _Embedding:
    """Anchor-coefficient vectors mapped into ``L^2(mu)``."""

    def __init__(self, mu: Measure, anchors: np.ndarray):
        self.mu = mu
        self.t = _spectral_nodes(mu)
        self.m = mu.masses()
        self.A = np.exp(-1j * np.outer(self.t, anchors))

    def gram(self) -> np.ndarray:
        G = self.A.conj().T @ (self.m[:, None] * self.A)
        return 0.5 * (G + G.conj().T)

    def adjoint(self, f: np.ndarray) -> np.ndarray:
        return self.A.conj().T @ (self.m * f)

    def apply(self, c: np.ndarray) -> np.ndarray:
        return self.A @ c

    def norm(self, f: np.ndarray) -> float:
        return math.sqrt(max(0.0, float(np.sum(self.m * np.abs(f) ** 2))))


def scattering_operator(F: LocalKernel, mu: Measure, nu: Measure, anchors: AnchorSet,
                        probes: Sequence = (0.2, 0.37, 0.5), *,
                        translations: Sequence[float] = DEFAULT_TRANSLATIONS,
                        residual_tol: float = 2e-3, residual_samples: int = 201,
                        cutoff: float = 1e-12, mass_threshold: float = 1e-12,
                        max_multiplier_samples: int = 201) -> ScatterReport:
    """Finite-rank comparison ``T = E_nu P E_mu^+`` of two extensions of ``F``.

    ``E_mu`` sends anchor coefficients ``c`` to ``sum_j c_j gamma_{a_j}`` in
    ``L^2(mu)``; ``E_mu^+`` is its least-squares inverse with Gram eigenvalues
    below ``cutoff * lmax`` discarded. Probes are positions ``a`` (embedded as
    ``gamma_a``) or :class:`SpectralVector` objects over ``mu``.

    The report contains, per translation ``s``, the intertwining defect
    ``max ||T V_mu(s) f - V_nu(s) T f|| / ||f||`` over probes; the same
    restricted to position probes with ``a + s`` inside ``Omega``; the
    residuals ``||T gamma_a - gamma_a||`` in ``L^2(nu)``; and an estimate of
    the multiplier ``S`` with ``T f = S f`` at nodes of ``nu`` carrying mass
    and lying inside the node range of ``mu``.

    Raises
    ------
    NotAnExtension
        If either measure's transform misses ``F`` by more than
        ``residual_tol`` plus its truncation budget on ``Omega - Omega``.
    """
    lo, hi = F.domain.bounds()
    D = hi - lo
    z = np.linspace(-D, D, residual_samples + 2)[1:-1]
    z = z[F.in_domain(z)]
    res = []
    for name, meas in (("mu", mu), ("nu", nu)):
        cand = from_measure(meas)
        r = restriction_residual(cand, F, z)
        if r > residual_tol + cand.truncation_budget:
            raise NotAnExtension(f"{name} misses F by {r:.3e}", residual=r)
        res.append(r)

    a = anchors.points
    Em, En = _Embedding(mu, a), _Embedding(nu, a)
    lam, U = np.linalg.eigh(Em.gram())
    keep = lam > cutoff * lam[-1]
    dropped = int(np.sum(~keep))
    if dropped:
        warnings.warn(f"{dropped} of {lam.size} Gram eigenvalues below cutoff", RankDeficient,
                      stacklevel=2)
    Uk, lk = U[:, keep], lam[keep]

    def T(f: np.ndarray) -> np.ndarray:
        c = Uk @ ((Uk.conj().T @ Em.adjoint(f)) / lk)
        return En.apply(c)

    tm, tn = Em.t, En.t
    probe_vals, positions = [], []
    for p in probes:
        if isinstance(p, SpectralVector):
            if p.measure is not mu:
                raise ValueError("spectral probes must live over mu")
            probe_vals.append(p.values)
            positions.append(None)
        else:
            probe_vals.append(np.exp(-1j * float(p) * tm))
            positions.append(float(p))

    defects, interior = [], []
    for s in translations:
        worst, worst_in = 0.0, None
        for f, pos in zip(probe_vals, positions):
            lhs = T(np.exp(-1j * s * tm) * f)
            rhs = np.exp(-1j * s * tn) * T(f)
            d = En.norm(lhs - rhs) / Em.norm(f)
            worst = max(worst, d)
            if pos is not None and F.domain.contains(pos + s):
                worst_in = d if worst_in is None else max(worst_in, d)
        defects.append(float(worst))
        interior.append(None if worst_in is None else float(worst_in))

    residuals, ratios = [], []
    for f, pos in zip(probe_vals, positions):
        if pos is None:
            continue
        Tf = T(f)
        residuals.append(float(En.norm(Tf - np.exp(-1j * pos * tn))))
        ratios.append(Tf * np.exp(1j * pos * tn))

    samples, gaps = [], int(tn.size)
    if ratios:
        R = np.array(ratios)
        ok = (En.m > mass_threshold * np.max(En.m)) & (tn >= tm.min()) & (tn <= tm.max())
        gaps = int(np.sum(~ok))
        idx = np.flatnonzero(ok)
        if idx.size > max_multiplier_samples:
            idx = idx[np.linspace(0, idx.size - 1, max_multiplier_samples).round().astype(int)]
        for k in idx:
            mean = R[:, k].mean()
            spread = float(np.max(np.abs(R[:, k] - mean)))
            samples.append({"t": float(tn[k]), "re": float(mean.real), "im": float(mean.imag),
                            "spread": spread})

    return ScatterReport(len(a), [float(s) for s in translations], defects, interior, residuals,
                         samples, gaps, float(res[0]), float(res[1]), dropped)
