import math

import numpy as np
import pytest

from pdext.errors import MeasureShapeMismatch, NoBackingMeasure, NotConvex, NotDecreasing
from pdext.extend import (
    ExtensionCandidate,
    compact_support_flag,
    convex_combination,
    from_measure,
    is_valid_extension,
    polya_extension,
    restriction_residual,
    tangent_continuation,
    zero_pad,
)
from pdext.kernel import DomainSet, LocalKernel, builtin_kernel, check_positive_definite
from pdext.measure import DiscreteMeasure, fourier_on_grid, point_mass, uniform_density

SAMPLES = np.linspace(-0.99, 0.99, 199)


def f2(x):
    a = np.abs(x)
    return np.where(a <= 1, np.exp(-a), np.where(a <= 2, math.exp(-1) * (2 - a), 0.0))


@pytest.fixture(scope="module")
def polya(expneg):
    return polya_extension(expneg, n_nodes=4096)


def test_from_measure_cauchy(cauchy, expneg):
    c = from_measure(cauchy)
    assert c.real
    assert restriction_residual(c, expneg, SAMPLES) <= 1e-3
    assert is_valid_extension(c, expneg, SAMPLES).passed


def test_from_measure_simple():
    c = from_measure(point_mass())
    assert np.allclose(c(np.linspace(-3, 3, 7)), 1.0)
    s = from_measure(uniform_density(1.0, 4001))
    t = np.array([0.5, 1.0, 3.0])
    assert np.max(np.abs(s(t) - np.sin(t) / t)) < 1e-6


def test_residual_of_own_formula(expneg):
    c = ExtensionCandidate(lambda t: np.exp(-np.abs(t)))
    assert restriction_residual(c, expneg, SAMPLES) == 0.0


def test_polya_matches_piecewise_formula(polya, expneg):
    x = np.linspace(0, 2, 2001)
    assert np.max(np.abs(polya(x) - f2(x))) <= 1e-12
    assert restriction_residual(polya, expneg, SAMPLES) == 0.0
    assert polya.diagnostics["tangent_zero"] == pytest.approx(2.0, abs=1e-14)


def test_polya_density(polya, expneg):
    A = polya.backing_measure
    assert np.min(A.values) >= -1e-9
    z = np.linspace(-2, 2, 4097)
    assert np.max(np.abs(fourier_on_grid(A, z) - f2(z))) <= 1e-6


def test_polya_density_at_origin(expneg):
    A = polya_extension(expneg).backing_measure
    k = int(np.argmin(np.abs(A.grid.points())))
    assert A.grid.points()[k] == 0.0
    assert abs(A.values[k] - (2 - math.exp(-1)) / (2 * math.pi)) < 1e-9


def test_polya_round_trip_refines(expneg):
    res = [restriction_residual(from_measure(polya_extension(expneg, n_nodes=n).backing_measure),
                                expneg, SAMPLES) for n in (512, 2048, 8192)]
    assert res[0] > res[1] > res[2]


def test_tangent_continuation(expneg):
    t = tangent_continuation(expneg)
    assert t.slope == pytest.approx(-math.exp(-1), abs=1e-15)
    assert t.cutoff == pytest.approx(2.0, abs=1e-14)
    fd = tangent_continuation(expneg, use_derivative=False)
    assert fd.method == "backward-difference" and abs(fd.cutoff - 2.0) < 1e-8
    g = builtin_kernel("gaussian", DomainSet.interval(0, 1))
    tg = tangent_continuation(g)
    assert tg.slope == pytest.approx(-2 * math.exp(-1)) and tg.cutoff == pytest.approx(1.5)


def test_polya_shape_errors(unit):
    with pytest.raises(NotConvex):
        polya_extension(builtin_kernel("gaussian", unit))
    bumpy = LocalKernel(unit, lambda x: 0.5 + 0.5 * np.cos(4 * np.asarray(x)))
    with pytest.raises(NotDecreasing):
        polya_extension(bumpy)


def test_polya_cutoff_below_tangent_zero(expneg):
    with pytest.raises(ValueError):
        polya_extension(expneg, cutoff=1.5)


def test_polya_candidate_is_pd(polya, rng):
    pts = np.sort(rng.uniform(-5, 5, 40))
    G = LocalKernel(DomainSet.real_line(), polya)
    assert check_positive_definite(G, pts).passed


def test_zero_pad_exponential_fails(expneg):
    _, diag = zero_pad(expneg)
    assert diag.verdict == "fail" and diag.min_eig < -1e-3
    assert len(diag.witness_points) >= 2


def test_zero_pad_triangle_passes():
    tri = builtin_kernel("triangle", DomainSet.interval(0, 1))
    _, diag = zero_pad(tri)
    assert diag.verdict == "pass" and diag.min_eig >= -1e-10


def test_zero_pad_split_domain():
    F = builtin_kernel("split_triangle", DomainSet([(-0.25, 0.25), (0.75, 1.0)]))
    cand, diag = zero_pad(F)
    assert diag.min_eig <= -1e-3
    G = LocalKernel(DomainSet.real_line(), cand)
    assert check_positive_definite(G, 0.49 * np.arange(40)).min_eigenvalue <= -1e-3


def test_zero_pad_deterministic(expneg):
    assert zero_pad(expneg, seed=3)[1] == zero_pad(expneg, seed=3)[1]


def test_convex_combination(polya, cauchy, expneg, rng):
    c1 = from_measure(cauchy)
    assert convex_combination(c1, polya, 1.0) is c1
    assert convex_combination(c1, polya, 0.0) is polya
    with pytest.warns(MeasureShapeMismatch):
        half = convex_combination(c1, polya, 0.5)
    r = restriction_residual(half, expneg, SAMPLES)
    assert r <= max(restriction_residual(c1, expneg, SAMPLES), restriction_residual(polya, expneg, SAMPLES))
    with pytest.warns(MeasureShapeMismatch):
        mix = convex_combination(c1, polya, 0.3)
    G = LocalKernel(DomainSet.real_line(), mix)
    assert check_positive_definite(G, np.sort(rng.uniform(-4, 4, 30))).passed


def test_convex_combination_of_atoms():
    a = from_measure(DiscreteMeasure([-1.0, 1.0], [0.5, 0.5]))
    b = from_measure(DiscreteMeasure([0.0, 1.0], [0.5, 0.5]))
    c = convex_combination(a, b, 0.25)
    m = c.backing_measure
    assert m.size == 3 and float(np.sum(m.weights)) == pytest.approx(1.0)
    assert c(np.array([0.7]))[0] == pytest.approx(0.25 * a(np.array([0.7]))[0] + 0.75 * b(np.array([0.7]))[0])


def test_compact_support_flag(polya):
    rep = compact_support_flag(polya)
    assert rep.compact and not rep.singleton_implied and rep.caveat
    atoms = compact_support_flag(from_measure(DiscreteMeasure([-1.0, 1.0], [0.5, 0.5])))
    assert atoms.compact and atoms.radius == 1.0 and atoms.singleton_implied
    with pytest.raises(NoBackingMeasure):
        compact_support_flag(ExtensionCandidate(lambda t: np.ones_like(t)))
