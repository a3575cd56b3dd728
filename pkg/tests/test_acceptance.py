"""Acceptance criteria 1 to 11; each test prints one PASS/FAIL line."""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from pdext.cli import run
from pdext.extend import from_measure, polya_extension, zero_pad
from pdext.gauss import empirical_covariance, increment_second_moment, sample_stationary, sample_stationary_increment
from pdext.kernel import (
    DomainSet,
    LocalKernel,
    builtin_kernel,
    check_conditionally_negative,
    check_positive_definite,
)
from pdext.measure import DiscreteMeasure, cauchy_density, dual_grid, fourier_on_grid, fourier_transform
from pdext.operators import BumpFunction, QuadratureSpec, conjugation_check, hermitian_defect
from pdext.represent import embed_gamma, extension_via_representation, scattering_operator, v_translate
from pdext.rkhs import (
    AnchorSet,
    RkhsElement,
    def_space_dimension,
    interpolation_check,
    membership_functional,
    reproducing_defect,
    rkhs_norm,
)
from pdext.spectral import ExponentialFamily, exponential_gram, lambda_pattern, max_offdiag

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
UNIT = DomainSet.interval(0.0, 1.0)


def expneg():
    return builtin_kernel("exponential", UNIT)


def f2(x):
    a = np.abs(x)
    return np.where(a <= 1, np.exp(-a), np.where(a <= 2, math.exp(-1) * (2 - a), 0.0))


def test_c01_cauchy_laplace(criterion):
    start = time.perf_counter()
    mu = cauchy_density(radius=2000.0)
    ts = np.linspace(-1.0, 1.0, 41)
    err = float(np.max(np.abs(fourier_on_grid(mu, ts) - np.exp(-np.abs(ts)))))
    elapsed = time.perf_counter() - start
    criterion(1, err <= 1e-3 and elapsed < 5.0, f"max error {err:.3e} (<= 1e-3), {elapsed:.2f} s (< 5 s)")


def test_c02_polya_round_trip(criterion):
    F = expneg()
    cand = polya_extension(F, n_nodes=4096)
    x = np.linspace(0.0, 2.0, 2001)
    formula = float(np.max(np.abs(cand(x) - f2(x))))
    A = cand.backing_measure
    amin = float(np.min(A.values))
    xg, _ = dual_grid(cand.diagnostics["support_radius"], 4096)
    z = xg.points()
    z = z[np.abs(z) <= 2.0]
    roundtrip = float(np.max(np.abs(fourier_on_grid(A, z) - f2(z))))
    A_default = polya_extension(F).backing_measure
    k = int(np.argmin(np.abs(A_default.grid.points())))
    a0 = abs(A_default.values[k] - (2 - math.exp(-1)) / (2 * math.pi))
    ok = formula <= 1e-12 and amin >= -1e-9 and roundtrip <= 1e-6 and a0 <= 1e-9
    criterion(2, ok, f"formula {formula:.2e} (<= 1e-12), min A {amin:.2e} (>= -1e-9), "
                     f"round trip at {z.size} nodes {roundtrip:.2e} (<= 1e-6), A(0) {a0:.2e} (<= 1e-9)")


def test_c03_disconnected_counterexample(criterion):
    omega = DomainSet([(-0.25, 0.25), (0.75, 1.0)])
    F = builtin_kernel("split_triangle", omega, cut=0.5)
    pts = omega.random_points(20, np.random.default_rng(0), margin=0.01)
    mixed = bool(np.any(pts < 0.5) and np.any(pts > 0.5))
    pd = check_positive_definite(F, pts)
    cand, diag = zero_pad(F)
    G = LocalKernel(DomainSet.real_line(), cand)
    witness = check_positive_definite(G, 0.49 * np.arange(40)).min_eigenvalue
    ok = mixed and pd.min_eigenvalue >= -1e-10 and witness <= -1e-3 and diag.verdict == "fail"
    criterion(3, ok, f"min eig on 20 mixed points {pd.min_eigenvalue:.3e} (>= -1e-10), "
                     f"zero-pad at 40 x 0.49 {witness:.3e} (<= -1e-3), search worst {diag.min_eig:.3e}")


def test_c04_uniqueness(criterion):
    start = time.perf_counter()
    e = def_space_dimension(expneg())
    s = def_space_dimension(builtin_kernel("sinc", UNIT))
    elapsed = time.perf_counter() - start
    grow_e = [e.q_values[n][-1] / e.q_values[n][0] for n in ("exp(x)", "exp(-x)")]
    grow_s = [s.q_values[n][-1] / s.q_values[n][0] for n in ("exp(x)", "exp(-x)")]
    ok = e.dim == 2 and s.dim == 0 and max(grow_e) < 10 and min(grow_s) >= 10 and elapsed < 10
    criterion(4, ok, f"dim exp {e.dim} (q growth {max(grow_e):.3g} < 10), dim sinc {s.dim} "
                     f"(q growth {min(grow_s):.3g} >= 10), {elapsed:.2f} s (< 10 s)")


def test_c05_rkhs_identities(criterion):
    F = expneg()
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 11))
        u = RkhsElement(AnchorSet(rng.uniform(0.0, 1.0, n)), rng.normal(size=n) + 1j * rng.normal(size=n))
        a = float(rng.uniform(0.0, 1.0))
        scale = rkhs_norm(F, u) * math.sqrt(F.value_at_zero)
        worst = max(worst, reproducing_defect(F, u, a) / scale)
    anchors = AnchorSet.uniform(UNIT, 16)
    a = anchors.points[7]
    mem = abs(membership_functional(F, lambda y: F(y - a), anchors).q_value - F.value_at_zero)
    cands = {"F1": from_measure(cauchy_density()), "F2": polya_extension(F)}
    interp = all(interpolation_check(F, c, x, AnchorSet.uniform(UNIT, n)).passed
                 for c in cands.values() for x in (-2.0, 1.5, 3.0) for n in (8, 16, 32, 64))
    ok = worst <= 1e-12 and mem <= 1e-10 and interp
    criterion(5, ok, f"reproducing defect / scale {worst:.2e} (<= 1e-12), membership of k_a "
                     f"{mem:.2e} (<= 1e-10), interpolation checks {'all pass' if interp else 'some fail'}")


BASES = {
    4: [BumpFunction(0.2, 0.1), BumpFunction(0.4, 0.15), BumpFunction(0.6, 0.12), BumpFunction(0.75, 0.2)],
    8: [BumpFunction(0.12 + 0.1 * k, 0.08 + 0.01 * k) for k in range(8)],
}


def test_c06_operator_structure(criterion):
    F = expneg()
    parts, ok = [], True
    for nb, basis in BASES.items():
        h200 = hermitian_defect(F, basis, QuadratureSpec(200))
        h400 = hermitian_defect(F, basis, QuadratureSpec(400))
        c200 = conjugation_check(F, basis, QuadratureSpec(200))
        c400 = conjugation_check(F, basis, QuadratureSpec(400))
        ratio = h400 / h200 if h200 > 0 else 0.0
        ok &= h200 <= 1e-4 and 0.375 <= ratio <= 0.625 and max(c200, c400) <= 1e-4
        parts.append(f"{nb} bumps: defect {h200:.2e} (<= 1e-4), doubling ratio {ratio:.2e} "
                     f"(in [0.375, 0.625]), conjugation {max(c200, c400):.2e} (<= 1e-4)")
    criterion(6, ok, "; ".join(parts))


def test_c07_representation(criterion):
    mu = DiscreteMeasure([-2.0, -0.5, 0.3, 1.7], [0.1, 0.4, 0.3, 0.2])
    rng = np.random.default_rng(0)
    trans = 0.0
    for a, b in rng.uniform(-3, 3, (20, 2)):
        d = v_translate(a - b, embed_gamma(b, mu)).values - embed_gamma(a, mu).values
        trans = max(trans, float(np.max(np.abs(d))))
    x0s = rng.uniform(-3, 3, 5)
    disc = 0.0
    for t in (-1.5, 0.3, 2.0):
        vals = [extension_via_representation(mu, x0, t) for x0 in x0s]
        disc = max(disc, max(abs(v - fourier_transform(mu, t)) for v in vals),
                   max(abs(v - vals[0]) for v in vals))
    c = cauchy_density()
    grid_dev, indep = 0.0, 0.0
    for t in np.linspace(-1, 1, 9):
        v = [extension_via_representation(c, x0, t) for x0 in x0s]
        grid_dev = max(grid_dev, max(abs(w - fourier_transform(c, t)) for w in v))
        indep = max(indep, max(abs(w - v[0]) for w in v))
    laplace = max(abs(extension_via_representation(c, 0.5, t) - math.exp(-abs(t))) for t in np.linspace(-1, 1, 9))
    ok = trans <= 1e-14 and disc <= 1e-12 and indep <= 1e-12 and grid_dev <= c.tail_mass
    criterion(7, ok, f"translation {trans:.2e} (<= 1e-14), discrete {disc:.2e} (<= 1e-12), gridded x0 "
                     f"spread {indep:.2e} (<= 1e-12), gridded vs transform {grid_dev:.2e} "
                     f"(<= budget {c.tail_mass:.2e}); info: vs exp(-|t|) {laplace:.3e}")


def test_c08_scattering(criterion):
    F = expneg()
    mu = cauchy_density()
    nu = polya_extension(F).backing_measure
    r4 = scattering_operator(F, mu, nu, AnchorSet.uniform(UNIT, 4))
    r32 = scattering_operator(F, mu, nu, AnchorSet.uniform(UNIT, 32))
    res_ok = max(r4.residual_mu, r4.residual_nu) <= 2e-3
    halved = [d32 <= 0.5 * d4 for d4, d32 in zip(r4.defects, r32.defects)]
    pairs = ", ".join(f"t={t}: {d4:.3f} -> {d32:.3f}" for t, d4, d32 in zip(r4.translations, r4.defects, r32.defects))
    interior = ", ".join(f"t={t}: {a} -> {b}" for t, a, b in zip(
        r4.translations, [None if v is None else round(v, 3) for v in r4.interior_defects],
        [None if v is None else round(v, 3) for v in r32.interior_defects]))
    criterion(8, res_ok and all(halved),
              f"residuals mu {r4.residual_mu:.2e}, nu {r4.residual_nu:.2e} (<= 2e-3); defect 4 -> 32 anchors "
              f"(needs <= 1/2): {pairs}; info, probes staying in Omega: {interior}")


def test_c09_gaussian_processes(criterion):
    start = time.perf_counter()
    grid = np.linspace(0.0, 3.0, 16)
    F = builtin_kernel("exponential")
    target = np.exp(-np.abs(grid[:, None] - grid[None, :]))
    paths = sample_stationary(F, grid, 32000, seed=0)
    errs = {}
    for n in (2000, 8000, 20000, 32000):
        sub = type(paths)(grid, paths.paths[:n], 0)
        errs[n] = float(np.max(np.abs(empirical_covariance(sub) - target)))
    r1, r2 = errs[2000] / errs[8000], errs[8000] / errs[32000]
    fbm = {}
    for H in (0.5, 0.75):
        G = builtin_kernel("power", exponent=2 * H)
        P = sample_stationary_increment(G, grid, 20000, seed=0)
        D = np.abs(grid[:, None] - grid[None, :]) ** (2 * H)
        fbm[H] = float(np.max(np.abs(increment_second_moment(P) - D) / (1 + D)))
    cnd_ok = all(check_conditionally_negative(builtin_kernel("power", exponent=2 * H), grid).passed
                 for H in (0.25, 0.5, 0.75, 1.0))
    cnd_rej = not check_conditionally_negative(builtin_kernel("power", exponent=2.0, shift=0.1), grid).passed
    elapsed = time.perf_counter() - start
    ok = (errs[20000] <= 0.05 and 1.5 <= r1 <= 3 and 1.5 <= r2 <= 3 and max(fbm.values()) <= 0.05
          and cnd_ok and cnd_rej and elapsed < 60)
    criterion(9, ok, f"OU error at 20000 paths {errs[20000]:.4f} (<= 0.05); ratios 2k->8k {r1:.3f}, "
                     f"8k->32k {r2:.3f} (in [1.5, 3]); fBm normalized error H=0.5 {fbm[0.5]:.4f}, "
                     f"H=0.75 {fbm[0.75]:.4f} (<= 0.05); CND accepts |h|^2H {cnd_ok}, rejects |h|^2+0.1 "
                     f"{cnd_rej}; {elapsed:.1f} s (< 60 s)")


def test_c10_spectral_pairs(criterion):
    G1 = exponential_gram(ExponentialFamily(DomainSet([(0, 1), (2, 3)]), lambda_pattern("quarter", 5)))
    dev = float(np.max(np.abs(G1 - np.eye(G1.shape[0]))))
    G2 = exponential_gram(ExponentialFamily(DomainSet([(0, 1), (3, 5)]), lambda_pattern("half", 5)))
    off = max_offdiag(G2)
    criterion(10, dev <= 1e-12 and off >= 0.1,
              f"pair case |G - I| {dev:.2e} (<= 1e-12), half-integer case max off-diagonal {off:.4f} (>= 0.1)")


def test_c11_determinism(criterion, tmp_path):
    runs = {
        "gp": ["gp", "--config", str(CONFIGS / "ou.json")],
        "extend": ["extend", "--config", str(CONFIGS / "expneg.json")],
        "scatter": ["scatter", "--config", str(CONFIGS / "expneg.json"), "--anchors", "8"],
        "check": ["check", "--config", str(CONFIGS / "ou.json")],
    }
    same = {}
    for name, argv in runs.items():
        blobs = []
        for i, threads in enumerate((1, 1, 4)):
            path = tmp_path / f"{name}{i}.json"
            run([*argv, "--threads", str(threads), "--report", str(path)])
            blobs.append(path.read_bytes())
        json.loads(blobs[0])
        same[name] = len(set(blobs)) == 1
    criterion(11, all(same.values()),
              "byte-identical reports (two runs, threads 1 and 4): "
              + ", ".join(f"{k} {'yes' if v else 'no'}" for k, v in same.items()))
