"""Command-line interface.

Exit codes: 0 success, 1 the mathematical verdict is negative (or a
mathematical precondition fails), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    build_bumps,
    build_domain,
    build_kernel,
    build_measure,
    build_points,
    build_quadrature,
    grid_points,
    load_config,
)
from .errors import (
    AsymmetricData,
    ConfigError,
    NonUniformGrid,
    OutOfDomain,
    PdextError,
)
from .extend import from_measure, is_valid_extension, polya_extension, zero_pad
from .gauss import (
    empirical_covariance,
    increment_second_moment,
    sample_stationary,
    sample_stationary_increment,
)
from .io import _write_rows, read_measure_csv, write_candidate_csv, write_paths_csv
from .kernel import (
    DomainSet,
    check_conditionally_negative,
    check_pd_integral,
    check_positive_definite,
    check_reflection_positive,
    gram_matrix,
    hermitian_symmetry_check,
)
from .measure import fourier_on_grid, total_mass
from .operators import BumpFunction
from .represent import scattering_operator
from .rkhs import AnchorSet, uniqueness_diagnostic
from .spectral import ExponentialFamily, exponential_gram, lambda_pattern, max_offdiag, parseval_defect

__all__ = ["main", "run", "build_parser"]

USAGE_ERRORS = (ConfigError, OutOfDomain, NonUniformGrid, AsymmetricData, FileNotFoundError)


class _UsageError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


# subcommands -------------------------------------------------------------


def _cmd_check(cfg: RunConfig, args, base) -> tuple[dict, int]:
    F = build_kernel(cfg, base)
    pts = build_points(cfg, F.domain)
    results, ok = {}, True
    for name in cfg.checks:
        if name == "pd":
            v = check_positive_definite(F, pts, cfg.tol).to_dict()
        elif name == "cnd":
            v = check_conditionally_negative(F, pts, cfg.tol).to_dict()
        elif name == "reflection":
            if np.any(pts < 0):
                raise ConfigError("points: reflection positivity needs points >= 0")
            v = check_reflection_positive(F, pts, cfg.tol).to_dict()
        elif name == "integral":
            bumps = build_bumps(cfg)
            if not bumps:
                raise ConfigError("bumps: the integral check needs at least one bump")
            v = check_pd_integral(F, [[b] for b in bumps], build_quadrature(cfg), cfg.tol).to_dict()
        else:
            D = F.domain.diameter()
            if not math.isfinite(D):
                D = max(float(np.ptp(pts)), 1.0)
            z = np.linspace(-D, D, 403)[1:-1]
            rep = hermitian_symmetry_check(F, z[F.in_domain(z)])
            tol = 1e-12 if cfg.tol is None else cfg.tol
            v = {**rep.to_dict(), "passed": rep.defect <= tol and not rep.bound_violation, "tol": tol}
        results[name] = v
        ok &= bool(v["passed"])
    if args.out:
        _write_rows(args.out, ["x"], [[p] for p in pts])
    return {"checks": results, "n_points": int(pts.size)}, 0 if ok else 1


def _cmd_gram(cfg, args, base):
    F = build_kernel(cfg, base)
    pts = build_points(cfg, F.domain)
    K = gram_matrix(F, pts)
    ev = np.linalg.eigvalsh(K)
    if args.out:
        Kc = K.astype(complex)
        rows = [(j, k, Kc[j, k].real, Kc[j, k].imag) for j in range(K.shape[0]) for k in range(K.shape[1])]
        _write_rows(args.out, ["row", "col", "re", "im"], rows)
    return {"size": int(K.shape[0]), "min_eigenvalue": float(ev[0]),
            "max_eigenvalue": float(ev[-1]), "points": pts}, 0


def _residual_samples(F, n):
    D = F.domain.diameter()
    if not math.isfinite(D):
        raise ConfigError("domain: extension needs a bounded domain")
    z = np.linspace(-D, D, n + 2)[1:-1]
    return z[F.in_domain(z)]


def _cmd_extend(cfg, args, base):
    method = args.method or cfg.extend.method
    spec = cfg.extend
    out_t = grid_points(spec.output_grid)
    if method == "measure":
        if cfg.measure is None:
            raise ConfigError("measure: required for --method measure")
        cand = from_measure(build_measure(cfg.measure, base))
        result = {"method": method, "mass": cand.diagnostics["mass"],
                  "truncation_budget": cand.truncation_budget}
        code = 0
        if cfg.kernel is not None:
            F = build_kernel(cfg, base)
            v = is_valid_extension(cand, F, _residual_samples(F, spec.residual_samples))
            result["validity"] = v.to_dict()
            code = 0 if v.passed else 1
    else:
        F = build_kernel(cfg, base)
        if method == "polya":
            cand = polya_extension(F, spec.cutoff, n_nodes=spec.n_nodes)
            v = is_valid_extension(cand, F, _residual_samples(F, spec.residual_samples))
            result = {"method": method, **cand.diagnostics, "validity": v.to_dict()}
            code = 0 if v.passed else 1
        else:
            cand, diag = zero_pad(F, seed=cfg.seed)
            result = {"method": method, **diag.to_dict()}
            code = 1 if diag.verdict == "fail" else 0
    if args.out:
        write_candidate_csv(args.out, out_t, cand(out_t))
    return result, code


def _cmd_unique(cfg, args, base):
    F = build_kernel(cfg, base)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = uniqueness_diagnostic(F, cfg.unique.schedule, cfg.unique.divergence_ratio)
    return v.to_dict(), 0


def _measure_from(cfg, path, base):
    if path:
        return read_measure_csv(path)
    if cfg.measure is None:
        raise ConfigError("measure: give a measure in the config or a CSV file")
    return build_measure(cfg.measure, base)


def _cmd_bochner(cfg, args, base):
    mu = _measure_from(cfg, args.measure, base)
    t = grid_points(cfg.bochner.grid)
    vals = fourier_on_grid(mu, t)
    mass = total_mass(mu)
    result = {"total_mass": mass, "tail_mass": float(getattr(mu, "tail_mass", 0.0)),
              "max_modulus": float(np.max(np.abs(vals))), "nodes": mu.size}
    if cfg.kernel is not None:
        F = build_kernel(cfg, base)
        inside = F.in_domain(t)
        if np.any(inside):
            result["restriction_residual"] = float(np.max(np.abs(vals[inside] - F(t[inside]))))
    if args.out:
        write_candidate_csv(args.out, t, vals)
    return result, 0


def _cmd_gp(cfg, args, base):
    F = build_kernel(cfg, base)
    spec = cfg.gp
    n = args.paths if args.paths is not None else spec.paths
    t = grid_points(spec.grid)
    if spec.kind == "stationary":
        paths = sample_stationary(F, t, n, cfg.seed, spec.jitter, workers=args.threads)
        target = np.real(F(t[:, None] - t[None, :]))
        result = {"kind": spec.kind, "paths": n}
        if n >= 2:
            result["covariance_max_error"] = float(np.max(np.abs(empirical_covariance(paths) - target)))
    else:
        paths = sample_stationary_increment(F, t, n, cfg.seed, cfg.tol, workers=args.threads)
        target = np.real(F(t[:, None] - t[None, :]))
        result = {"kind": spec.kind, "paths": n}
        if n >= 2:
            M = increment_second_moment(paths)
            result["increment_max_relative_error"] = float(np.max(np.abs(M - target) / (1 + np.abs(target))))
    result["checksum"] = float(np.sum(paths.paths))
    if args.out:
        write_paths_csv(args.out, paths)
    return result, 0


def _cmd_scatter(cfg, args, base):
    F = build_kernel(cfg, base)
    mu = _measure_from(cfg, args.mu, base)
    if args.nu:
        nu = read_measure_csv(args.nu)
    else:
        nu = polya_extension(F, n_nodes=cfg.extend.n_nodes).backing_measure
    spec = cfg.scatter
    n = args.anchors if args.anchors is not None else spec.anchors
    anchors = AnchorSet.uniform(F.domain, n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = scattering_operator(F, mu, nu, anchors, spec.probes, translations=spec.translations,
                                  residual_tol=spec.residual_tol)
    return rep.to_dict(), 0


def _parse_omega(text: str) -> list[tuple[float, float]]:
    try:
        out = []
        for part in text.split(";"):
            a, b = part.split(",")
            out.append((float(a), float(b)))
        return out
    except ValueError:
        raise ConfigError(f"--omega: expected 'a,b;c,d', got {text!r}") from None


def _cmd_spectral(cfg, args, base):
    spec = cfg.spectral
    omega = DomainSet(_parse_omega(args.omega) if args.omega else spec.omega)
    pattern = args.lambda_pattern or spec.pattern
    radius = args.range if args.range is not None else spec.range
    fam = ExponentialFamily(omega, lambda_pattern(pattern, radius))
    G = exponential_gram(fam)
    off = max_offdiag(G)
    dev = float(np.max(np.abs(G - np.eye(G.shape[0]))))
    lam0 = fam.lambdas[np.argmin(np.abs(fam.lambdas))]
    vol = omega.length()
    e0 = lambda x: np.exp(2j * np.pi * lam0 * x) / math.sqrt(vol)
    a, b = omega.intervals[0]
    bump = BumpFunction(0.5 * (a + b), 0.4 * (b - a))
    tol = 1e-12 if cfg.tol is None else cfg.tol
    result = {
        "omega": omega.to_json()["intervals"], "pattern": pattern, "range": radius,
        "frequencies": int(fam.lambdas.size), "max_offdiag": off,
        "identity_deviation": dev, "orthonormal": dev <= tol, "tol": tol,
        "parseval_defects": {"exponential": parseval_defect(fam, e0), "bump": parseval_defect(fam, bump)},
    }
    return result, 0 if dev <= tol else 1


COMMANDS = {
    "check": _cmd_check,
    "gram": _cmd_gram,
    "extend": _cmd_extend,
    "unique": _cmd_unique,
    "bochner": _cmd_bochner,
    "gp": _cmd_gp,
    "scatter": _cmd_scatter,
    "spectral": _cmd_spectral,
}

NEEDS_CONFIG = {"check", "gram", "extend", "unique", "gp", "scatter"}


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    """Options accepted both before and after the subcommand."""
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", "--f", dest="config", metavar="FILE", default=d(None),
                   help="JSON run configuration")
    g.add_argument("--seed", type=int, default=d(None), help="override the configured seed")
    g.add_argument("--tol", type=float, default=d(None), help="override the configured tolerance")
    g.add_argument("--out", metavar="FILE", default=d(None),
                   help="CSV output (candidate, paths, Gram, ...)")
    g.add_argument("--report", metavar="FILE", default=d(None),
                   help="write the JSON report here instead of stdout")
    g.add_argument("--threads", type=int, default=d(1),
                   help="worker threads (results do not depend on it)")
    return common


def build_parser() -> argparse.ArgumentParser:
    top, common = _global_options(False), _global_options(True)
    p = argparse.ArgumentParser(prog="pdext", parents=[top],
                                description="Positive definite extension toolkit")
    p.add_argument("--version", action="version", version=f"pdext {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="definiteness checks on a point set")
    sub.add_parser("gram", parents=[common], help="Gram matrix and its spectrum")
    e = sub.add_parser("extend", parents=[common], help="construct an extension candidate")
    e.add_argument("--method", choices=["polya", "measure", "zero-pad"])
    sub.add_parser("unique", parents=[common], help="uniqueness diagnostic on an interval")
    b = sub.add_parser("bochner", parents=[common], help="Fourier transform of a measure")
    b.add_argument("--measure", metavar="CSV")
    gp = sub.add_parser("gp", parents=[common], help="simulate Gaussian paths")
    gp.add_argument("--paths", type=int)
    s = sub.add_parser("scatter", parents=[common], help="compare two extensions")
    s.add_argument("--mu", metavar="CSV")
    s.add_argument("--nu", metavar="CSV")
    s.add_argument("--anchors", type=int)
    sp = sub.add_parser("spectral", parents=[common], help="exponential families on unions of intervals")
    sp.add_argument("--omega", help="intervals as 'a,b;c,d'")
    sp.add_argument("--lambda-pattern", choices=["quarter", "half", "integer"])
    sp.add_argument("--range", type=float)
    return p


def _options(args) -> dict:
    skip = {"config", "out", "report", "threads", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.threads < 1:
        print("pdext: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        if args.config:
            cfg, base = load_config(args.config)
        elif args.command in NEEDS_CONFIG:
            raise ConfigError(f"{args.command}: --config is required")
        else:
            cfg, base = RunConfig(), None
        updates = {}
        if args.seed is not None:
            updates["seed"] = args.seed
        if args.tol is not None:
            updates["tol"] = args.tol
        if updates:
            cfg = RunConfig.model_validate({**cfg.model_dump(), **updates})
        result, code = COMMANDS[args.command](cfg, args, base)
        status = "pass" if code == 0 else "fail"
    except USAGE_ERRORS as exc:
        print(f"pdext: {exc}", file=sys.stderr)
        return 2
    except PdextError as exc:
        result, code, status = {"error": type(exc).__name__, "message": str(exc)}, 1, "error"
    except ValueError as exc:
        print(f"pdext: {exc}", file=sys.stderr)
        return 2
    report = {"command": args.command, "config": cfg.model_dump(mode="json"),
              "options": _options(args), "result": result, "status": status, "version": __version__}
    text = dump_report(report)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
