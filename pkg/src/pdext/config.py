"""Run configuration: schema, loading, and construction of library objects."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .kernel import BUILTIN_KERNELS, DomainSet, LocalKernel, builtin_kernel
from .measure import DiscreteMeasure, Measure, cauchy_density, uniform_density
from .operators import BumpFunction, QuadratureSpec

__all__ = [
    "RunConfig",
    "load_config",
    "parse_config",
    "build_domain",
    "build_kernel",
    "build_measure",
    "build_points",
]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class KernelSpec(_Strict):
    type: str
    params: dict[str, Any] = Field(default_factory=dict)
    csv: Optional[str] = None

    @model_validator(mode="after")
    def _known(self):
        if self.type == "sampled":
            if not self.csv:
                raise ValueError("sampled kernels need 'csv'")
        elif self.type not in BUILTIN_KERNELS:
            raise ValueError(f"unknown kernel type {self.type!r}; "
                             f"choose from {sorted(BUILTIN_KERNELS) + ['sampled']}")
        return self


class DomainSpec(_Strict):
    intervals: list[tuple[float, float]]

    @field_validator("intervals")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("at least one interval is required")
        return v


class PointsSpec(_Strict):
    uniform: int = Field(50, ge=0)
    random: int = Field(0, ge=0)
    values: Optional[list[float]] = None
    margin: float = Field(0.01, ge=0.0, lt=0.5)


class QuadratureConfig(_Strict):
    nodes_per_axis: int = Field(200, ge=32)


class BumpSpec(_Strict):
    center: float
    width: float = Field(gt=0)
    coeff: float = 1.0


class MeasureSpec(_Strict):
    type: Literal["cauchy", "uniform", "discrete", "csv"]
    radius: float = 2000.0
    step: float = 0.05
    scale: float = 1.0
    half_width: float = 1.0
    count: int = 2001
    positions: Optional[list[float]] = None
    weights: Optional[list[float]] = None
    path: Optional[str] = None


class GridSpec(_Strict):
    start: float
    stop: float
    count: int = Field(ge=2)


class ExtendSpec(_Strict):
    method: Literal["polya", "measure", "zero-pad"] = "polya"
    cutoff: Optional[float] = None
    n_nodes: int = Field(32768, ge=2)
    output_grid: GridSpec = GridSpec(start=-3.0, stop=3.0, count=601)
    residual_samples: int = Field(201, ge=3)


class UniqueSpec(_Strict):
    schedule: list[int] = [8, 16, 32, 64]
    divergence_ratio: float = Field(10.0, gt=1.0)


class GpSpec(_Strict):
    kind: Literal["stationary", "increment"] = "stationary"
    grid: GridSpec = GridSpec(start=0.0, stop=3.0, count=16)
    paths: int = Field(20000, ge=1)
    jitter: Optional[float] = Field(None, ge=0.0)


class ScatterSpec(_Strict):
    anchors: int = Field(32, ge=1)
    probes: list[float] = [0.2, 0.37, 0.5]
    translations: list[float] = [0.1, 0.5, 1.0]
    residual_tol: float = Field(2e-3, gt=0)


class BochnerSpec(_Strict):
    grid: GridSpec = GridSpec(start=-1.0, stop=1.0, count=41)


class SpectralSpec(_Strict):
    omega: list[tuple[float, float]] = [(0.0, 1.0), (2.0, 3.0)]
    pattern: Literal["quarter", "half", "integer"] = "quarter"
    range: float = Field(5.0, gt=0)


class RunConfig(_Strict):
    kernel: Optional[KernelSpec] = None
    domain: Optional[DomainSpec] = None
    checks: list[Literal["pd", "cnd", "reflection", "integral", "symmetry"]] = ["pd"]
    points: PointsSpec = PointsSpec()
    tol: Optional[float] = Field(None, ge=0.0)
    seed: int = Field(0, ge=0)
    quadrature: QuadratureConfig = QuadratureConfig()
    bumps: list[BumpSpec] = []
    measure: Optional[MeasureSpec] = None
    extend: ExtendSpec = ExtendSpec()
    unique: UniqueSpec = UniqueSpec()
    gp: GpSpec = GpSpec()
    scatter: ScatterSpec = ScatterSpec()
    bochner: BochnerSpec = BochnerSpec()
    spectral: SpectralSpec = SpectralSpec()


def _describe(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: dict, base_dir: Path | None = None) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {_describe(exc)}") from None
    return cfg


def load_config(path) -> tuple[RunConfig, Path]:
    """Read and validate a JSON config; returns the config and its directory.

    Raises
    ------
    ConfigError
        With the file position of JSON syntax errors or the key path of
        schema violations.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a JSON object")
    return parse_config(data), p.parent


def build_domain(cfg: RunConfig) -> DomainSet:
    if cfg.domain is None:
        return DomainSet.real_line()
    try:
        return DomainSet(cfg.domain.intervals)
    except ValueError as exc:
        raise ConfigError(f"domain.intervals: {exc}") from None


def _resolve(base: Path | None, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() or base is None else base / p


def build_kernel(cfg: RunConfig, base: Path | None = None) -> LocalKernel:
    if cfg.kernel is None:
        raise ConfigError("kernel: this command needs a kernel")
    domain = build_domain(cfg)
    if cfg.kernel.type == "sampled":
        from .io import read_kernel_csv
        return read_kernel_csv(_resolve(base, cfg.kernel.csv), domain)
    try:
        return builtin_kernel(cfg.kernel.type, domain, **cfg.kernel.params)
    except TypeError as exc:
        raise ConfigError(f"kernel.params: {exc}") from None


def build_measure(spec: MeasureSpec, base: Path | None = None) -> Measure:
    if spec.type == "cauchy":
        return cauchy_density(spec.radius, spec.step, spec.scale)
    if spec.type == "uniform":
        return uniform_density(spec.half_width, spec.count)
    if spec.type == "discrete":
        if spec.positions is None or spec.weights is None:
            raise ConfigError("measure: discrete measures need positions and weights")
        return DiscreteMeasure(spec.positions, spec.weights)
    if not spec.path:
        raise ConfigError("measure.path: required for csv measures")
    from .io import read_measure_csv
    return read_measure_csv(_resolve(base, spec.path))


def build_points(cfg: RunConfig, domain: DomainSet) -> np.ndarray:
    """Uniform points plus a seeded random batch, or the explicit list."""
    ps = cfg.points
    if ps.values is not None:
        return np.asarray(ps.values, dtype=float)
    parts = []
    if ps.uniform:
        parts.append(domain.interior_grid(ps.uniform, ps.margin))
    if ps.random:
        rng = np.random.default_rng(cfg.seed)
        parts.append(domain.random_points(ps.random, rng, margin=ps.margin))
    if not parts:
        raise ConfigError("points: no points requested")
    return np.unique(np.concatenate(parts))


def build_bumps(cfg: RunConfig) -> list[BumpFunction]:
    return [BumpFunction(b.center, b.width, b.coeff) for b in cfg.bumps]


def build_quadrature(cfg: RunConfig) -> QuadratureSpec:
    return QuadratureSpec(cfg.quadrature.nodes_per_axis)


def grid_points(g: GridSpec) -> np.ndarray:
    return np.linspace(g.start, g.stop, g.count)
