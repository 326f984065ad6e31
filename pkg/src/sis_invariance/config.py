"""Analysis configuration: JSON ingestion, validation and defaults."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from .errors import ConfigError, SISError
from .spectrum import FrequencyGrid, GeneratorSpec, Samples, spec_from_json, spec_to_json

DEFAULT_M = 256
DEFAULT_K = 16
DEFAULT_N_MAX = 16
DEFAULT_REL_TOL = 1e-8
DEFAULT_ORACLE_TOL = 1e-6


@dataclass(frozen=True)
class Analyses:
    order: bool = True
    frames: bool = True
    support_bounds: bool = True
    oracle: bool = True


@dataclass(frozen=True)
class Outputs:
    report: str | None = None
    csv_dir: str | None = None


@dataclass(frozen=True, eq=False)
class AnalysisConfig:
    generators: tuple[GeneratorSpec, ...]
    samples_per_unit: int = DEFAULT_M
    fiber_half_width: int = DEFAULT_K
    midpoint: bool = True
    n_max: int = DEFAULT_N_MAX
    rel_tol: float = DEFAULT_REL_TOL
    oracle_tol: float = DEFAULT_ORACLE_TOL
    outputs: Outputs = field(default_factory=Outputs)
    analyses: Analyses = field(default_factory=Analyses)

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.samples_per_unit, self.fiber_half_width, self.midpoint)

    def with_overrides(self, **changes) -> "AnalysisConfig":
        cfg = replace(self, **{k: v for k, v in changes.items() if v is not None})
        validate(cfg)
        return cfg

    def __eq__(self, other):
        return isinstance(other, AnalysisConfig) and config_to_dict(self) == config_to_dict(other)


_TOP_KEYS = {"generators", "grid", "n_max", "rel_tol", "oracle_tol", "outputs", "analyses"}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _expect_object(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a JSON object, got {type(obj).__name__}")
    return obj


def _reject_unknown(obj: dict, allowed: set, path: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(extra)}")


def validate(cfg: AnalysisConfig) -> None:
    if not cfg.generators:
        raise ConfigError("generators: at least one generator is required")
    if not _is_int(cfg.samples_per_unit) or cfg.samples_per_unit < 2:
        raise ConfigError(f"grid.M: must be an integer >= 2, got {cfg.samples_per_unit!r}")
    if not _is_int(cfg.fiber_half_width) or cfg.fiber_half_width < 1:
        raise ConfigError(f"grid.K: must be a positive integer, got {cfg.fiber_half_width!r}")
    if not _is_int(cfg.n_max) or cfg.n_max < 2:
        raise ConfigError(f"n_max: n_max must be >= 2, got {cfg.n_max!r}")
    for name in ("rel_tol", "oracle_tol"):
        v = getattr(cfg, name)
        if not _is_number(v) or not 0 < v < 1:
            raise ConfigError(f"{name}: must lie in (0, 1), got {v!r}")
    for j, spec in enumerate(cfg.generators):
        if isinstance(spec, Samples) and spec.grid != cfg.grid:
            raise ConfigError(
                f"generators[{j}].grid: samples declared on M={spec.grid.M}, K={spec.grid.K} "
                f"but the analysis grid is M={cfg.samples_per_unit}, K={cfg.fiber_half_width}"
            )


def config_from_dict(obj) -> AnalysisConfig:
    obj = _expect_object(obj, "$")
    _reject_unknown(obj, _TOP_KEYS, "$")
    if "generators" not in obj:
        raise ConfigError("generators: required field missing")
    gens_raw = obj["generators"]
    if not isinstance(gens_raw, list):
        raise ConfigError("generators: expected a list")
    gens = []
    for j, g in enumerate(gens_raw):
        try:
            gens.append(spec_from_json(g))
        except SISError as exc:
            raise ConfigError(f"generators[{j}]: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"generators[{j}]: {exc}") from exc

    grid = _expect_object(obj.get("grid", {}), "grid")
    _reject_unknown(grid, {"M", "K", "midpoint"}, "grid")
    outputs = _expect_object(obj.get("outputs", {}), "outputs")
    _reject_unknown(outputs, {"report", "csv_dir"}, "outputs")
    for key, v in outputs.items():
        if v is not None and not isinstance(v, str):
            raise ConfigError(f"outputs.{key}: expected a path string")
    analyses = _expect_object(obj.get("analyses", {}), "analyses")
    _reject_unknown(analyses, set(Analyses.__dataclass_fields__), "analyses")
    for key, v in analyses.items():
        if not isinstance(v, bool):
            raise ConfigError(f"analyses.{key}: expected true or false")
    midpoint = grid.get("midpoint", True)
    if not isinstance(midpoint, bool):
        raise ConfigError("grid.midpoint: expected true or false")

    cfg = AnalysisConfig(
        generators=tuple(gens),
        samples_per_unit=grid.get("M", DEFAULT_M),
        fiber_half_width=grid.get("K", DEFAULT_K),
        midpoint=midpoint,
        n_max=obj.get("n_max", DEFAULT_N_MAX),
        rel_tol=obj.get("rel_tol", DEFAULT_REL_TOL),
        oracle_tol=obj.get("oracle_tol", DEFAULT_ORACLE_TOL),
        outputs=Outputs(**outputs),
        analyses=Analyses(**analyses),
    )
    validate(cfg)
    return cfg


def parse_config(text: str) -> AnalysisConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: invalid JSON ({exc})") from exc
    return config_from_dict(obj)


def config_to_dict(cfg: AnalysisConfig) -> dict:
    return {
        "generators": [spec_to_json(g) for g in cfg.generators],
        "grid": {"M": cfg.samples_per_unit, "K": cfg.fiber_half_width, "midpoint": cfg.midpoint},
        "n_max": cfg.n_max,
        "rel_tol": cfg.rel_tol,
        "oracle_tol": cfg.oracle_tol,
        "outputs": asdict(cfg.outputs),
        "analyses": asdict(cfg.analyses),
    }


def serialize_config(cfg: AnalysisConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)
