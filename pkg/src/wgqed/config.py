"""Run configuration: nested sections, validation with field paths, env overrides."""

from __future__ import annotations

import copy
import json
import os
from dataclasses import MISSING, asdict, dataclass, field, fields, is_dataclass

import yaml

ENV_PREFIX = "WGQED_"
SUBCOMMANDS = ("modes", "chain", "greens", "spectrum", "pulse", "fit", "bench")


class ConfigError(ValueError):
    """Invalid configuration value; the message starts with the field path."""


@dataclass
class FiberSection:
    radius_nm: float = 250.0
    n_core: float = 1.45
    n_clad: float = 1.0
    lambda0_nm: float = 780.0


@dataclass
class ChainSection:
    n_atoms: int = 10
    spacing_mode: str | float = "half_lambda_wg"
    order: str = "ordered"
    seed: int = 0
    rho_over_a: float = 1.5
    phi0: float = 0.0


@dataclass
class ControlSection:
    enabled: bool = False
    rabi_over_gamma: float = 2.0
    detuning_over_gamma: float = -4.0


@dataclass
class GridSection:
    min: float | None = None
    max: float | None = None
    points: int = 801


@dataclass
class EngineSection:
    include_spontaneous_raman: bool = False
    freq_grid: GridSection = field(default_factory=GridSection)
    workers: int = 1


@dataclass
class JobSection:
    subcommand: str = "spectrum"
    geometry: str = "single"
    theta: str | float = "crest"
    pulse_samples: int = 16384
    pulse_truncation: float = 10.0
    fit_window: list | None = None
    greens_dz_max: float = 60.0
    greens_points: int = 601
    modes_rho_max_over_a: float = 4.0
    modes_points: int = 401


@dataclass
class RunConfig:
    fiber: FiberSection = field(default_factory=FiberSection)
    chain: ChainSection = field(default_factory=ChainSection)
    control: ControlSection = field(default_factory=ControlSection)
    engine: EngineSection = field(default_factory=EngineSection)
    job: JobSection = field(default_factory=JobSection)
    out: str = "out"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> "RunConfig":
        cfg = _build(cls, data or {}, "")
        validate(cfg)
        return cfg

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _build(kind, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(kind)}
    extra = set(data) - set(known)
    if extra:
        raise ConfigError(f"{path + '.' if path else ''}{sorted(extra)[0]}: unknown key")
    kwargs = {}
    for name, f in known.items():
        if name not in data:
            continue
        sub = f"{path}.{name}" if path else name
        default = f.default_factory() if f.default_factory is not MISSING else f.default
        if is_dataclass(default):
            kwargs[name] = _build(type(default), data[name], sub)
        else:
            kwargs[name] = data[name]
    return kind(**kwargs)


def _need(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def validate(cfg: RunConfig) -> None:
    fb = cfg.fiber
    for key in ("radius_nm", "lambda0_nm"):
        _need(isinstance(getattr(fb, key), (int, float)) and getattr(fb, key) > 0, f"fiber.{key}", "must be > 0")
    _need(fb.n_clad >= 1.0, "fiber.n_clad", "must be >= 1")
    _need(fb.n_core > fb.n_clad, "fiber.n_core", "must exceed fiber.n_clad")
    ch = cfg.chain
    _need(isinstance(ch.n_atoms, int) and ch.n_atoms >= 0, "chain.n_atoms", "must be an integer >= 0")
    _need(ch.order in ("ordered", "disordered"), "chain.order", "must be 'ordered' or 'disordered'")
    _need(ch.rho_over_a > 1.0, "chain.rho_over_a", "atoms must sit outside the fiber (> 1)")
    _need(ch.spacing_mode == "half_lambda_wg" or (isinstance(ch.spacing_mode, (int, float)) and ch.spacing_mode > 0),
          "chain.spacing_mode", "must be 'half_lambda_wg' or a positive length in nm")
    _need(isinstance(ch.seed, int) and ch.seed >= 0, "chain.seed", "must be a non-negative integer")
    g = cfg.engine.freq_grid
    _need(isinstance(g.points, int) and g.points >= 1, "engine.freq_grid.points", "grid must not be empty")
    if g.min is not None and g.max is not None:
        _need(g.max > g.min or (g.points == 1 and g.max == g.min), "engine.freq_grid", "max must exceed min")
    _need(isinstance(cfg.engine.workers, int) and cfg.engine.workers >= 1, "engine.workers", "must be >= 1")
    jb = cfg.job
    _need(jb.subcommand in SUBCOMMANDS, "job.subcommand", f"must be one of {', '.join(SUBCOMMANDS)}")
    _need(jb.geometry in ("single", "symmetric"), "job.geometry", "must be 'single' or 'symmetric'")
    _need(jb.theta in ("node", "crest") or isinstance(jb.theta, (int, float)), "job.theta",
          "must be 'node', 'crest' or a phase")
    _need(jb.pulse_samples >= 64, "job.pulse_samples", "must be >= 64")
    _need(jb.pulse_truncation > 0, "job.pulse_truncation", "must be > 0")
    _need(jb.pulse_truncation <= 20, "job.pulse_truncation", "pulse would not fit the time window (<= 20)")


def _set_path(data: dict, keys, value):
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{'.'.join(keys)}: parent is not a section")
    node[keys[-1]] = value


def env_overrides(environ=None) -> dict:
    """Map WGQED_SECTION__KEY=value variables onto a nested dict."""
    environ = os.environ if environ is None else environ
    out: dict = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        keys = [k.lower() for k in name[len(ENV_PREFIX):].split("__") if k]
        if keys:
            _set_path(out, keys, yaml.safe_load(raw))
    return out


def merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path=None, environ=None, overrides: dict | None = None) -> RunConfig:
    """Defaults < file (YAML or JSON; a manifest's ``config`` key is accepted) < env < overrides."""
    data: dict = {}
    if path is not None:
        with open(path) as fh:
            loaded = yaml.safe_load(fh) or {}
        if isinstance(loaded, dict) and "config" in loaded and "version" in loaded:
            loaded = loaded["config"]
        data = loaded
    data = merge(data, env_overrides(environ))
    if overrides:
        data = merge(data, overrides)
    return RunConfig.from_dict(data)
