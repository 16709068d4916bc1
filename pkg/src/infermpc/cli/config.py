"""Experiment configuration as flat dotted-key text.

A config file is a list of ``section.key = value`` lines (a TOML subset)::

    experiment.kind = "posterior"
    solver.lambda = 0.5
    posterior.lambdas = [0.05, 0.5, 5.0]

Every key has a default. Values can be overridden from the environment with
``INFERMPC_<SECTION>__<KEY>`` (e.g. ``INFERMPC_SOLVER__LAMBDA=2``).
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..errors import ConfigError

ENV_PREFIX = "INFERMPC_"
KINDS = ("posterior", "solve", "simulate", "sweep_lambda", "sweep_samples", "sweep_prior", "symmetry", "compare")


def _key(f: dataclasses.Field) -> str:
    return f.metadata.get("key", f.name)


@dataclass(frozen=True)
class ExperimentSection:
    kind: str = "posterior"
    out: str = "out"
    seed: int = 0
    threads: int = 1


@dataclass(frozen=True)
class PosteriorSection:
    cost: str = "sinusoid"
    lambdas: tuple[float, ...] = (0.05, 0.5, 5.0)
    prior_means: tuple[float, ...] = (-2.0,)
    prior_stds: tuple[float, ...] = (1.0,)
    grid_lo: float = -3.0
    grid_hi: float = 3.0
    grid_n: int = 4801
    truncate: bool = True
    mode_threshold: float = 0.05


@dataclass(frozen=True)
class SolverSection:
    planner: str = "mppi"
    K: int = 1024
    lam: float = field(default=1.0, metadata={"key": "lambda"})
    std: tuple[float, ...] = (1.0,)
    warm_start_fill: str = "repeat_last"
    horizon: int = 30


@dataclass(frozen=True)
class ScenarioSection:
    kind: str = "benchmark"
    offset_radii: float = 0.0
    max_steps: int = 0
    process_noise_std: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    goal_radius: float = 0.2
    plant_gain: float = 1.0


@dataclass(frozen=True)
class SweepSection:
    ks: tuple[int, ...] = (16, 64, 256, 1024)
    n_seeds: int = 30
    lambdas: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class SymmetrySection:
    n_seeds: int = 200
    stds: tuple[float, ...] = (1.0, 2.0)


@dataclass(frozen=True)
class SolveSection:
    problem: str = "static1d"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    posterior: PosteriorSection = field(default_factory=PosteriorSection)
    solver: SolverSection = field(default_factory=SolverSection)
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    symmetry: SymmetrySection = field(default_factory=SymmetrySection)
    solve: SolveSection = field(default_factory=SolveSection)

    def __post_init__(self):
        if self.experiment.kind not in KINDS:
            raise ConfigError(f"experiment.kind must be one of {KINDS}, got {self.experiment.kind!r}")
        if not 0 <= self.experiment.seed < 2**64:
            raise ConfigError("experiment.seed must be an unsigned 64-bit integer")
        if self.experiment.threads < 1:
            raise ConfigError("experiment.threads must be >= 1")

    def replace(self, **sections: Mapping[str, Any]) -> "ExperimentConfig":
        """Copy with some keys changed: ``cfg.replace(solver={"lambda": 2.0})``."""
        data = to_dict(self)
        for sec, values in sections.items():
            if sec not in data:
                raise ConfigError(f"unknown config section {sec!r}")
            data[sec].update(values)
        return from_dict(data)


def _coerce(value: Any, typ: str, where: str):
    try:
        if typ.startswith("tuple"):
            if not isinstance(value, (list, tuple)):
                value = [value]
            inner = "int" if "int" in typ else "float"
            return tuple(_coerce(v, inner, where) for v in value)
        if typ == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if typ == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if typ == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if typ == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
    except (TypeError, ValueError):
        pass
    raise ConfigError(f"{where}: cannot use {value!r} as {typ}")


def from_dict(data: Mapping[str, Mapping[str, Any]]) -> ExperimentConfig:
    sections = {}
    known = {f.name: f for f in fields(ExperimentConfig)}
    for sec_name, values in data.items():
        if sec_name not in known:
            raise ConfigError(f"unknown config section {sec_name!r}")
        if not isinstance(values, Mapping):
            raise ConfigError(f"{sec_name} must be a table of keys")
        sec_cls = known[sec_name].default_factory
        by_key = {_key(f): f for f in fields(sec_cls)}
        kwargs = {}
        for k, v in values.items():
            if k not in by_key:
                raise ConfigError(f"unknown config key {sec_name}.{k}")
            f = by_key[k]
            kwargs[f.name] = _coerce(v, str(f.type), f"{sec_name}.{k}")
        sections[sec_name] = sec_cls(**kwargs)
    return ExperimentConfig(**sections)


def to_dict(cfg: ExperimentConfig) -> dict[str, dict[str, Any]]:
    out = {}
    for sec in fields(cfg):
        section = getattr(cfg, sec.name)
        out[sec.name] = {_key(f): getattr(section, f.name) for f in fields(section)}
    return out


def _format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return _toml_string(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize {v!r}")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\b": "\\b", "\t": "\\t", "\n": "\\n", "\f": "\\f", "\r": "\\r"}


def _toml_string(s: str) -> str:
    out = []
    for ch in s:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def serialize(cfg: ExperimentConfig) -> str:
    lines = []
    for sec, values in to_dict(cfg).items():
        for k, v in values.items():
            lines.append(f"{sec}.{k} = {_format_value(v)}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return from_dict(data)


def load(path: str | os.PathLike | None = None, environ: Mapping[str, str] | None = None) -> ExperimentConfig:
    """Defaults, then the file at ``path``, then environment overrides."""
    data: dict[str, dict[str, Any]] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
    for sec, key, value in env_overrides(os.environ if environ is None else environ):
        data.setdefault(sec, {})[key] = value
    return from_dict(data)


def env_overrides(environ: Mapping[str, str]):
    for name, raw in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX) or "__" not in name[len(ENV_PREFIX):]:
            continue
        sec, key = name[len(ENV_PREFIX):].split("__", 1)
        sec = sec.lower()
        key = key if key == "K" else key.lower()
        try:
            value = tomllib.loads(f"v = {raw}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw
        yield sec, key, value
