"""Scenario configuration: a flat ``key = value`` text format.

Example::

    # fig2-style run
    beta1 = 5e-6
    noise.sig3 = 0.015
    integrator.t_end = 350
    dfe.override = 155630
    sweep.q = 0.071, 0.2, 0.4

Parameter keys are the :class:`~sqeaihr.model.ModelParameters` field names and
default to Table 1 (``beta2`` defaults to ``0.6 * beta1``). Other sections are
``noise.sig1..sig7``, ``init.<s|q_c|e|a|i|h|r>``, ``integrator.<t_end|dt|
record_every|positivity_floor>``, ``dfe.override``, ``ensemble.<paths|seed>`` and
exactly one ``sweep.<beta2|lam|q>``.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from typing import Optional, Union

from .analysis import DfeConvention
from .integrators import IntegratorConfig
from .model import (
    PAPER_INITIAL_STATE,
    TABLE1,
    ModelParameters,
    NoiseIntensities,
    ParameterError,
    State,
)

SWEEP_TARGETS = ("beta2", "lam", "q")
DEFAULT_T_END_DETERMINISTIC = 350.0
DEFAULT_T_END_STOCHASTIC = 200.0
DEFAULT_RECORD_EVERY = 10
DEFAULT_N_PATHS = 100

_KEY_RE = re.compile(r"[a-z_][a-z_0-9]*(\.[a-z_0-9]+)*")
_PARAM_KEYS = tuple(f.name for f in dataclasses.fields(ModelParameters))
_NOISE_KEYS = tuple(f"noise.{f.name}" for f in dataclasses.fields(NoiseIntensities))
_INIT_KEYS = tuple(f"init.{name}" for name in State._fields)
_INTEGRATOR_KEYS = tuple(f"integrator.{f.name}" for f in dataclasses.fields(IntegratorConfig))
_KNOWN_KEYS = frozenset(
    _PARAM_KEYS
    + _NOISE_KEYS
    + _INIT_KEYS
    + _INTEGRATOR_KEYS
    + ("dfe.override", "ensemble.paths", "ensemble.seed")
    + tuple(f"sweep.{t}" for t in SWEEP_TARGETS)
)

Value = Union[float, bool, tuple]


class ConfigError(ValueError):
    """Malformed configuration text (syntax, unknown or duplicate key)."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class EnsembleSpec:
    n_paths: int = DEFAULT_N_PATHS
    master_seed: int = 0

    def __post_init__(self):
        if self.n_paths < 1:
            raise ParameterError("ensemble.paths", "must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ParameterError("ensemble.seed", "must be a 64-bit unsigned value")


@dataclass(frozen=True)
class SweepSpec:
    target: str
    values: tuple

    def __post_init__(self):
        if self.target not in SWEEP_TARGETS:
            raise ParameterError("sweep", f"target must be one of {SWEEP_TARGETS}, got {self.target!r}")
        if not self.values:
            raise ParameterError(f"sweep.{self.target}", "needs at least one value")


@dataclass(frozen=True)
class ScenarioConfig:
    parameters: ModelParameters
    initial_state: State
    integrator: IntegratorConfig
    noise: Optional[NoiseIntensities] = None
    dfe_convention: DfeConvention = DfeConvention()
    ensemble: Optional[EnsembleSpec] = None
    sweep: Optional[SweepSpec] = None

    def __post_init__(self):
        if any(v < 0 for v in self.initial_state):
            raise ParameterError("init", "initial state must be componentwise >= 0")
        if self.sweep is not None:
            for v in self.sweep.values:
                self.sweep_parameters(v)

    @property
    def stochastic(self) -> bool:
        return self.noise is not None

    def sweep_parameters(self, value: float) -> ModelParameters:
        """Parameters with the sweep target set to ``value`` (validated)."""
        try:
            return self.parameters.replace(**{self.sweep.target: value})
        except ParameterError as exc:
            raise ParameterError(f"sweep.{self.sweep.target}", f"value {value!r} rejected ({exc})") from exc

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _parse_scalar(text: str, line: int) -> Union[float, bool]:
    if text in ("true", "false"):
        return text == "true"
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"not a decimal literal: {text!r}", line) from None


def _parse_value(text: str, line: int) -> Value:
    if not text:
        raise ConfigError("missing value", line)
    if "," in text:
        return tuple(_parse_scalar(part.strip(), line) for part in text.split(","))
    return _parse_scalar(text, line)


def parse_lines(text: str) -> dict[str, tuple[Value, int]]:
    entries: dict[str, tuple[Value, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError("expected 'key = value'", lineno)
        key, value = (part.strip() for part in content.split("=", 1))
        if not _KEY_RE.fullmatch(key):
            raise ConfigError(f"malformed key {key!r}", lineno)
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno)
        entries[key] = (_parse_value(value, lineno), lineno)
    return entries


def _number(entries, key, default=None):
    if key not in entries:
        return default
    value, line = entries[key]
    if isinstance(value, (bool, tuple)):
        raise ConfigError(f"{key} expects a single number", line)
    return value


def _integer(entries, key, default):
    value = _number(entries, key)
    if value is None:
        return default
    if value != int(value):
        raise ConfigError(f"{key} expects an integer", entries[key][1])
    return int(value)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate configuration text; missing keys fall back to Table 1."""
    entries = parse_lines(text)

    values = {k: _number(entries, k) for k in _PARAM_KEYS if k in entries}
    params = ModelParameters.table1(**values)

    noise = None
    if any(k in entries for k in _NOISE_KEYS):
        noise = NoiseIntensities(*(_number(entries, k, 0.0) for k in _NOISE_KEYS))

    init = State(*(_number(entries, k, d) for k, d in zip(_INIT_KEYS, PAPER_INITIAL_STATE)))

    t_end_default = DEFAULT_T_END_STOCHASTIC if noise is not None else DEFAULT_T_END_DETERMINISTIC
    integrator_values = dict(
        t_end=_number(entries, "integrator.t_end", t_end_default),
        dt=_number(entries, "integrator.dt", 0.01),
        record_every=_integer(entries, "integrator.record_every", DEFAULT_RECORD_EVERY),
        positivity_floor=_number(entries, "integrator.positivity_floor", 0.0),
    )
    try:
        integrator = IntegratorConfig(**integrator_values)
    except ValueError as exc:
        raise ParameterError("integrator", str(exc)) from exc

    override = _number(entries, "dfe.override")
    if override is not None and not override > 0:
        raise ParameterError("dfe.override", "must be > 0")
    convention = DfeConvention(override)

    ensemble = None
    if "ensemble.paths" in entries or "ensemble.seed" in entries:
        ensemble = EnsembleSpec(
            n_paths=_integer(entries, "ensemble.paths", DEFAULT_N_PATHS),
            master_seed=_integer(entries, "ensemble.seed", 0),
        )

    sweep = None
    sweep_keys = [k for k in entries if k.startswith("sweep.")]
    if len(sweep_keys) > 1:
        raise ConfigError("only one sweep target allowed", entries[sweep_keys[1]][1])
    if sweep_keys:
        key = sweep_keys[0]
        value, line = entries[key]
        items = value if isinstance(value, tuple) else (value,)
        if any(isinstance(v, bool) for v in items):
            raise ConfigError(f"{key} expects numbers", line)
        sweep = SweepSpec(key.split(".", 1)[1], tuple(float(v) for v in items))

    return ScenarioConfig(
        parameters=params,
        initial_state=init,
        integrator=integrator,
        noise=noise,
        dfe_convention=convention,
        ensemble=ensemble,
        sweep=sweep,
    )


def render_config(config: ScenarioConfig) -> str:
    """Inverse of :func:`parse_config`; every value is written explicitly."""
    out = []
    for key, value in config.parameters.as_dict().items():
        out.append(f"{key} = {value!r}")
    if config.noise is not None:
        for key, value in zip(_NOISE_KEYS, dataclasses.astuple(config.noise)):
            out.append(f"{key} = {value!r}")
    for key, value in zip(_INIT_KEYS, config.initial_state):
        out.append(f"{key} = {float(value)!r}")
    cfg = config.integrator
    out.append(f"integrator.t_end = {float(cfg.t_end)!r}")
    out.append(f"integrator.dt = {float(cfg.dt)!r}")
    out.append(f"integrator.record_every = {int(cfg.record_every)}")
    out.append(f"integrator.positivity_floor = {float(cfg.positivity_floor)!r}")
    if not config.dfe_convention.is_formula:
        out.append(f"dfe.override = {config.dfe_convention.override!r}")
    if config.ensemble is not None:
        out.append(f"ensemble.paths = {config.ensemble.n_paths}")
        out.append(f"ensemble.seed = {config.ensemble.master_seed}")
    if config.sweep is not None:
        out.append(f"sweep.{config.sweep.target} = " + ", ".join(repr(v) for v in config.sweep.values))
    return "\n".join(out) + "\n"


def table1_config() -> ScenarioConfig:
    return parse_config("")


assert set(TABLE1) <= set(_PARAM_KEYS)
