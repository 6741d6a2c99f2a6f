"""Scenario configuration: ``key = value`` lines with dotted section names.

Frequencies are in units of omega_q and times in ``t~ = omega_q t / 2 pi``.
The format is a flat subset of TOML, so parsing goes through ``tomli``. A
key that is absent takes the scenario default; optional quantities are
switched off with the string ``"none"``::

    scenario = "multitone_roundtrip"
    model.coupling = 1.0
    model.omega_g = 6.7
    pulse.n_tones = 9
    times.t_pulse1 = 80.0
    times.t_pulse2 = "none"
    dissipation.enabled = true
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError

SCENARIOS = (
    "ultrafast_roundtrip",
    "multitone_roundtrip",
    "entropy_sweep",
    "fidelity_sweep",
    "convergence_report",
)


@dataclass
class ModelSection:
    omega_q: float = 1.0
    omega_c: float = 0.5
    coupling: float = 1.0
    omega_g: float = 9.0
    fock_cutoff: int | None = None  # None: max(30, ceil(10 (lambda/omega_c)^2 / 3))


@dataclass
class PulseSection:
    kind: str = "ultrafast"
    epsilon: float = 0.5
    width: float = 0.01  # Gaussian width, units of 1/omega_q
    n_tones: int = 9
    duration: float = 70.0  # multi-tone window length in t~
    ramp_fraction: float = 0.1
    amplitude: float | None = None  # None: calibrate
    calibration_cutoff: int | None = None


@dataclass
class DissipationSection:
    enabled: bool = False
    gamma_egp: float = 1e-4
    gamma_gep: float = 1e-4
    gamma_eg: float = 1e-4
    gamma_field: float = 1e-5


@dataclass
class TimesSection:
    t_start: float = 0.0
    t_end: float = 6.0
    t_pulse1: float = 2.0
    t_pulse2: float | None = 4.0
    samples_per_unit: float = 512.0
    detuned_delay: float | None = 1.5


@dataclass
class SweepSection:
    lambdas: list = field(default_factory=lambda: [0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1])
    tone_counts: list = field(default_factory=lambda: [7, 9])
    entropy_tolerance: float = 0.02
    fidelity_tolerance: float = 0.02
    n_jobs: int = 1


@dataclass
class ConvergenceSection:
    base_scenario: str = "ultrafast_roundtrip"
    cutoffs: list = field(default_factory=lambda: [20, 30, 40])
    rtol_factors: list = field(default_factory=lambda: [1.0, 0.1])


@dataclass
class IntegratorSection:
    rtol_schrodinger: float = 1e-9
    rtol_master: float = 1e-7


@dataclass
class OutputSection:
    directory: str = "results"
    format: str = "csv"


@dataclass
class ScenarioConfig:
    scenario: str = "ultrafast_roundtrip"
    model: ModelSection = field(default_factory=ModelSection)
    pulse: PulseSection = field(default_factory=PulseSection)
    dissipation: DissipationSection = field(default_factory=DissipationSection)
    times: TimesSection = field(default_factory=TimesSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    convergence: ConvergenceSection = field(default_factory=ConvergenceSection)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        t = self.times
        if t.t_end <= t.t_start:
            raise ConfigError("times.t_end must exceed times.t_start")
        if t.t_pulse2 is not None and t.t_pulse2 <= t.t_pulse1:
            raise ConfigError("times.t_pulse2 must come after times.t_pulse1")
        if t.samples_per_unit <= 0:
            raise ConfigError("times.samples_per_unit must be positive")
        if self.pulse.kind not in ("ultrafast", "multitone"):
            raise ConfigError(f"pulse.kind must be 'ultrafast' or 'multitone', got {self.pulse.kind!r}")
        if self.pulse.kind == "multitone" and t.t_pulse2 is not None:
            if t.t_pulse1 + self.pulse.duration > t.t_pulse2:
                raise ConfigError("multi-tone pulses overlap: t_pulse1 + duration exceeds t_pulse2")
        if self.model.coupling < 0 or self.model.omega_c <= 0 or self.model.omega_q <= 0:
            raise ConfigError("model frequencies must be positive and coupling non-negative")
        if self.model.fock_cutoff is not None and self.model.fock_cutoff < 1:
            raise ConfigError("model.fock_cutoff must be >= 1")
        if not self.sweep.lambdas or any(x <= 0 for x in self.sweep.lambdas):
            raise ConfigError("sweep.lambdas must be a non-empty list of positive couplings")
        if any(int(n) != n or n < 1 for n in self.sweep.tone_counts):
            raise ConfigError("sweep.tone_counts must be positive integers")
        if self.convergence.base_scenario not in ("ultrafast_roundtrip", "multitone_roundtrip"):
            raise ConfigError("convergence.base_scenario must be a round-trip scenario")
        if self.output.format != "csv":
            raise ConfigError("only csv output is supported")
        return self


def default_config(scenario: str) -> ScenarioConfig:
    """Settings of the corresponding published figure."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    cfg = ScenarioConfig(scenario=scenario)
    if scenario in ("multitone_roundtrip", "entropy_sweep", "fidelity_sweep"):
        cfg.pulse.kind = "multitone"
        cfg.dissipation.enabled = True
    if scenario == "multitone_roundtrip":
        cfg.model.omega_g = 6.7
        cfg.times = TimesSection(
            t_start=0.0, t_end=330.0, t_pulse1=80.0, t_pulse2=250.0, samples_per_unit=2.0, detuned_delay=None
        )
    elif scenario in ("entropy_sweep", "fidelity_sweep"):
        cfg.times = TimesSection(
            t_start=0.0, t_end=72.0, t_pulse1=1.0, t_pulse2=None, samples_per_unit=1.0, detuned_delay=None
        )
    return cfg


# -- serialization ---------------------------------------------------------

_SECTIONS = {f.name: f.type for f in fields(ScenarioConfig) if f.name != "scenario"}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"non-finite value {value!r} cannot be written")
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {value!r}")


def emit_config(cfg: ScenarioConfig) -> str:
    lines = [f"scenario = {_format_value(cfg.scenario)}"]
    for name in _SECTIONS:
        section = getattr(cfg, name)
        lines.append("")
        for f in fields(section):
            value = getattr(section, f.name)
            if value is None:
                value = _NONE
            lines.append(f"{name}.{f.name} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


_OPTIONAL = {"fock_cutoff": int, "calibration_cutoff": int, "amplitude": float, "t_pulse2": float, "detuned_delay": float}
_LIST_ITEMS = {"lambdas": float, "tone_counts": int, "cutoffs": int, "rtol_factors": float}
_NONE = "none"


def _scalar(where, kind, value):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{where} must be a string")
    return value


def _coerce(section_name, f, value):
    where = f"{section_name}.{f.name}"
    if f.name in _OPTIONAL:
        return None if value == _NONE else _scalar(where, _OPTIONAL[f.name], value)
    if f.name in _LIST_ITEMS:
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list")
        return [_scalar(f"{where}[{i}]", _LIST_ITEMS[f.name], v) for i, v in enumerate(value)]
    return _scalar(where, type(f.default), value)


def parse_config(text: str, scenario: str | None = None) -> ScenarioConfig:
    """Parse config text on top of the defaults of its scenario.

    ``scenario`` (e.g. from the command line) is used when the text does not
    name one; naming two different scenarios is an error.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    named = raw.pop("scenario", None)
    if named is not None and scenario is not None and named != scenario:
        raise ConfigError(f"config is for scenario {named!r}, not {scenario!r}")
    cfg = default_config(named or scenario or "ultrafast_roundtrip")
    for name, table in raw.items():
        if name not in _SECTIONS or not isinstance(table, dict):
            raise ConfigError(f"unknown config section {name!r}")
        section = getattr(cfg, name)
        known = {f.name: f for f in fields(section)}
        for key, value in table.items():
            if key not in known:
                raise ConfigError(f"unknown key {name}.{key}")
            setattr(section, key, _coerce(name, known[key], value))
    return cfg.validate()


def load_config(path, scenario: str | None = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, scenario)
