"""Scenario configuration: sectioned ``key = value`` text with typed parsing."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from ..array import ArrayConfig, default_grid
from ..channel import ChannelConfig
from ..kinematics import ControlInput, VehicleGeometry, VehicleState
from ..metrics import PowerModel

DEFAULTS = """\
# Scenario defaults.  Angles are in degrees, distances in metres.

[kinematics]
accel = 1.0
steer_deg = 30.0
heading_deg = 0.0
x0 = 1.0
y0 = 1.0
speed = 20.0
horizon = 0.2
wheelbase = 2.0
safety_radius = 1.0
stages = 3
step = 0.001
# optional fixed AoI centres relative to the start, "dx dy; dx dy; ...".
# When set, the trajectory prediction is bypassed for beam design.
waypoints =

[array]
n_tx = 81
spacing = 0.5
grid_step_deg = 0.1

[channel]
n_rx = 16
n_paths = 10
gain_variance = 1.0
angle_min_deg = -90.0
angle_max_deg = 90.0

[solver]
rho = 0.5
n_streams = 3
# closed-form | sdr
method = closed-form
sdp_tol = 1e-7
scale_radar = true
n_rf = 3
outer_max = 50
outer_tol = 1e-5
inner_tol = 1e-6
inner_max = 500
# random | svd
hybrid_init = random

[power]
p_bb = 10.0
p_rf = 0.3
p_pa = 0.1
p_ps = 0.01

[sweep]
snr_db = -40, -35, -30, -25, -20, -15, -10, -5, 0
rho = 0.2, 0.5, 0.8, 1.0
beampattern_rho = 0.0, 0.5, 1.0
sigma_e = 0.0, 0.3, 1.0
realizations = 100
seed = 20240517
"""


class ConfigError(ValueError):
    """Raised with the offending ``section.key`` in the message."""


@dataclass(frozen=True)
class KinematicsSection:
    accel: float
    steer_deg: float
    heading_deg: float
    x0: float
    y0: float
    speed: float
    horizon: float
    wheelbase: float
    safety_radius: float
    stages: int
    step: float
    waypoints: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class ArraySection:
    n_tx: int
    spacing: float
    grid_step_deg: float


@dataclass(frozen=True)
class ChannelSection:
    n_rx: int
    n_paths: int
    gain_variance: float
    angle_min_deg: float
    angle_max_deg: float


@dataclass(frozen=True)
class SolverSection:
    rho: float
    n_streams: int
    method: str
    sdp_tol: float
    scale_radar: bool
    n_rf: int
    outer_max: int
    outer_tol: float
    inner_tol: float
    inner_max: int
    hybrid_init: str


@dataclass(frozen=True)
class PowerSection:
    p_bb: float
    p_rf: float
    p_pa: float
    p_ps: float


@dataclass(frozen=True)
class SweepSection:
    snr_db: tuple[float, ...]
    rho: tuple[float, ...]
    beampattern_rho: tuple[float, ...]
    sigma_e: tuple[float, ...]
    realizations: int
    seed: int


_SECTIONS = {
    "kinematics": KinematicsSection,
    "array": ArraySection,
    "channel": ChannelSection,
    "solver": SolverSection,
    "power": PowerSection,
    "sweep": SweepSection,
}

_CHOICES = {
    ("solver", "method"): ("closed-form", "sdr"),
    ("solver", "hybrid_init"): ("random", "svd"),
}


@dataclass(frozen=True)
class ScenarioConfig:
    kinematics: KinematicsSection
    array: ArraySection
    channel: ChannelSection
    solver: SolverSection
    power: PowerSection
    sweep: SweepSection

    # -- domain objects -------------------------------------------------
    def vehicle_state(self) -> VehicleState:
        k = self.kinematics
        return VehicleState(k.x0, k.y0, k.speed, math.radians(k.heading_deg))

    def control_input(self) -> ControlInput:
        k = self.kinematics
        return ControlInput(k.accel, math.radians(k.steer_deg))

    def vehicle_geometry(self) -> VehicleGeometry:
        return VehicleGeometry(self.kinematics.wheelbase, self.kinematics.safety_radius)

    def array_config(self) -> ArrayConfig:
        return ArrayConfig(self.array.n_tx, self.array.spacing)

    def grid(self) -> np.ndarray:
        return default_grid(self.array.grid_step_deg)

    def channel_config(self) -> ChannelConfig:
        c = self.channel
        return ChannelConfig(
            n_tx=self.array.n_tx, n_rx=c.n_rx, n_paths=c.n_paths,
            gain_variance=c.gain_variance,
            angle_range=(math.radians(c.angle_min_deg), math.radians(c.angle_max_deg)),
            spacing_over_wavelength=self.array.spacing)

    def power_model(self) -> PowerModel:
        p = self.power
        return PowerModel(p.p_bb, p.p_rf, p.p_pa, p.p_ps)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, sweep=replace(self.sweep, seed=int(seed)))


def _convert(section, name, typ, raw):
    raw = raw.strip()
    where = f"{section}.{name}"
    try:
        if typ is bool or typ == "bool":
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if typ in (int, "int"):
            return int(raw)
        if typ in (float, "float"):
            return float(raw)
        if typ in (str, "str"):
            if (section, name) in _CHOICES and raw not in _CHOICES[(section, name)]:
                raise ValueError(f"expected one of {_CHOICES[(section, name)]}")
            return raw
        if typ in ("tuple[float, ...]",):
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if typ in ("tuple[tuple[float, float], ...]",):
            points = []
            for chunk in raw.split(";"):
                if not chunk.strip():
                    continue
                xy = [float(v) for v in chunk.replace(",", " ").split()]
                if len(xy) != 2:
                    raise ValueError(f"waypoint {chunk.strip()!r} needs two numbers")
                points.append((xy[0], xy[1]))
            return tuple(points)
    except ValueError as exc:
        raise ConfigError(f"config-parse-error: {where} = {raw!r}: {exc}") from None
    raise ConfigError(f"config-parse-error: {where}: unsupported type {typ}")


def _validate(cfg: ScenarioConfig) -> None:
    def need(cond, where, msg):
        if not cond:
            raise ConfigError(f"config-parse-error: {where}: {msg}")

    k, s, sw = cfg.kinematics, cfg.solver, cfg.sweep
    need(k.stages >= 1, "kinematics.stages", "must be at least 1")
    need(k.horizon > 0, "kinematics.horizon", "must be positive")
    need(abs(k.steer_deg) < 90, "kinematics.steer_deg", "must be below 90 in magnitude")
    need(k.speed >= 0, "kinematics.speed", "must be non-negative")
    need(k.wheelbase > 0, "kinematics.wheelbase", "must be positive")
    need(k.safety_radius > 0, "kinematics.safety_radius", "must be positive")
    need(k.step > 0, "kinematics.step", "must be positive")
    need(all(p != (0.0, 0.0) for p in k.waypoints), "kinematics.waypoints",
         "a waypoint coincides with the vehicle")
    n_beams = len(k.waypoints) or k.stages
    need(cfg.array.n_tx >= n_beams, "array.n_tx", "must be at least the number of beams")
    need(cfg.array.spacing > 0, "array.spacing", "must be positive")
    need(cfg.array.grid_step_deg > 0, "array.grid_step_deg", "must be positive")
    need(cfg.channel.n_rx >= 1, "channel.n_rx", "must be at least 1")
    need(cfg.channel.n_paths >= 1, "channel.n_paths", "must be at least 1")
    need(cfg.channel.gain_variance > 0, "channel.gain_variance", "must be positive")
    need(0 <= s.rho <= 1, "solver.rho", "must lie in [0, 1]")
    need(1 <= s.n_streams <= min(cfg.channel.n_rx, cfg.array.n_tx, cfg.channel.n_paths),
         "solver.n_streams", "must not exceed n_rx, n_tx or n_paths")
    need(s.n_streams <= s.n_rf <= cfg.array.n_tx, "solver.n_rf",
         "must satisfy n_streams <= n_rf <= n_tx")
    need(all(0 <= r <= 1 for r in sw.rho), "sweep.rho", "values must lie in [0, 1]")
    need(all(0 <= r <= 1 for r in sw.beampattern_rho), "sweep.beampattern_rho",
         "values must lie in [0, 1]")
    need(all(v >= 0 for v in sw.sigma_e), "sweep.sigma_e", "values must be non-negative")
    need(sw.realizations >= 1, "sweep.realizations", "must be at least 1")
    need(len(sw.snr_db) > 0, "sweep.snr_db", "must not be empty")


def parse_config(text: str | None = None) -> ScenarioConfig:
    """Parse scenario text layered over the defaults.

    Unknown sections or keys are rejected so typos do not pass silently.
    The master seed is mandatory, which the defaults satisfy.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(DEFAULTS)
    if text is not None:
        user = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            user.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config-parse-error: {exc}") from None
        for section in user.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"config-parse-error: unknown section [{section}]")
            for key, value in user.items(section, raw=True):
                if not parser.has_option(section, key):
                    raise ConfigError(f"config-parse-error: unknown key {section}.{key}")
                parser.set(section, key, value)

    built = {}
    for section, cls in _SECTIONS.items():
        values = {}
        for f in fields(cls):
            values[f.name] = _convert(section, f.name, f.type, parser.get(section, f.name))
        built[section] = cls(**values)
    cfg = ScenarioConfig(**built)
    _validate(cfg)
    return cfg


def load_config(path=None) -> ScenarioConfig:
    if path is None:
        return parse_config()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config-parse-error: cannot read {path}: {exc}") from None
    return parse_config(text)
