"""Scenario catalog and configuration plumbing.

The built-in scenarios mirror the bench experiments: a deep symmetric sag, a
phase A-B short, and phase jumps of both signs. Scenario plant parameters
use a grid-simulator-like source impedance (microhenry scale, tenth-ohm
resistive) so the PCC voltage collapses within an oversampling slot of a
source fault, the way it does when a programmable AC source sits directly
at the filter capacitor terminals. The module-level ``PlantParams`` default
keeps a stiff-but-finite utility value instead; both are configurable.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields as dc_fields, replace

from .controller import ControllerConfig
from .plant import (FaultEvent, FaultProgram, PhaseABShort, PhaseJump,
                    PlantParams, SymmetricSag)

#: source impedance used by scenario runs (programmable-source rig model)
SCENARIO_GRID_LG = 1.0e-6
SCENARIO_GRID_RG = 0.1


@dataclass(frozen=True)
class Scenario:
    name: str
    fault: FaultProgram
    duration: float
    mode: str = "both"                      # "dsdu" | "proposed" | "both"
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")
        for ev in self.fault.events:
            if not (0.0 <= ev.t_start and ev.t_end <= self.duration + 1e-12):
                raise ValueError("fault events must lie within [0, duration]")
        if self.mode not in ("dsdu", "proposed", "both"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def modes(self) -> tuple[str, ...]:
        return ("dsdu", "proposed") if self.mode == "both" else (self.mode,)


def builtin_scenarios() -> list[Scenario]:
    """The four bench fault scenarios."""
    sag = FaultProgram((FaultEvent(0.0, 0.12, SymmetricSag(0.9)),))
    short = FaultProgram((FaultEvent(0.0, 0.12, PhaseABShort()),))
    neg = FaultProgram((FaultEvent(0.0, 0.2, PhaseJump(-math.pi / 3.0)),))
    pos = FaultProgram((FaultEvent(0.0, 0.2, PhaseJump(math.pi / 3.0)),))
    return [
        Scenario("sym_sag_90", sag, 0.2),
        Scenario("ab_short", short, 0.2),
        Scenario("jump_neg60", neg, 0.2),
        Scenario("jump_pos60", pos, 0.2),
    ]


def no_fault_scenario(duration: float = 10.0 / 60.0) -> Scenario:
    return Scenario("no_fault", FaultProgram(), duration)


def get_scenario(name: str) -> Scenario:
    if name == "no_fault":
        return no_fault_scenario()
    for s in builtin_scenarios():
        if s.name == name:
            return s
    raise KeyError(f"unknown scenario {name!r}")


def scenario_plant_params(**overrides) -> PlantParams:
    """Plant parameters for scenario runs (rig-style grid source)."""
    base = dict(l_g=SCENARIO_GRID_LG, r_g=SCENARIO_GRID_RG)
    base.update(overrides)
    return PlantParams(**base)


_KIND_BUILDERS = {
    "symmetric_sag": lambda sec: SymmetricSag(float(sec.get("depth", "0.9"))),
    "phase_ab_short": lambda sec: PhaseABShort(),
    "phase_jump": lambda sec: PhaseJump(float(sec["delta"])),
}


def scenario_from_file(path: str) -> Scenario:
    """Load a scenario from flat INI text.

    Layout: a [scenario] section with name/duration/mode, one [event.N]
    section per fault event (kind, t_start, t_end, plus kind parameters),
    and optional [plant]/[controller] sections of parameter overrides.
    """
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(path)
    if "scenario" not in cp:
        raise ValueError(f"{path}: missing [scenario] section")
    sec = cp["scenario"]
    events = []
    for sname in cp.sections():
        if not sname.startswith("event"):
            continue
        esec = cp[sname]
        kind_name = esec.get("kind", "")
        if kind_name not in _KIND_BUILDERS:
            raise ValueError(f"{path}: unknown fault kind {kind_name!r}")
        events.append(FaultEvent(
            float(esec.get("t_start", "0")), float(esec.get("t_end", "0")),
            _KIND_BUILDERS[kind_name](esec)))
    overrides = {}
    for group in ("plant", "controller"):
        if group in cp:
            for key, val in cp[group].items():
                overrides[f"{group}.{key}"] = val
    return Scenario(
        name=sec.get("name", "custom"),
        fault=FaultProgram(tuple(events)),
        duration=float(sec.get("duration", "0.2")),
        mode=sec.get("mode", "both"),
        overrides=overrides,
    )


def apply_overrides(params: PlantParams, cfg: ControllerConfig,
                    overrides: dict) -> tuple[PlantParams, ControllerConfig]:
    """Apply dotted-key overrides like ``plant.l_g`` or ``controller.pi_kp``."""
    plant_names = {f.name for f in dc_fields(PlantParams)}
    ctrl_names = {f.name for f in dc_fields(ControllerConfig)}
    p_kw, c_kw = {}, {}
    for key, raw in overrides.items():
        group, _, name = key.partition(".")
        if group == "plant" and name in plant_names:
            p_kw[name] = type_coerce(PlantParams, name, raw)
        elif group == "controller" and name in ctrl_names:
            c_kw[name] = type_coerce(ControllerConfig, name, raw)
        else:
            raise KeyError(f"unknown override {key!r}")
    if p_kw:
        params = replace(params, **p_kw)
    if c_kw:
        cfg = replace(cfg, **c_kw)
    return params, cfg


def type_coerce(cls, name: str, raw):
    if not isinstance(raw, str):
        return raw
    for f in dc_fields(cls):
        if f.name == name:
            if f.type in ("int",):
                return int(raw)
            if f.type in ("str",):
                return raw
            return float(raw)
    return float(raw)
