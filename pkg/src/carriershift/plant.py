"""Continuous-time electrical model: 2-level inverter legs, LC filter, grid
impedance, and a programmable grid source with timed fault events.

The simulated network is inverter -> (l_f, r_f) -> PCC capacitor c_f ->
(l_g, r_g) -> ideal source. Faults are applied at the ideal source, so the
PCC voltage always shows a natural transient through the grid impedance.
State is integrated componentwise in the stationary alpha-beta frame with
classical fixed-step RK4; the switch state is held constant over a step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

from .frames import AlphaBetaPair, ThreePhase, V_PHASE_PEAK, abc_to_alphabeta

TWO_PI_3 = 2.0 * math.pi / 3.0


class NonFiniteState(Exception):
    """Raised when integration produces NaN/Inf; carries the offending time."""

    def __init__(self, t: float):
        super().__init__(f"plant state became non-finite at t={t:.9g} s")
        self.t = t


@dataclass(frozen=True)
class PlantParams:
    l_f: float = 3.4e-3     # filter inductance [H]
    r_f: float = 12.5e-3    # filter resistance [ohm]
    c_f: float = 55e-6      # filter capacitance [F]
    l_g: float = 1.7e-3     # grid-side inductance [H]
    r_g: float = 0.1        # grid-side resistance [ohm]
    v_dc: float = 400.0     # DC-link voltage [V]
    v_m: float = V_PHASE_PEAK   # grid phase-peak amplitude [V]
    omega_g: float = 2.0 * math.pi * 60.0  # nominal grid frequency [rad/s]

    def __post_init__(self):
        for name in ("l_f", "c_f", "l_g", "v_dc", "v_m", "omega_g"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.r_f < 0.0 or self.r_g < 0.0:
            raise ValueError("resistances must be non-negative")


# --------------------------------------------------------------------------
# Fault program
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetricSag:
    depth: float  # fraction of nominal removed, 0..1


@dataclass(frozen=True)
class PhaseABShort:
    pass


@dataclass(frozen=True)
class PhaseJump:
    delta: float  # radians, added to the source angle from t_start onward


FaultKind = Union[SymmetricSag, PhaseABShort, PhaseJump]


@dataclass(frozen=True)
class FaultEvent:
    t_start: float
    t_end: float
    kind: FaultKind


@dataclass(frozen=True)
class FaultProgram:
    events: tuple[FaultEvent, ...] = ()

    def __post_init__(self):
        ordered = sorted(self.events, key=lambda e: e.t_start)
        for ev in ordered:
            if ev.t_end < ev.t_start:
                raise ValueError("event ends before it starts")
            if isinstance(ev.kind, SymmetricSag) and not 0.0 <= ev.kind.depth <= 1.0:
                raise ValueError("sag depth must lie in [0, 1]")
        for prev, nxt in zip(ordered, ordered[1:]):
            if nxt.t_start < prev.t_end:
                raise ValueError("fault events overlap")
        object.__setattr__(self, "events", tuple(ordered))

    def shifted(self, dt: float) -> "FaultProgram":
        """Return a copy with every event delayed by dt seconds."""
        return FaultProgram(tuple(
            replace(ev, t_start=ev.t_start + dt, t_end=ev.t_end + dt)
            for ev in self.events))

    def first_start(self) -> float | None:
        return self.events[0].t_start if self.events else None


def grid_source_voltage(program: FaultProgram, params: PlantParams, t: float) -> ThreePhase:
    """Ideal-source phase voltages at time t, with fault events applied.

    Phase jumps are persistent: each jump adds its delta to the angle
    argument from its start time onward. Sags and the phase A-B short act
    only inside their [t_start, t_end) window.
    """
    theta = params.omega_g * t
    scale = 1.0
    ab_short = False
    for ev in program.events:
        k = ev.kind
        if isinstance(k, PhaseJump):
            if t >= ev.t_start:
                theta += k.delta
        elif ev.t_start <= t < ev.t_end:
            if isinstance(k, SymmetricSag):
                scale = 1.0 - k.depth
            else:
                ab_short = True
    vm = params.v_m * scale
    va = vm * math.cos(theta)
    vb = vm * math.cos(theta - TWO_PI_3)
    vc = vm * math.cos(theta + TWO_PI_3)
    if ab_short:
        avg = 0.5 * (va + vb)
        va = vb = avg
    return ThreePhase(va, vb, vc)


def grid_source_alphabeta(program: FaultProgram, params: PlantParams, t: float) -> tuple[float, float]:
    """Same source in alpha-beta; closed form for the balanced cases."""
    theta = params.omega_g * t
    scale = 1.0
    for ev in program.events:
        k = ev.kind
        if isinstance(k, PhaseJump):
            if t >= ev.t_start:
                theta += k.delta
        elif ev.t_start <= t < ev.t_end:
            if isinstance(k, SymmetricSag):
                scale = 1.0 - k.depth
            else:
                # unbalanced event, go through the abc path
                return abc_to_alphabeta(grid_source_voltage(program, params, t))
    vm = params.v_m * scale
    return vm * math.cos(theta), vm * math.sin(theta)


# --------------------------------------------------------------------------
# Switching and state
# --------------------------------------------------------------------------

SwitchVector = tuple[int, int, int]  # 1 = upper device on, per leg


def pole_voltage(sw: SwitchVector, v_dc: float) -> ThreePhase:
    """Leg output voltages referenced to the DC midpoint."""
    h = 0.5 * v_dc
    return ThreePhase(h if sw[0] else -h, h if sw[1] else -h, h if sw[2] else -h)


def pole_alphabeta(sw: SwitchVector, v_dc: float) -> tuple[float, float]:
    return tuple(abc_to_alphabeta(pole_voltage(sw, v_dc)))


@dataclass
class PlantState:
    i_inv: AlphaBetaPair = field(default_factory=lambda: AlphaBetaPair(0.0, 0.0))
    v_c: AlphaBetaPair = field(default_factory=lambda: AlphaBetaPair(0.0, 0.0))
    i_g: AlphaBetaPair = field(default_factory=lambda: AlphaBetaPair(0.0, 0.0))
    t: float = 0.0

    def flat(self) -> tuple[float, float, float, float, float, float]:
        return (self.i_inv.al, self.i_inv.be, self.v_c.al, self.v_c.be,
                self.i_g.al, self.i_g.be)

    @staticmethod
    def from_flat(x, t: float) -> "PlantState":
        return PlantState(AlphaBetaPair(x[0], x[1]), AlphaBetaPair(x[2], x[3]),
                          AlphaBetaPair(x[4], x[5]), t)


def derivative(state: PlantState, v_inv: AlphaBetaPair, e_g: AlphaBetaPair,
               params: PlantParams) -> PlantState:
    """Time derivative of the LCL network state for given terminal voltages."""
    ia, ib = state.i_inv
    va, vb = state.v_c
    ga, gb = state.i_g
    inv_lf, inv_cf, inv_lg = 1.0 / params.l_f, 1.0 / params.c_f, 1.0 / params.l_g
    return PlantState(
        AlphaBetaPair((v_inv.al - va - params.r_f * ia) * inv_lf,
                      (v_inv.be - vb - params.r_f * ib) * inv_lf),
        AlphaBetaPair((ia - ga) * inv_cf, (ib - gb) * inv_cf),
        AlphaBetaPair((va - e_g.al - params.r_g * ga) * inv_lg,
                      (vb - e_g.be - params.r_g * gb) * inv_lg),
        1.0,
    )


def integrate_fixed(x, t0: float, dt: float, n_steps: int, v_inv_ab,
                    program: FaultProgram, params: PlantParams):
    """Advance the flat 6-state by n_steps RK4 steps under a constant switch
    vector. The grid source is sampled at the RK4 sub-step times.

    Returns the new flat state; raises NonFiniteState on NaN/Inf.
    """
    ia, ib, va, vb, ga, gb = x
    val, vbe = v_inv_ab
    rf, rg = params.r_f, params.r_g
    inv_lf, inv_cf, inv_lg = 1.0 / params.l_f, 1.0 / params.c_f, 1.0 / params.l_g
    h = dt
    half = 0.5 * h
    sixth = h / 6.0
    src = grid_source_alphabeta
    for i in range(n_steps):
        t = t0 + i * h
        e0a, e0b = src(program, params, t)
        e1a, e1b = src(program, params, t + half)
        e2a, e2b = src(program, params, t + h)

        # k1
        k1_ia = (val - va - rf * ia) * inv_lf
        k1_ib = (vbe - vb - rf * ib) * inv_lf
        k1_va = (ia - ga) * inv_cf
        k1_vb = (ib - gb) * inv_cf
        k1_ga = (va - e0a - rg * ga) * inv_lg
        k1_gb = (vb - e0b - rg * gb) * inv_lg
        # k2 at t + h/2
        ia2 = ia + half * k1_ia
        ib2 = ib + half * k1_ib
        va2 = va + half * k1_va
        vb2 = vb + half * k1_vb
        ga2 = ga + half * k1_ga
        gb2 = gb + half * k1_gb
        k2_ia = (val - va2 - rf * ia2) * inv_lf
        k2_ib = (vbe - vb2 - rf * ib2) * inv_lf
        k2_va = (ia2 - ga2) * inv_cf
        k2_vb = (ib2 - gb2) * inv_cf
        k2_ga = (va2 - e1a - rg * ga2) * inv_lg
        k2_gb = (vb2 - e1b - rg * gb2) * inv_lg
        # k3 at t + h/2
        ia3 = ia + half * k2_ia
        ib3 = ib + half * k2_ib
        va3 = va + half * k2_va
        vb3 = vb + half * k2_vb
        ga3 = ga + half * k2_ga
        gb3 = gb + half * k2_gb
        k3_ia = (val - va3 - rf * ia3) * inv_lf
        k3_ib = (vbe - vb3 - rf * ib3) * inv_lf
        k3_va = (ia3 - ga3) * inv_cf
        k3_vb = (ib3 - gb3) * inv_cf
        k3_ga = (va3 - e1a - rg * ga3) * inv_lg
        k3_gb = (vb3 - e1b - rg * gb3) * inv_lg
        # k4 at t + h
        ia4 = ia + h * k3_ia
        ib4 = ib + h * k3_ib
        va4 = va + h * k3_va
        vb4 = vb + h * k3_vb
        ga4 = ga + h * k3_ga
        gb4 = gb + h * k3_gb
        k4_ia = (val - va4 - rf * ia4) * inv_lf
        k4_ib = (vbe - vb4 - rf * ib4) * inv_lf
        k4_va = (ia4 - ga4) * inv_cf
        k4_vb = (ib4 - gb4) * inv_cf
        k4_ga = (va4 - e2a - rg * ga4) * inv_lg
        k4_gb = (vb4 - e2b - rg * gb4) * inv_lg

        ia += sixth * (k1_ia + 2.0 * (k2_ia + k3_ia) + k4_ia)
        ib += sixth * (k1_ib + 2.0 * (k2_ib + k3_ib) + k4_ib)
        va += sixth * (k1_va + 2.0 * (k2_va + k3_va) + k4_va)
        vb += sixth * (k1_vb + 2.0 * (k2_vb + k3_vb) + k4_vb)
        ga += sixth * (k1_ga + 2.0 * (k2_ga + k3_ga) + k4_ga)
        gb += sixth * (k1_gb + 2.0 * (k2_gb + k3_gb) + k4_gb)

    if not (math.isfinite(ia) and math.isfinite(ib) and math.isfinite(va)
            and math.isfinite(vb) and math.isfinite(ga) and math.isfinite(gb)):
        raise NonFiniteState(t0 + n_steps * h)
    return ia, ib, va, vb, ga, gb


def step_rk4(state: PlantState, sw: SwitchVector, program: FaultProgram,
             params: PlantParams, dt: float) -> PlantState:
    """One classical RK4 step with the given gate state held constant."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    v_inv = pole_alphabeta(sw, params.v_dc)
    x = integrate_fixed(state.flat(), state.t, dt, 1, v_inv, program, params)
    return PlantState.from_flat(x, state.t + dt)


def stored_energy(state: PlantState, params: PlantParams) -> float:
    """Total magnetic plus electrostatic energy of the network [J]."""
    ia, ib, va, vb, ga, gb = state.flat()
    return (0.5 * params.l_f * (ia * ia + ib * ib)
            + 0.5 * params.c_f * (va * va + vb * vb)
            + 0.5 * params.l_g * (ga * ga + gb * gb))
