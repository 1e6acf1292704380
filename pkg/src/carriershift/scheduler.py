"""Deterministic simulation scheduler.

The master clock advances in oversampling batches of ``n_ovs`` PWM ticks.
Within a batch the plant is integrated in fixed RK4 steps; gate toggles
reported by the PWM engine are quantized to the first plant-step boundary at
or after the exact compare match, so a step never straddles a switching
edge. All control actions fire at batch boundaries: peak/valley events run
the base-rate task, every boundary runs the high-rate task, and a reset
from the high-rate task force-resets the PWM engine and restarts the
base-rate routine at the newly created carrier peak.

Everything is integer-tick bookkeeping plus pure float arithmetic, so two
runs with the same configuration are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .controller import (BaseRateState, ControlSample, ControllerConfig,
                         HighRateState, base_rate_task, high_rate_task)
from .frames import AlphaBetaPair, DqPair, I_PHASE_PEAK
from .plant import (FaultProgram, PlantParams, grid_source_voltage,
                    integrate_fixed, pole_alphabeta)
from .pwm import PwmEngine


@dataclass(frozen=True)
class SimSettings:
    n_pwm: int = 28560          # carrier peak [counts]; 2*n_pwm ticks per switching period
    steps_per_ovs: int = 16     # plant steps per oversampling batch
    preroll_cycles: int = 6     # grid cycles of pre-roll before t=0

    def __post_init__(self):
        if self.steps_per_ovs < 8:
            raise ValueError("need at least 8 plant steps per oversampling batch")


class TelemetryRecord(NamedTuple):
    t: float
    ctr_ovs_w: int
    rst: int
    u_end: int
    dv_al: float
    dv_be: float
    di_norm: float
    cmp_a: int
    cmp_b: int
    cmp_c: int
    theta: float


@dataclass
class SimResult:
    scenario: str
    mode: str
    rows: list                     # trace rows, one per high-rate execution
    telemetry: list
    loads: list                    # (tick, active compare triple) per load event
    resets: list                   # tick of every forced carrier reset
    t_clk: float
    fault_t0: float | None
    params: PlantParams
    cfg: ControllerConfig
    i_base: float = I_PHASE_PEAK


def _steady_state_phasors(params: PlantParams, cfg: ControllerConfig, t0: float):
    """Fixed-point solve of the 60 Hz steady state with the commanded dq
    current injected in phase with the PCC voltage."""
    w = params.omega_g
    e = params.v_m * complex(math.cos(w * t0), math.sin(w * t0))
    z_g = complex(params.r_g, w * params.l_g)
    i_cmd = complex(cfg.i_ref_dq.d, cfg.i_ref_dq.q)
    v_c = e
    i_inv = i_g = 0j
    for _ in range(40):
        ang = cmath_phase(v_c)
        i_inv = i_cmd * complex(math.cos(ang), math.sin(ang))
        i_cap = 1j * w * params.c_f * v_c
        i_g = i_inv - i_cap
        v_new = e + z_g * i_g
        if abs(v_new - v_c) < 1e-10:
            v_c = v_new
            break
        v_c = v_new
    return i_inv, v_c, i_g


def cmath_phase(z: complex) -> float:
    return math.atan2(z.imag, z.real)


class Simulation:
    """One scenario-mode job. Single-owner, resumable in whole batches."""

    def __init__(self, name: str, program: FaultProgram, duration: float,
                 params: PlantParams, cfg: ControllerConfig,
                 settings: SimSettings = SimSettings()):
        if duration <= 0.0:
            raise ValueError("duration must be positive")
        self.name = name
        self.program = program
        self.params = params
        self.cfg = cfg
        self.settings = settings

        n_pwm = settings.n_pwm
        self.t_clk = cfg.t_cpu / n_pwm
        self.engine = PwmEngine(n_pwm=n_pwm, k_ovs=cfg.k_ovs, t_clk=self.t_clk)
        n_ovs = self.engine.n_ovs
        if n_ovs % settings.steps_per_ovs:
            raise ValueError("steps_per_ovs must divide the oversampling batch")
        self.step_ticks = n_ovs // settings.steps_per_ovs
        self.dt = self.step_ticks * self.t_clk

        # pre-roll: an integer number of base periods covering the requested cycles
        cycle = 2.0 * math.pi / params.omega_g
        periods = math.ceil(settings.preroll_cycles * cycle / cfg.t_cpu - 1e-9)
        self.preroll_ticks = periods * n_pwm
        self.tick = -self.preroll_ticks
        self.end_tick = math.ceil(round(duration / self.t_clk) / n_ovs) * n_ovs

        self.rows: list = []
        self.telemetry: list = []
        self.loads: list = []
        self.resets: list = []
        self._bootstrap()

    # -- initialization ----------------------------------------------------

    def _bootstrap(self):
        t0 = self.tick * self.t_clk
        i_inv, v_c, i_g = _steady_state_phasors(self.params, self.cfg, t0)
        self.x = (i_inv.real, i_inv.imag, v_c.real, v_c.imag, i_g.real, i_g.imag)
        theta0 = cmath_phase(v_c)
        self.br = BaseRateState.locked(
            self.cfg, theta0, abs(v_c),
            pi_integ0=DqPair(self.cfg.r_s * self.cfg.i_ref_dq.d,
                             self.cfg.r_s * self.cfg.i_ref_dq.q))
        self.hr = HighRateState(ff_memory=AlphaBetaPair(v_c.real, v_c.imag))
        self._last_base_tick = None

        # treat the start instant as a carrier peak boundary
        sample = self._sample(t0)
        base_rate_task(self.br, sample, self.cfg)
        self._last_base_tick = self.tick
        self._last_base_t = t0
        res = high_rate_task(self.hr, self.br, sample, self.cfg,
                             self.engine.n_pwm, at_boundary=True)
        if res.cmp is not None:
            self.engine.write_shadow(res.cmp)
        self.engine.bank.active = self.engine.bank.shadow
        self.loads.append((self.tick, self.engine.bank.active))
        self.sw = self.engine.gate_states()
        self._record(t0, res, sample)

    def _sample(self, t: float) -> ControlSample:
        x = self.x
        return ControlSample(v_pcc=AlphaBetaPair(x[2], x[3]),
                             i_s=AlphaBetaPair(x[0], x[1]), t=t)

    # -- main loop ---------------------------------------------------------

    def run_until_tick(self, target: int):
        n_ovs = self.engine.n_ovs
        spb = self.settings.steps_per_ovs
        step_ticks = self.step_ticks
        while self.tick < target:
            ev = self.engine.advance(n_ovs)
            if ev.ovs_interrupts != [n_ovs]:
                raise AssertionError("oversampling lattice lost alignment")
            boundary = bool(ev.peaks or ev.valleys)
            if boundary and (ev.peaks or ev.valleys) != [n_ovs]:
                raise AssertionError("carrier extremum off the batch boundary")

            # integrate the batch, switching at quantized toggle boundaries
            pending: dict[int, list] = {}
            for off, ph, on in ev.toggles:
                q = -(-off // step_ticks)
                if q < spb:
                    pending.setdefault(q, []).append((ph, on))
            sw = list(self.sw)
            x = self.x
            seg_start = 0
            for q in sorted(pending) + [spb]:
                if q > seg_start:
                    t_seg = (self.tick + seg_start * step_ticks) * self.t_clk
                    v_inv = pole_alphabeta(tuple(sw), self.params.v_dc)
                    x = integrate_fixed(x, t_seg, self.dt, q - seg_start, v_inv,
                                        self.program, self.params)
                    seg_start = q
                if q < spb:
                    for ph, on in pending[q]:
                        sw[ph] = 1 if on else 0
            self.x = x
            self.tick += n_ovs
            t = self.tick * self.t_clk

            sample = self._sample(t)
            if boundary:
                self.loads.append((self.tick, self.engine.bank.active))
                base_rate_task(self.br, sample, self.cfg)
                self._last_base_tick = self.tick
                self._last_base_t = t
            res = high_rate_task(self.hr, self.br, sample, self.cfg,
                                 self.engine.n_pwm, at_boundary=boundary)
            if res.cmp is not None:
                self.engine.write_shadow(res.cmp)
            if res.rst:
                self.engine.force_reset()
                self.resets.append(self.tick)
                self.loads.append((self.tick, self.engine.bank.active))
                if self._last_base_tick != self.tick:
                    base_rate_task(self.br, sample, self.cfg)
                    self._last_base_tick = self.tick
                    self._last_base_t = t
            self.sw = self.engine.gate_states()
            self._record(t, res, sample)

    def run_to_end(self):
        self.run_until_tick(self.end_tick)

    def _record(self, t: float, res, sample: ControlSample):
        src = grid_source_voltage(self.program, self.params, t)
        ia, ib = sample.i_s
        self.rows.append((
            t, src.a, src.b, src.c,
            sample.v_pcc.al, sample.v_pcc.be,
            ia, ib, math.hypot(ia, ib) / I_PHASE_PEAK,
            1 if res.rst else 0, res.l,
        ))
        hr = self.hr
        cmp = res.cmp if res.cmp is not None else (-1, -1, -1)
        # reference angle extrapolated between base executions; the PLL state
        # itself is a staircase at the base rate
        theta = self.br.theta_sample + self.br.pll_omega * (t - self._last_base_t)
        self.telemetry.append(TelemetryRecord(
            t, res.l, 1 if res.rst else 0, 1 if hr.u_end else 0,
            hr.last_disturbance.al, hr.last_disturbance.be,
            math.hypot(hr.last_delta_i.al, hr.last_delta_i.be),
            cmp[0], cmp[1], cmp[2], theta,
        ))

    def result(self, mode_label: str | None = None) -> SimResult:
        return SimResult(
            scenario=self.name, mode=mode_label or self.cfg.mode,
            rows=self.rows, telemetry=self.telemetry, loads=self.loads,
            resets=self.resets, t_clk=self.t_clk,
            fault_t0=self.program.first_start(),
            params=self.params, cfg=self.cfg)


def align_shift_seconds(fault_align: float, cfg: ControllerConfig,
                        settings: SimSettings) -> float:
    """Quantize a fault alignment (fraction of the base period) to the plant
    step grid so fault edges never straddle an integration step."""
    if not 0.0 <= fault_align < 1.0:
        raise ValueError("fault_align must lie in [0, 1)")
    step_ticks = (settings.n_pwm // cfg.k_ovs) // settings.steps_per_ovs
    steps_per_base = settings.n_pwm // step_ticks
    t_clk = cfg.t_cpu / settings.n_pwm
    return round(fault_align * steps_per_base) * step_ticks * t_clk


def run_single(name: str, program: FaultProgram, duration: float,
               params: PlantParams, cfg: ControllerConfig,
               fault_align: float = 0.0,
               settings: SimSettings = SimSettings()) -> SimResult:
    """Run one scenario in one mode to completion."""
    shift = align_shift_seconds(fault_align, cfg, settings)
    prog = program.shifted(shift) if shift else program
    sim = Simulation(name, prog, duration, params, cfg, settings)
    sim.run_to_end()
    return sim.result()


def run_modes(name: str, program: FaultProgram, duration: float,
              params: PlantParams, cfg: ControllerConfig, modes,
              fault_align: float = 0.0,
              settings: SimSettings = SimSettings()) -> dict[str, SimResult]:
    """Run the same scenario in each requested mode; jobs are independent."""
    out = {}
    for mode in modes:
        out[mode] = run_single(name, program, duration, params,
                               replace(cfg, mode=mode), fault_align, settings)
    return out
