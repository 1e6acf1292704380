"""Digital control system for the grid-tied inverter.

Two cooperating tasks, mirroring a dual-CPU DSP layout:

* base-rate task, once per carrier peak/valley: DSOGI positive-sequence
  extraction, SRF-PLL grid synchronization, and synchronous-frame PI current
  control with decoupling and anti-windup.
* high-rate task, once per oversampling interrupt: PCC-voltage feedforward,
  offset-injection modulation and shadow compare writes, plus the three
  fast-monitoring sub-blocks (grid-disturbance estimate, projected current
  change over the remaining base period, carrier reset decision).

A conventional double-update baseline ("dsdu" mode) reuses the same control
path but samples and writes compare values only once per peak/valley, so it
carries the classic up-to-two-period reaction delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .frames import (AlphaBetaPair, DqPair, ThreePhase, I_PHASE_PEAK,
                     V_PHASE_PEAK, alphabeta_to_abc)

TWO_PI = 2.0 * math.pi

# Current-loop bandwidth used for the default PI gains (rad/s).
W_CC = TWO_PI * 350.0
# PLL natural frequency / damping for the default gains.
W_PLL = TWO_PI * 20.0
ZETA_PLL = 0.7071067811865476


@dataclass
class ControllerConfig:
    mode: str = "proposed"                 # "proposed" | "dsdu"
    k_ovs: int = 15                        # oversampling ratio
    t_cpu: float = 1.0 / 7000.0            # base-rate period [s]
    l_s: float = 3.4e-3                    # filter inductance seen by control [H]
    r_s: float = 12.5e-3                   # filter resistance [ohm]
    delta_i_mag: float = 0.1 * I_PHASE_PEAK  # reset threshold [A]
    i_ref_dq: DqPair = field(default_factory=lambda: DqPair(I_PHASE_PEAK, 0.0))
    pi_kp: float = 3.4e-3 * W_CC           # [V/A]
    pi_ki: float = 3.4e-3 * W_CC * W_CC / 10.0  # [V/(A s)]
    pll_kp: float = 2.0 * ZETA_PLL * W_PLL  # [rad/s per p.u.]
    pll_ki: float = W_PLL * W_PLL           # [rad/s^2 per p.u.]
    sogi_k: float = math.sqrt(2.0)
    v_dc: float = 400.0
    omega_nom: float = TWO_PI * 60.0        # nominal grid frequency [rad/s]
    v_m_nom: float = V_PHASE_PEAK           # for PLL error normalization
    # Feedforward sample used for the dsdu baseline's compare writes:
    # "boundary" is the conventional scheme (sampled at the peak/valley that
    # starts the period); "latest" reuses the newest high-rate sample, which
    # makes fault-free compare loads match the proposed mode bit for bit.
    dsdu_feedforward: str = "boundary"

    def __post_init__(self):
        if self.k_ovs < 1:
            raise ValueError("k_ovs must be >= 1")
        if self.t_cpu <= 0.0:
            raise ValueError("t_cpu must be positive")
        if self.delta_i_mag <= 0.0:
            raise ValueError("delta_i_mag must be positive")
        if self.mode not in ("proposed", "dsdu"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.dsdu_feedforward not in ("boundary", "latest"):
            raise ValueError("dsdu_feedforward must be 'boundary' or 'latest'")

    @property
    def t_ovs(self) -> float:
        return self.t_cpu / self.k_ovs

    @property
    def v_ref_max(self) -> float:
        # linear modulation limit with offset injection
        return self.v_dc / math.sqrt(3.0)


@dataclass
class ControlSample:
    v_pcc: AlphaBetaPair
    i_s: AlphaBetaPair
    t: float


def _sogi_zoh(k: float, w0: float, t: float):
    """Exact zero-order-hold discretization of the SOGI pair
    x1' = k*w0*(u - x1) - w0*x2 ; x2' = w0*x1 (valid for k < 2)."""
    sigma = -0.5 * k * w0
    mu = w0 * math.sqrt(1.0 - 0.25 * k * k)
    e = math.exp(sigma * t)
    cmt, smt = math.cos(mu * t), math.sin(mu * t)
    s_over = smt / mu
    # expm(A t) = e^(sigma t) (cos(mu t) I + sin(mu t)/mu (A - sigma I))
    ad11 = e * (cmt + s_over * (-k * w0 - sigma))
    ad12 = e * (s_over * -w0)
    ad21 = e * (s_over * w0)
    ad22 = e * (cmt - s_over * sigma)
    bd1 = k * ad21
    bd2 = -k * (ad11 - 1.0) - k * k * ad21
    return ad11, ad12, ad21, ad22, bd1, bd2


@dataclass
class BaseRateState:
    pi_integ: DqPair = field(default_factory=lambda: DqPair(0.0, 0.0))
    pll_theta: float = 0.0        # angle predicted for the next execution
    pll_omega: float = TWO_PI * 60.0
    pll_integ: float = 0.0
    theta_sample: float = 0.0     # angle used at the latest execution
    # alpha and beta SOGI integrator pairs
    sogi: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    v_s_ref: AlphaBetaPair = field(default_factory=lambda: AlphaBetaPair(0.0, 0.0))
    sogi_coeffs: tuple[float, ...] = ()

    @staticmethod
    def locked(cfg: ControllerConfig, theta0: float, v_amp: float,
               pi_integ0: DqPair = DqPair(0.0, 0.0)) -> "BaseRateState":
        """State pre-locked to a balanced grid of amplitude v_amp at theta0."""
        c, s = math.cos(theta0), math.sin(theta0)
        st = BaseRateState(
            pi_integ=pi_integ0,
            pll_theta=theta0 % TWO_PI,
            pll_omega=cfg.omega_nom,
            pll_integ=0.0,
            theta_sample=theta0 % TWO_PI,
            sogi=(v_amp * c, v_amp * s, v_amp * s, -v_amp * c),
        )
        st.sogi_coeffs = _sogi_zoh(cfg.sogi_k, cfg.omega_nom, cfg.t_cpu)
        return st


def current_regulator_step(br: BaseRateState, i_dq: DqPair,
                           cfg: ControllerConfig) -> DqPair:
    """PI with cross decoupling, magnitude clamp and back-calculation
    anti-windup. Mutates the integrator; returns the saturated dq reference."""
    ed = cfg.i_ref_dq.d - i_dq.d
    eq = cfg.i_ref_dq.q - i_dq.q
    w = br.pll_omega
    ud = cfg.pi_kp * ed + br.pi_integ.d - w * cfg.l_s * i_dq.q
    uq = cfg.pi_kp * eq + br.pi_integ.q + w * cfg.l_s * i_dq.d
    norm = math.hypot(ud, uq)
    vmax = cfg.v_ref_max
    if norm > vmax:
        scale = vmax / norm
        ud_s, uq_s = ud * scale, uq * scale
    else:
        ud_s, uq_s = ud, uq
    inv_kp = 1.0 / cfg.pi_kp
    br.pi_integ = DqPair(
        br.pi_integ.d + cfg.t_cpu * cfg.pi_ki * (ed + (ud_s - ud) * inv_kp),
        br.pi_integ.q + cfg.t_cpu * cfg.pi_ki * (eq + (uq_s - uq) * inv_kp),
    )
    return DqPair(ud_s, uq_s)


def base_rate_task(br: BaseRateState, sample: ControlSample,
                   cfg: ControllerConfig) -> None:
    """One peak/valley execution: grid synchronization plus current control.

    Updates PLL and PI state in place and leaves the stationary-frame voltage
    reference in ``br.v_s_ref`` for the high-rate modulation path.
    """
    if not br.sogi_coeffs:
        br.sogi_coeffs = _sogi_zoh(cfg.sogi_k, cfg.omega_nom, cfg.t_cpu)
    a11, a12, a21, a22, b1, b2 = br.sogi_coeffs
    x1a, x2a, x1b, x2b = br.sogi
    ua, ub = sample.v_pcc
    x1a, x2a = a11 * x1a + a12 * x2a + b1 * ua, a21 * x1a + a22 * x2a + b2 * ua
    x1b, x2b = a11 * x1b + a12 * x2b + b1 * ub, a21 * x1b + a22 * x2b + b2 * ub
    br.sogi = (x1a, x2a, x1b, x2b)

    # positive sequence; the updated state refers to half a hold period past
    # the sample instant, so rotate it back into alignment
    vpa = 0.5 * (x1a - x2b)
    vpb = 0.5 * (x2a + x1b)
    lag = 0.5 * br.pll_omega * cfg.t_cpu
    cl, sl = math.cos(lag), math.sin(lag)
    vpa, vpb = vpa * cl + vpb * sl, -vpa * sl + vpb * cl

    # th is the angle predicted for this sample instant; all rotations of
    # this execution use it, then the estimate advances one period
    th = br.pll_theta
    c, s = math.cos(th), math.sin(th)
    vq = -vpa * s + vpb * c
    denom = max(math.hypot(vpa, vpb), 0.05 * cfg.v_m_nom)
    err = vq / denom
    br.pll_integ += cfg.pll_ki * err * cfg.t_cpu
    br.pll_omega = cfg.omega_nom + br.pll_integ + cfg.pll_kp * err
    br.theta_sample = th
    br.pll_theta = (th + br.pll_omega * cfg.t_cpu) % TWO_PI

    ia, ib = sample.i_s
    i_dq = DqPair(ia * c + ib * s, -ia * s + ib * c)
    v_dq = current_regulator_step(br, i_dq, cfg)
    br.v_s_ref = AlphaBetaPair(v_dq.d * c - v_dq.q * s, v_dq.d * s + v_dq.q * c)


# --------------------------------------------------------------------------
# High-rate task
# --------------------------------------------------------------------------

@dataclass
class HighRateState:
    ff_memory: AlphaBetaPair = field(default_factory=lambda: AlphaBetaPair(0.0, 0.0))
    ctr_ovs_w: int = 1            # index the next execution will read, 1..k_ovs
    u_end: bool = False
    u_ff: bool = False
    rst: bool = False
    last_disturbance: AlphaBetaPair = field(default_factory=lambda: AlphaBetaPair(0.0, 0.0))
    last_delta_i: AlphaBetaPair = field(default_factory=lambda: AlphaBetaPair(0.0, 0.0))


def feedforward_compose(v_s_ref: AlphaBetaPair, v_pcc_sample: AlphaBetaPair) -> AlphaBetaPair:
    """Output voltage reference: regulator output plus PCC feedforward."""
    return AlphaBetaPair(v_s_ref.al + v_pcc_sample.al, v_s_ref.be + v_pcc_sample.be)


def offset_injection(v_ref_abc: ThreePhase, v_dc: float) -> ThreePhase:
    """Min-max offset injection (space-vector equivalent), clamped to the rails."""
    off = -0.5 * (max(v_ref_abc) + min(v_ref_abc))
    h = 0.5 * v_dc
    return ThreePhase(*(min(h, max(-h, v + off)) for v in v_ref_abc))


def refs_to_compare(pole_refs: ThreePhase, v_dc: float, n_pwm: int) -> tuple[int, int, int]:
    """Scale pole-voltage references to carrier counts."""
    out = []
    for v in pole_refs:
        cmp = round((v / v_dc + 0.5) * n_pwm)
        out.append(0 if cmp < 0 else (n_pwm if cmp > n_pwm else cmp))
    return tuple(out)


def estimate_disturbance(hr: HighRateState, v_pcc_sample: AlphaBetaPair) -> AlphaBetaPair:
    """Grid-voltage disturbance: feedforward memory minus the fresh sample."""
    return AlphaBetaPair(hr.ff_memory.al - v_pcc_sample.al,
                         hr.ff_memory.be - v_pcc_sample.be)


def remaining_time(ctr_ovs_w: int, cfg: ControllerConfig) -> float:
    """Remaining time of the present base-rate period as budgeted by the
    detection logic (one oversampling slot is reserved for the actions of
    the current execution)."""
    if not 1 <= ctr_ovs_w <= cfg.k_ovs:
        raise ValueError("window counter out of range")
    return (1.0 - ctr_ovs_w / cfg.k_ovs) * cfg.t_cpu


def estimate_current_change(delta_v: AlphaBetaPair, t_rem: float,
                            cfg: ControllerConfig) -> AlphaBetaPair:
    """Projected current deviation if the disturbance persists for t_rem."""
    if t_rem < 0.0:
        raise ValueError("t_rem must be non-negative")
    g = t_rem / cfg.l_s
    return AlphaBetaPair(g * delta_v.al, g * delta_v.be)


def decide_reset(delta_i: AlphaBetaPair, cfg: ControllerConfig) -> bool:
    """Reset iff the projected current change strictly exceeds the threshold."""
    return math.hypot(delta_i.al, delta_i.be) > cfg.delta_i_mag


@dataclass
class HighRateResult:
    cmp: tuple[int, int, int] | None   # shadow write, None when dsdu skips it
    rst: bool
    l: int                             # window counter value this execution ran with


def high_rate_task(hr: HighRateState, br: BaseRateState, sample: ControlSample,
                   cfg: ControllerConfig, n_pwm: int,
                   at_boundary: bool) -> HighRateResult:
    """One oversampling-interrupt execution.

    In proposed mode: modulation write every slot, then the monitoring chain
    (disturbance -> projected current change -> reset decision), feedforward
    memory refresh on period end or reset, window counter bookkeeping.
    In dsdu mode only the baseline's single compare write per base period is
    produced and the monitoring chain is skipped.
    """
    l = hr.ctr_ovs_w
    v_pcc = sample.v_pcc

    if cfg.mode == "dsdu":
        cmp = None
        # "boundary": conventional scheme, one write per period from the
        # peak/valley sample. "latest": same modulation path as the proposed
        # mode (write every slot), still without monitoring or carrier shift.
        write_now = (at_boundary if cfg.dsdu_feedforward == "boundary" else True)
        if write_now:
            v_n = feedforward_compose(br.v_s_ref, v_pcc)
            pole = offset_injection(alphabeta_to_abc(v_n), cfg.v_dc)
            cmp = refs_to_compare(pole, cfg.v_dc, n_pwm)
        hr.u_end = (l == cfg.k_ovs)
        hr.u_ff = hr.u_end
        hr.rst = False
        if hr.u_ff:
            hr.ff_memory = v_pcc
        hr.ctr_ovs_w = 1 if l == cfg.k_ovs else l + 1
        return HighRateResult(cmp, False, l)

    v_n = feedforward_compose(br.v_s_ref, v_pcc)
    pole = offset_injection(alphabeta_to_abc(v_n), cfg.v_dc)
    cmp = refs_to_compare(pole, cfg.v_dc, n_pwm)

    dv = estimate_disturbance(hr, v_pcc)
    t_rem = remaining_time(l, cfg)
    di = estimate_current_change(dv, t_rem, cfg)
    rst = decide_reset(di, cfg)

    u_end = (l == cfg.k_ovs)
    u_ff = u_end or rst
    if u_ff:
        hr.ff_memory = v_pcc
    hr.ctr_ovs_w = 1 if (rst or l == cfg.k_ovs) else l + 1
    hr.u_end, hr.u_ff, hr.rst = u_end, u_ff, rst
    hr.last_disturbance = dv
    hr.last_delta_i = di
    return HighRateResult(cmp, rst, l)
