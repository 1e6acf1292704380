"""Bit-faithful emulation of the PWM peripheral.

Up-down carrier counter with shadow/active compare registers that load at
peaks and valleys, a separate up-down oversampling interrupt counter, and a
forced reset of both counters to their peak values with an immediate
shadow-to-active load.

Tick semantics (the contract the batched ``advance`` must honor exactly):
each tick moves both counters by one count in their current direction; on
reaching an extremum the direction flips and the event fires at that tick;
carrier extrema also copy shadow into active. The upper gate of a phase is
on during a tick interval iff ``ctr < active_cmp`` evaluated after any load
at that tick (ties mean off).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CarrierState:
    ctr: int
    dir: int          # +1 counting up, -1 counting down
    n_pwm: int        # carrier peak [counts]
    t_clk: float      # seconds per count

    def ticks_to_extremum(self) -> int:
        return (self.n_pwm - self.ctr) if self.dir > 0 else self.ctr


@dataclass
class OvsCounter:
    ctr: int
    dir: int
    n_ovs: int

    def ticks_to_extremum(self) -> int:
        return (self.n_ovs - self.ctr) if self.dir > 0 else self.ctr


@dataclass
class CompareBank:
    shadow: tuple[int, int, int] = (0, 0, 0)
    active: tuple[int, int, int] = (0, 0, 0)


@dataclass
class PwmEvents:
    """Events from one ``advance`` call; offsets count ticks from the start
    of the batch, in [1, n_ticks]. A gate toggle at offset o takes effect
    for tick intervals beginning at o."""
    peaks: list[int] = field(default_factory=list)
    valleys: list[int] = field(default_factory=list)
    ovs_interrupts: list[int] = field(default_factory=list)
    toggles: list[tuple[int, int, bool]] = field(default_factory=list)  # (offset, phase, on)


class PwmEngine:
    """One PWM peripheral instance. Single-owner, strictly sequential."""

    def __init__(self, n_pwm: int = 28560, k_ovs: int = 15,
                 t_clk: float = (1.0 / 7000.0) / 28560):
        if n_pwm < 2:
            raise ValueError("n_pwm too small")
        if k_ovs < 1 or n_pwm % k_ovs:
            raise ValueError("n_pwm must be an exact multiple of k_ovs")
        self.carrier = CarrierState(ctr=n_pwm, dir=-1, n_pwm=n_pwm, t_clk=t_clk)
        self.ovs = OvsCounter(ctr=n_pwm // k_ovs, dir=-1, n_ovs=n_pwm // k_ovs)
        self.bank = CompareBank()
        self.k_ovs = k_ovs

    @property
    def n_pwm(self) -> int:
        return self.carrier.n_pwm

    @property
    def n_ovs(self) -> int:
        return self.ovs.n_ovs

    def write_shadow(self, cmp3) -> None:
        """Replace shadow registers, saturating out-of-range values."""
        n = self.carrier.n_pwm
        self.bank.shadow = tuple(0 if v < 0 else (n if v > n else int(v)) for v in cmp3)

    def force_reset(self) -> None:
        """Jump both counters to their peaks (counting down) and load active
        from shadow immediately. Gate states may change; callers should
        re-query ``gate_states`` afterwards."""
        self.carrier.ctr = self.carrier.n_pwm
        self.carrier.dir = -1
        self.ovs.ctr = self.ovs.n_ovs
        self.ovs.dir = -1
        self.bank.active = self.bank.shadow

    def gate_states(self) -> tuple[int, int, int]:
        c = self.carrier.ctr
        a = self.bank.active
        return (1 if c < a[0] else 0, 1 if c < a[1] else 0, 1 if c < a[2] else 0)

    def advance(self, n_ticks: int) -> PwmEvents:
        """Advance both counters by n_ticks with batched arithmetic that is
        tick-for-tick equivalent to the semantics in the module docstring."""
        if n_ticks < 1:
            raise ValueError("n_ticks must be >= 1")
        ev = PwmEvents()
        car, ovs, bank = self.carrier, self.ovs, self.bank
        off = 0
        remaining = n_ticks
        while remaining > 0:
            seg = min(remaining, car.ticks_to_extremum(), ovs.ticks_to_extremum())
            c0 = car.ctr
            d = car.dir
            c_end = c0 + d * seg
            car_hits_extremum = (seg == car.ticks_to_extremum())
            m_old = bank.active
            m_final = bank.shadow if car_hits_extremum else m_old

            for ph in range(3):
                m = m_old[ph]
                # at most one compare crossing strictly inside the segment
                if d > 0:
                    if c0 < m <= c0 + (seg - 1):
                        ev.toggles.append((off + (m - c0), ph, False))
                else:
                    if c0 - (seg - 1) <= m - 1 < c0:
                        ev.toggles.append((off + (c0 - m + 1), ph, True))
                # final tick of the segment, evaluated with the post-load active
                g_before = (c0 + d * (seg - 1)) < m
                g_end = c_end < m_final[ph]
                if g_end != g_before:
                    ev.toggles.append((off + seg, ph, g_end))

            car.ctr = c_end
            ovs.ctr += ovs.dir * seg
            off += seg
            remaining -= seg

            if car_hits_extremum:
                if d > 0:
                    ev.peaks.append(off)
                else:
                    ev.valleys.append(off)
                bank.active = bank.shadow
                car.dir = -d
            if ovs.ctr == ovs.n_ovs and ovs.dir > 0:
                ev.ovs_interrupts.append(off)
                ovs.dir = -1
            elif ovs.ctr == 0 and ovs.dir < 0:
                ev.ovs_interrupts.append(off)
                ovs.dir = 1
        return ev
