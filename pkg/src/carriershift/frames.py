"""Reference-frame transforms and per-unit bases shared by all modules.

Conventions: amplitude-invariant Clarke scaling (2/3), so the alpha-beta
vector norm of a balanced three-phase set equals the phase peak. The
per-unit current base is therefore the phase peak of the rated current,
which puts the rated steady-state envelope at exactly 1.0 p.u.
"""

from __future__ import annotations

import math
from typing import NamedTuple

SQRT3 = math.sqrt(3.0)

# Rated operating point: 220 V line-to-line rms, 15 A rated line current (rms).
GRID_VLL_RMS = 220.0
RATED_CURRENT_RMS = 15.0
V_PHASE_PEAK = GRID_VLL_RMS * math.sqrt(2.0) / SQRT3   # 179.63 V
I_PHASE_PEAK = RATED_CURRENT_RMS * math.sqrt(2.0)      # 21.213 A


class ThreePhase(NamedTuple):
    a: float
    b: float
    c: float


class AlphaBetaPair(NamedTuple):
    al: float
    be: float


class DqPair(NamedTuple):
    d: float
    q: float


class PerUnitBase(NamedTuple):
    v_base: float   # phase peak volts
    i_base: float   # phase peak amperes
    z_base: float   # ohms


def make_per_unit_base(v_base: float, i_base: float) -> PerUnitBase:
    """Build a consistent per-unit base; z_base is derived as v_base/i_base."""
    if v_base <= 0.0 or i_base <= 0.0:
        raise ValueError("per-unit bases must be positive")
    return PerUnitBase(v_base, i_base, v_base / i_base)


def default_base() -> PerUnitBase:
    return make_per_unit_base(V_PHASE_PEAK, I_PHASE_PEAK)


def abc_to_alphabeta(x: ThreePhase) -> AlphaBetaPair:
    """Amplitude-invariant Clarke transform. Zero sequence is discarded."""
    return AlphaBetaPair((2.0 * x[0] - x[1] - x[2]) / 3.0, (x[1] - x[2]) / SQRT3)


def alphabeta_to_abc(x: AlphaBetaPair) -> ThreePhase:
    """Inverse Clarke for zero-sequence-free sets."""
    al, be = x
    return ThreePhase(al, 0.5 * (-al + SQRT3 * be), 0.5 * (-al - SQRT3 * be))


def alphabeta_to_dq(x: AlphaBetaPair, theta: float) -> DqPair:
    c, s = math.cos(theta), math.sin(theta)
    return DqPair(x[0] * c + x[1] * s, -x[0] * s + x[1] * c)


def dq_to_alphabeta(x: DqPair, theta: float) -> AlphaBetaPair:
    c, s = math.cos(theta), math.sin(theta)
    return AlphaBetaPair(x[0] * c - x[1] * s, x[0] * s + x[1] * c)


def l2_norm(x: AlphaBetaPair) -> float:
    return math.hypot(x[0], x[1])
