"""Carrier-count-resolution simulator of a grid-tied 2-level inverter with
sub-switching-period current limiting via PWM carrier shift."""

from .controller import ControllerConfig, HighRateState, BaseRateState
from .frames import AlphaBetaPair, DqPair, PerUnitBase, ThreePhase
from .plant import (FaultEvent, FaultProgram, NonFiniteState, PhaseABShort,
                    PhaseJump, PlantParams, PlantState, SymmetricSag)
from .scenarios import (Scenario, builtin_scenarios, get_scenario,
                        no_fault_scenario, scenario_plant_params)
from .scheduler import SimResult, SimSettings, Simulation, run_modes, run_single
from .traces import Metrics, compare_modes, compute_metrics, read_traces, write_traces

__version__ = "0.1.0"
