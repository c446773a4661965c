"""Packet-level simulator for DSR and its energy saving and survival variant."""

from .engine import EventQueue, RngStream, uniform_jitter
from .essdsr import EnergyJitterParams, check_low_energy, energy_jitter
from .radio import EnergyAccount, Position, RadioParams
from .scenario import Scenario, ScenarioError, load_scenario, paper_default
from .sim import Comparison, RunReport, Simulation, compare, run
from .traffic import compute_network_lifetime, compute_node_lifetimes

__all__ = [
    "Comparison", "EnergyAccount", "EnergyJitterParams", "EventQueue", "Position",
    "RadioParams", "RngStream", "RunReport", "Scenario", "ScenarioError", "Simulation",
    "check_low_energy", "compare", "compute_network_lifetime", "compute_node_lifetimes",
    "energy_jitter", "load_scenario", "paper_default", "run", "uniform_jitter",
]
__version__ = "0.1.0"
