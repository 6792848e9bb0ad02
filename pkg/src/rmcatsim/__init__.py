"""Deterministic simulator for delay-based RTP congestion control."""

from .gcc import GccConfig, GccController
from .netmodel import BandwidthSchedule, Link, LinkConfig
from .reno import RenoConfig, RenoSender
from .runner import RunResult, run_scenario, write_run
from .scenarios import ScenarioSpec, build_scenario
from .scream import CwndController, ScreamConfig
from .simcore import RngStream, SimTime, Simulator

__version__ = "0.1.0"

__all__ = [
    "BandwidthSchedule",
    "CwndController",
    "GccConfig",
    "GccController",
    "Link",
    "LinkConfig",
    "RenoConfig",
    "RenoSender",
    "RngStream",
    "RunResult",
    "ScenarioSpec",
    "ScreamConfig",
    "SimTime",
    "Simulator",
    "build_scenario",
    "run_scenario",
    "write_run",
]
