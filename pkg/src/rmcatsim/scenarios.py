"""Benchmark scenario definitions.

Four desk-scale benchmarks over one 2 Mbps / 100 ms / 75 kB bottleneck:

* responsiveness -- a single flow over a 20 s bandwidth staircase between
  500 kbps and 2 Mbps (100 s, five report intervals);
* fairness -- three same-kind flows starting at 0/40/80 s on a constant
  link (200 s);
* competence -- one media flow sharing with a greedy Reno flow active on
  [20 s, 100 s] (200 s);
* loss -- a single flow on a constant link with i.i.d. random loss
  (200 s; grid 0 / 1 / 5 %).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gcc import GccConfig
from .netmodel import BandwidthSchedule, LinkConfig, queue_bytes_for_budget
from .reno import RenoConfig
from .scream import ScreamConfig
from .simcore import SimTime, sec
from .transport import FeedbackTimingConfig

GCC = "gcc"
SCREAM = "scream"
RENO = "reno"

SCENARIO_NAMES = ("responsiveness", "fairness", "competence", "loss")
LOSS_GRID = (0.0, 0.01, 0.05)


@dataclass
class TransportConfig:
    frame_interval_us: SimTime = 20_000
    mtu_bytes: int = 1_200
    pacing_factor: float = 1.2
    feedback: FeedbackTimingConfig = field(default_factory=FeedbackTimingConfig)


@dataclass
class FlowSpec:
    kind: str
    start_us: SimTime
    stop_us: SimTime


@dataclass
class ScenarioSpec:
    name: str
    link: LinkConfig
    schedule: BandwidthSchedule
    flows: list[FlowSpec]
    duration_us: SimTime
    seed: int
    gcc: GccConfig = field(default_factory=GccConfig)
    scream: ScreamConfig = field(default_factory=ScreamConfig)
    reno: RenoConfig = field(default_factory=RenoConfig)
    transport: TransportConfig = field(default_factory=TransportConfig)
    trace_interval_us: SimTime = 100_000
    utilization_intervals: list[tuple[SimTime, SimTime]] = field(default_factory=list)

    def __post_init__(self) -> None:
        for flow in self.flows:
            if not flow.start_us < flow.stop_us <= self.duration_us:
                raise ValueError("flow start must precede stop, within the run duration")


def default_link(capacity_bps: int = 2_000_000, loss_rate: float = 0.0) -> LinkConfig:
    """2 Mbps, 100 ms one-way, 300 ms buffer budget at the nominal rate."""
    return LinkConfig(
        capacity_bps=capacity_bps,
        prop_delay_us=100_000,
        queue_capacity_bytes=queue_bytes_for_budget(300, capacity_bps),
        loss_rate=loss_rate,
    )


def scenario_responsiveness(controller: str = GCC, seed: int = 1) -> ScenarioSpec:
    steps = (
        (sec(0), 2_000_000),
        (sec(20), 1_000_000),
        (sec(40), 500_000),
        (sec(60), 1_000_000),
        (sec(80), 2_000_000),
    )
    duration = sec(100)
    return ScenarioSpec(
        name="responsiveness",
        link=default_link(),
        schedule=BandwidthSchedule(steps),
        flows=[FlowSpec(controller, 0, duration)],
        duration_us=duration,
        seed=seed,
        utilization_intervals=[(sec(20 * i), sec(20 * (i + 1))) for i in range(5)],
    )


def scenario_fairness(controller: str = GCC, seed: int = 1) -> ScenarioSpec:
    duration = sec(200)
    return ScenarioSpec(
        name="fairness",
        link=default_link(),
        schedule=BandwidthSchedule.constant(2_000_000),
        flows=[
            FlowSpec(controller, sec(0), duration),
            FlowSpec(controller, sec(40), duration),
            FlowSpec(controller, sec(80), duration),
        ],
        duration_us=duration,
        seed=seed,
        utilization_intervals=[(0, duration)],
    )


def scenario_competence(controller: str = GCC, seed: int = 1) -> ScenarioSpec:
    duration = sec(200)
    return ScenarioSpec(
        name="competence",
        link=default_link(),
        schedule=BandwidthSchedule.constant(2_000_000),
        flows=[
            FlowSpec(controller, sec(0), duration),
            FlowSpec(RENO, sec(20), sec(100)),
        ],
        duration_us=duration,
        seed=seed,
        utilization_intervals=[(0, sec(20)), (sec(20), sec(100)), (sec(100), duration)],
    )


def scenario_loss(controller: str = GCC, loss_rate: float = 0.0, seed: int = 1) -> ScenarioSpec:
    duration = sec(200)
    return ScenarioSpec(
        name="loss",
        link=default_link(loss_rate=loss_rate),
        schedule=BandwidthSchedule.constant(2_000_000),
        flows=[FlowSpec(controller, 0, duration)],
        duration_us=duration,
        seed=seed,
        utilization_intervals=[(0, duration)],
    )


def build_scenario(
    name: str, controller: str, seed: int = 1, loss_rate: float = 0.0
) -> ScenarioSpec:
    if controller not in (GCC, SCREAM):
        raise ValueError(f"unknown controller {controller!r}")
    if name == "responsiveness":
        return scenario_responsiveness(controller, seed)
    if name == "fairness":
        return scenario_fairness(controller, seed)
    if name == "competence":
        return scenario_competence(controller, seed)
    if name == "loss":
        return scenario_loss(controller, loss_rate, seed)
    raise ValueError(f"unknown scenario {name!r}")
