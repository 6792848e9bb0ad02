"""Scenario config files: flat INI sections overriding module defaults.

Sections are [link], [gcc], [scream], [reno] and [scenario]; keys map onto
the corresponding config dataclass fields (the [scenario] section also
carries transport and run-level knobs).  Unknown sections or keys are
errors, not warnings.
"""

from __future__ import annotations

import configparser
from dataclasses import fields, replace
from pathlib import Path

from .scenarios import ScenarioSpec
from .simcore import US_PER_MS, sec


class ConfigError(Exception):
    pass


# [link] and [scenario] keys are applied by hand; the controller sections
# map 1:1 onto dataclass fields.
LINK_KEYS = ("capacity_bps", "prop_delay_ms", "buffer_ms", "loss_rate")
SCENARIO_KEYS = (
    "duration_s",
    "seed",
    "trace_interval_ms",
    "frame_interval_ms",
    "mtu_bytes",
    "pacing_factor",
    "feedback_min_ms",
    "feedback_max_ms",
    "feedback_target_entries",
)


def _coerce(raw: str, like) -> object:
    if isinstance(like, bool):
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if isinstance(like, int):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    return raw


def _apply_dataclass(instance, section: str, items: dict[str, str]):
    known = {f.name for f in fields(instance)}
    updates = {}
    for key, raw in items.items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        try:
            updates[key] = _coerce(raw, getattr(instance, key))
        except ValueError as exc:
            raise ConfigError(f"bad value for {section}.{key}: {exc}") from exc
    return replace(instance, **updates)


def apply_config_file(spec: ScenarioSpec, path: str | Path) -> ScenarioSpec:
    """Overlay an INI file onto a built scenario; returns the updated spec."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "gcc":
            spec.gcc = _apply_dataclass(spec.gcc, section, items)
        elif section == "scream":
            spec.scream = _apply_dataclass(spec.scream, section, items)
        elif section == "reno":
            spec.reno = _apply_dataclass(spec.reno, section, items)
        elif section == "link":
            _apply_link(spec, items)
        elif section == "scenario":
            _apply_scenario(spec, items)
        else:
            raise ConfigError(f"unknown section [{section}]")
    return spec


def _apply_link(spec: ScenarioSpec, items: dict[str, str]) -> None:
    for key, raw in items.items():
        if key not in LINK_KEYS:
            raise ConfigError(f"unknown key {key!r} in section [link]")
    link = spec.link
    capacity = int(items.get("capacity_bps", link.capacity_bps))
    buffer_ms = float(items["buffer_ms"]) if "buffer_ms" in items else None
    queue_bytes = (
        int(buffer_ms * capacity / 8000) if buffer_ms is not None else link.queue_capacity_bytes
    )
    spec.link = replace(
        link,
        capacity_bps=capacity,
        prop_delay_us=round(float(items.get("prop_delay_ms", link.prop_delay_us / US_PER_MS)) * US_PER_MS),
        queue_capacity_bytes=queue_bytes,
        loss_rate=float(items.get("loss_rate", link.loss_rate)),
    )


def _apply_scenario(spec: ScenarioSpec, items: dict[str, str]) -> None:
    for key, raw in items.items():
        if key not in SCENARIO_KEYS:
            raise ConfigError(f"unknown key {key!r} in section [scenario]")
    if "duration_s" in items:
        spec.duration_us = sec(float(items["duration_s"]))
        spec.flows = [f for f in spec.flows if f.start_us < spec.duration_us]
        for flow in spec.flows:
            flow.stop_us = min(flow.stop_us, spec.duration_us)
        spec.utilization_intervals = [
            (start, min(end, spec.duration_us))
            for start, end in spec.utilization_intervals
            if start < spec.duration_us
        ]
    if "seed" in items:
        spec.seed = int(items["seed"])
    if "trace_interval_ms" in items:
        spec.trace_interval_us = round(float(items["trace_interval_ms"]) * US_PER_MS)
    if "frame_interval_ms" in items:
        spec.transport.frame_interval_us = round(float(items["frame_interval_ms"]) * US_PER_MS)
    if "mtu_bytes" in items:
        spec.transport.mtu_bytes = int(items["mtu_bytes"])
    if "pacing_factor" in items:
        spec.transport.pacing_factor = float(items["pacing_factor"])
    if "feedback_min_ms" in items:
        spec.transport.feedback.min_interval_us = round(float(items["feedback_min_ms"]) * US_PER_MS)
    if "feedback_max_ms" in items:
        spec.transport.feedback.max_interval_us = round(float(items["feedback_max_ms"]) * US_PER_MS)
    if "feedback_target_entries" in items:
        spec.transport.feedback.target_entries = int(items["feedback_target_entries"])
