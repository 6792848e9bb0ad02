import json

import pytest

from rmcatsim.cli import main as cli_main
from rmcatsim.config import ConfigError, apply_config_file
from rmcatsim.runner import (
    SUMMARY_FIELDS,
    TRACE_FIELDS,
    Runner,
    ScreamFlow,
    run_scenario,
    write_run,
)
from rmcatsim.scenarios import (
    GCC,
    RENO,
    SCREAM,
    build_scenario,
    scenario_competence,
    scenario_fairness,
    scenario_loss,
    scenario_responsiveness,
)
from rmcatsim.simcore import ms, sec


def short(spec, seconds):
    spec.duration_us = sec(seconds)
    spec.flows = [f for f in spec.flows if f.start_us < spec.duration_us]
    for flow in spec.flows:
        flow.stop_us = min(flow.stop_us, spec.duration_us)
    spec.utilization_intervals = [(0, spec.duration_us)]
    return spec


def test_scenario_shapes():
    resp = scenario_responsiveness(GCC)
    assert resp.utilization_intervals == [
        (sec(0), sec(20)),
        (sec(20), sec(40)),
        (sec(40), sec(60)),
        (sec(60), sec(80)),
        (sec(80), sec(100)),
    ]
    caps = {cap for _, cap in resp.schedule.steps}
    assert min(caps) == 500_000 and max(caps) == 2_000_000
    assert resp.schedule.integral_bits(0, sec(20)) == 40_000_000

    fair = scenario_fairness(SCREAM)
    assert [f.kind for f in fair.flows] == [SCREAM] * 3
    assert [f.start_us for f in fair.flows] == [0, sec(40), sec(80)]

    comp = scenario_competence(GCC)
    assert comp.flows[1].kind == RENO
    assert (comp.flows[1].start_us, comp.flows[1].stop_us) == (sec(20), sec(100))

    lossy = scenario_loss(GCC, 0.05)
    assert lossy.link.loss_rate == 0.05
    assert lossy.duration_us == sec(200)

    with pytest.raises(ValueError):
        build_scenario("loss", "nada")
    with pytest.raises(ValueError):
        build_scenario("bogus", GCC)


def test_flow_windows_validated():
    spec = scenario_responsiveness(GCC)
    spec.flows[0].start_us = spec.flows[0].stop_us
    with pytest.raises(ValueError):
        type(spec)(**{f: getattr(spec, f) for f in (
            "name", "link", "schedule", "flows", "duration_us", "seed")})


def test_trace_has_row_per_active_flow_per_tick():
    spec = short(scenario_fairness(GCC, seed=2), 50)
    assert len(spec.flows) == 2  # third flow would start past the horizon
    result = run_scenario(spec)
    interval = spec.trace_interval_us
    ticks = spec.duration_us // interval
    for flow in result.flows:
        first_tick = max(1, -(-flow.spec.start_us // interval))
        expected = ticks - first_tick + 1
        rows = result.traces[flow.flow_id]
        assert len(rows) == expected
        assert [r.t_us for r in rows] == [t * interval for t in range(first_tick, ticks + 1)]


def test_delay_floor_and_conservation_after_run():
    spec = short(scenario_loss(GCC, 0.02, seed=5), 15)
    result = run_scenario(spec)
    flow = result.flows[0]
    assert min(flow.owd.sizes) >= ms(100)
    assert flow.drops > 0  # random loss occurred and was attributed


def test_seeded_runs_replay_byte_identical(tmp_path):
    spec_a = short(scenario_loss(SCREAM, 0.03, seed=9), 12)
    spec_b = short(scenario_loss(SCREAM, 0.03, seed=9), 12)
    write_run(run_scenario(spec_a), tmp_path / "a")
    write_run(run_scenario(spec_b), tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["flow0_scream.csv", "meta.json", "summary.csv"]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_different_seed_changes_lossy_run(tmp_path):
    a = run_scenario(short(scenario_loss(GCC, 0.05, seed=1), 12))
    b = run_scenario(short(scenario_loss(GCC, 0.05, seed=2), 12))
    assert a.flows[0].drops != b.flows[0].drops or (
        a.flows[0].delivered.total_bytes != b.flows[0].delivered.total_bytes
    )


def test_trace_csv_schema(tmp_path):
    result = run_scenario(short(scenario_competence(GCC, seed=3), 24))
    write_run(result, tmp_path)
    flow_csv = (tmp_path / "flow0_gcc.csv").read_text().splitlines()
    assert flow_csv[0] == ",".join(TRACE_FIELDS)
    first = flow_csv[1].split(",")
    assert first[0] == "100"  # ms
    assert first[6] == ""  # no cwnd column value for a media-rate controller
    reno_csv = (tmp_path / "flow1_reno.csv").read_text().splitlines()
    assert reno_csv[1].split(",")[2] == ""  # no target rate for bulk TCP
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0] == ",".join(SUMMARY_FIELDS)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["controller"] == GCC
    assert meta["flows"][1]["kind"] == RENO


def test_window_gate_holds_at_every_send(monkeypatch):
    sent_checks = []
    original = ScreamFlow.wire_send

    def checked(self, pkt):
        sent_checks.append(
            self.cwnd.bytes_in_flight + pkt.size_bytes <= int(self.cwnd.cwnd_bytes)
        )
        return original(self, pkt)

    monkeypatch.setattr(ScreamFlow, "wire_send", checked)
    run_scenario(short(scenario_loss(SCREAM, 0.01, seed=4), 15))
    assert sent_checks and all(sent_checks)


def test_scream_feedback_bits_match_deliveries(monkeypatch):
    delivered: set[tuple[int, int]] = set()
    original_delivery = Runner._on_delivery

    def spying_delivery(self, pkt):
        delivered.add((pkt.flow_id, pkt.twcc_seq))
        return original_delivery(self, pkt)

    original_fb = ScreamFlow._on_feedback

    def checking_fb(self, fb):
        assert (self.flow_id, fb.highest_seq) in delivered
        for k in range(64):
            if fb.ack_vector >> k & 1:
                assert (self.flow_id, fb.highest_seq - 1 - k) in delivered
        return original_fb(self, fb)

    monkeypatch.setattr(Runner, "_on_delivery", spying_delivery)
    monkeypatch.setattr(ScreamFlow, "_on_feedback", checking_fb)
    run_scenario(short(scenario_loss(SCREAM, 0.05, seed=6), 12))
    assert delivered


def test_gcc_feedback_completeness_in_run():
    result = run_scenario(short(scenario_loss(GCC, 0.05, seed=8), 15))
    flow = result.flows[0]
    seen = [seq for report in flow.reports for seq, _ in report.entries]
    assert seen == list(range(len(seen)))  # every seq exactly once, in order


def test_config_overrides_and_unknown_keys(tmp_path):
    good = tmp_path / "good.ini"
    good.write_text(
        "[link]\ncapacity_bps = 1000000\nbuffer_ms = 200\n"
        "[gcc]\ninitial_rate_bps = 500000\n"
        "[scream]\nramp_up = 1.10\n"
        "[reno]\nsegment_bytes = 1000\n"
        "[scenario]\nduration_s = 30\nseed = 17\nmtu_bytes = 1000\n"
    )
    spec = apply_config_file(scenario_loss(GCC, 0.0), good)
    assert spec.link.capacity_bps == 1_000_000
    assert spec.link.queue_capacity_bytes == 25_000
    assert spec.gcc.initial_rate_bps == 500_000
    assert spec.scream.ramp_up == 1.10
    assert spec.reno.segment_bytes == 1000
    assert spec.duration_us == sec(30)
    assert spec.seed == 17
    assert spec.transport.mtu_bytes == 1000
    assert spec.utilization_intervals == [(0, sec(30))]

    fair = apply_config_file(scenario_fairness(GCC), good)
    assert len(fair.flows) == 1  # later starters fall outside the horizon
    assert fair.flows[0].stop_us == sec(30)

    bad_key = tmp_path / "bad_key.ini"
    bad_key.write_text("[gcc]\nwarp_factor = 9\n")
    with pytest.raises(ConfigError):
        apply_config_file(scenario_loss(GCC, 0.0), bad_key)

    bad_section = tmp_path / "bad_section.ini"
    bad_section.write_text("[quantum]\nfoo = 1\n")
    with pytest.raises(ConfigError):
        apply_config_file(scenario_loss(GCC, 0.0), bad_section)

    with pytest.raises(ConfigError):
        apply_config_file(scenario_loss(GCC, 0.0), tmp_path / "missing.ini")


def test_cli_run_and_report(tmp_path, capsys):
    cfg = tmp_path / "short.ini"
    cfg.write_text("[scenario]\nduration_s = 6\n")
    out = tmp_path / "runs"
    assert cli_main([
        "run", "--scenario", "loss", "--controller", "gcc",
        "--seed", "3", "--loss-rate", "0.05",
        "--out", str(out), "--config", str(cfg),
    ]) == 0
    run_dir = out / "loss_gcc_5pct"
    assert (run_dir / "summary.csv").exists()
    assert (run_dir / "flow0_gcc.csv").exists()

    assert cli_main([
        "run", "--scenario", "loss", "--controller", "scream",
        "--seed", "3", "--loss-rate", "0.05",
        "--out", str(out), "--config", str(cfg),
    ]) == 0

    assert cli_main(["report", "--in", str(out)]) == 0
    report = (out / "utilization_loss.csv").read_text().splitlines()
    assert report[0] == "controller,5%"
    assert [line.split(",")[0] for line in report[1:]] == ["gcc", "scream"]
    captured = capsys.readouterr()
    assert "utilization" in captured.out
