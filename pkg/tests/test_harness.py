"""Experiment harness: sweeps, scenario driver, CSV output, CLI."""

import io
import json

import pytest

from vdn import calibration as cal
from vdn.harness import (MULTIHOP_FREQS, SweepConfig, cli_main,
                         default_distance_config, default_sweep_config,
                         eavesdrop_map, multihop_experiment, run_scenario,
                         schedule_frequencies, sweep_distance,
                         sweep_frequency, write_csv, _derive_seed)
from vdn.vdnctl import two_beam_topology

SINGLE_BEAM = {
    "beams": [{"id": "b1", "noise_rms": 0.0}],
    "nodes": [
        {"id": "mon-1", "role": "monitor", "beam": "b1", "position_mm": 50.0},
        {"id": "col-1", "role": "collector", "beam": "b1",
         "position_mm": 530.0},
    ],
    "relays": [],
}


# --- schedules and configs -------------------------------------------------------

def test_schedule_covers_band_and_beyond():
    freqs = schedule_frequencies()
    assert len(freqs) == 50
    assert freqs[0] == 50.0 and freqs[44] == 4450.0
    assert all(b - a == 100.0 for a, b in zip(freqs[:44], freqs[1:45]))
    assert freqs[45:] == (4500.0, 5000.0, 7500.0, 10_000.0, 20_000.0)


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(())
    with pytest.raises(ValueError):
        SweepConfig((3000.0,), tap_positions_mm=())
    with pytest.raises(ValueError):
        SweepConfig((3000.0,), trials=0)
    with pytest.raises(ValueError):
        SweepConfig((-5.0,))


def test_derive_seed_is_stable_and_label_sensitive():
    assert _derive_seed(1, "a").entropy == _derive_seed(1, "a").entropy
    assert _derive_seed(1, "a").entropy != _derive_seed(1, "b").entropy
    assert _derive_seed(1, "a").entropy != _derive_seed(2, "a").entropy


# --- frequency sweep ---------------------------------------------------------------

def test_sweep_frequency_rows_and_determinism():
    config = SweepConfig((3000.0, 7500.0), (550.0,), trials=2, seed=9)
    rows = sweep_frequency(config)
    assert [(r["frequency_hz"], r["tap_mm"]) for r in rows] == [
        (3000.0, 550.0), (3000.0, 550.0), (7500.0, 550.0), (7500.0, 550.0)]
    assert rows == sweep_frequency(config)
    for row in rows[:2]:
        assert row["percent_error"] <= 5.0
    for row in rows[2:]:
        assert row["detected_hz"] == 2500.0          # Nyquist fold


def test_sweep_frequency_low_band_fails():
    rows = sweep_frequency(SweepConfig((300.0,), (550.0,), trials=3, seed=1))
    assert all(row["percent_error"] > 5.0 or row["detected_hz"] == 0.0
               for row in rows)


def test_default_sweep_config_uses_the_schedule():
    config = default_sweep_config(seed=4)
    assert config.frequencies_hz == schedule_frequencies()
    assert config.tap_positions_mm == (cal.NEAR_TAP_MM, cal.FAR_TAP_MM)
    assert config.seed == 4


# --- distance sweep -----------------------------------------------------------------

def test_sweep_distance_orders_and_decays():
    rows = sweep_distance(default_distance_config())
    assert len(rows) == 33
    by_boundary = {}
    for row in rows:
        by_boundary.setdefault(row["boundary"], []).append(row["magnitude"])
    assert set(by_boundary) == {"supported", "clamped_at_ends",
                                "constrained_throughout"}
    flat = by_boundary["constrained_throughout"]
    assert all(a >= b for a, b in zip(flat, flat[1:]))
    assert flat[0] == max(flat)
    sup = by_boundary["supported"]
    assert any(sup[i] > sup[i - 1] and sup[i] > sup[i + 1]
               for i in range(1, len(sup) - 1))


def test_sweep_distance_requires_single_frequency():
    with pytest.raises(ValueError):
        sweep_distance(SweepConfig((3000.0, 4000.0)))


# --- multihop ------------------------------------------------------------------------

def test_multihop_keeps_frequency_across_the_hop():
    rows = multihop_experiment()
    assert len(rows) == 12
    assert [r["sent_hz"] for r in rows[::2]] == list(MULTIHOP_FREQS)
    one_bin = cal.ADC_RATE_HZ / cal.DEFAULT_WINDOW
    for original, hop in zip(rows[::2], rows[1::2]):
        assert original["stage"] == "original" and hop["stage"] == "hop"
        assert abs(original["detected_hz"] - original["sent_hz"]) <= one_bin
        assert abs(hop["detected_hz"] - hop["sent_hz"]) <= one_bin


def test_multihop_noise_breaks_the_hop():
    import dataclasses

    import numpy as np

    from vdn.medium import MediumSpec, TapPoint, propagate
    from vdn.modem import NoSignal, relay_hop
    from vdn.transducer import AdcSpec, ToneSpec, sample, synthesize
    from vdn.waveform import Waveform

    # Sub-threshold capture (no tone at all): nothing to regenerate.
    rng = np.random.default_rng(0)
    quiet = Waveform(rng.normal(0.0, 0.01, 1200), 10_000.0)
    assert isinstance(relay_hop(quiet), NoSignal)

    # A drowned first beam: whatever the relay makes of the racket, the
    # sent tone does not survive the hop.
    loud = dataclasses.replace(MediumSpec(), noise_rms=50.0)
    wave = synthesize(ToneSpec(3500.0, cal.SWEEP_TONE_MS, 1.0))
    heard = sample(propagate(wave, loud, TapPoint(0.0),
                             TapPoint(cal.FAR_TAP_MM), seed=0), AdcSpec())
    regen = relay_hop(heard)
    assert isinstance(regen, NoSignal) or regen.frequency_hz != 3500.0


# --- eavesdrop -------------------------------------------------------------------------

def test_eavesdrop_map_covers_reachable_beams():
    rows = eavesdrop_map(two_beam_topology(), "mon-1")
    assert len(rows) == 126                       # 63 taps on each beam
    assert rows[0]["tap_mm"] == 0.0
    # Tap 50 mm on beam one is the probe source itself.
    source_row = next(r for r in rows if r["tap_mm"] == 50.0)
    assert source_row["above_threshold"] is True


def test_eavesdrop_has_hidden_dips_between_audible_taps():
    rows = eavesdrop_map(two_beam_topology(), "mon-1")[:63]
    flags = [r["above_threshold"] for r in rows]
    hidden = [i for i in range(1, 62) if not flags[i]]
    assert hidden, "expected at least one interior dip below the threshold"
    assert any(flags[i - 1] or flags[i + 1] for i in hidden)


def test_eavesdrop_zero_threshold_hears_everything():
    rows = eavesdrop_map(two_beam_topology(), "mon-1", threshold=0.0)
    assert all(r["above_threshold"] for r in rows)


def test_eavesdrop_requires_monitor_source():
    from vdn.errors import RoleViolationError
    with pytest.raises(RoleViolationError):
        eavesdrop_map(two_beam_topology(), "col-1")


# --- scenarios ----------------------------------------------------------------------

def test_run_scenario_heartbeat_watchdog(tmp_path):
    config = {
        "topology": SINGLE_BEAM,
        "heartbeat": {"node": "mon-1", "period_ms": 500.0, "count": 3,
                      "grace_factor": 1.5},
        "horizon_ms": 4000.0,
    }
    result = run_scenario(config, seed=0)
    beats = [r for r in result["reports"] if r.event.name == "heartbeat"]
    assert len(beats) == 3
    transitions = result["transitions"]
    assert [t.state for t in transitions] == ["down"]
    last_beat = max(r.sim_time_ms for r in beats)
    assert transitions[0].sim_time_ms == last_beat + 750.0


def test_run_scenario_flows_to_ddos_actions(tmp_path):
    flows = tmp_path / "flows.csv"
    flows.write_text("src,dst,bytes,timestamp_ms\n"
                     "s1,D,120,10\n"
                     "s2,D,150,20\n"
                     "s3,D,200,30\n")
    config = {
        "topology": SINGLE_BEAM,
        "flows_csv": str(flows),
        "heavy_hitter": {"threshold_bytes": 100, "window_ms": 1000.0},
        "ddos": {"distinct_sources": 3, "window_ms": 10_000.0},
        "horizon_ms": 8000.0,
    }
    result = run_scenario(config, seed=0)
    hitters = [r for r in result["reports"] if r.event.name == "heavy-hitter"]
    assert len(hitters) == 3
    assert [r.payload for r in hitters] == [b"s1>D", b"s2>D", b"s3>D"]
    assert len(result["alerts"]) == 1
    assert sorted(a.target for a in result["actions"]) == ["s1", "s2", "s3"]


def test_run_scenario_trace_on_default_topology():
    result = run_scenario({"trace": True, "horizon_ms": 1000.0}, seed=0)
    assert result["path"] == ["mon-1", "rel-1", "col-1"]


def test_run_scenario_flows_require_heavy_hitter_config(tmp_path):
    flows = tmp_path / "flows.csv"
    flows.write_text("src,dst,bytes,timestamp_ms\n")
    with pytest.raises(ValueError):
        run_scenario({"topology": SINGLE_BEAM, "flows_csv": str(flows)})


# --- CSV ----------------------------------------------------------------------------

def test_write_csv_formats_cells():
    out = io.StringIO()
    write_csv(out, ["a", "b", "c", "d"],
              [{"a": True, "b": False, "c": 0.123456789, "d": 3000.0}])
    assert out.getvalue() == "a,b,c,d\ntrue,false,0.123457,3000\n"


# --- CLI ----------------------------------------------------------------------------

def _tiny_sweep_config(tmp_path, **extra):
    doc = {"frequencies_hz": [3000.0], "tap_positions_mm": [550.0],
           "trials": 2, "seed": 5}
    doc.update(extra)
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_cli_sweep_freq_is_deterministic(tmp_path):
    config = _tiny_sweep_config(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli_main(["sweep-freq", "--config", config, "--out", str(a)]) == 0
    assert cli_main(["sweep-freq", "--config", config, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "frequency_hz,tap_mm,detected_hz,percent_error,magnitude"
    assert len(lines) == 3


def test_cli_seed_precedence(tmp_path, monkeypatch):
    config = _tiny_sweep_config(tmp_path)
    outs = {}
    for name, argv, env in [
        ("config", ["sweep-freq", "--config", config], None),
        ("flag", ["sweep-freq", "--config", config, "--seed", "99"], None),
        ("env", ["sweep-freq", "--config", config], "99"),
        ("flag-beats-env", ["sweep-freq", "--config", config,
                            "--seed", "99"], "7"),
    ]:
        if env is None:
            monkeypatch.delenv("VDN_SEED", raising=False)
        else:
            monkeypatch.setenv("VDN_SEED", env)
        path = tmp_path / f"{name}.csv"
        assert cli_main(argv + ["--out", str(path)]) == 0
        outs[name] = path.read_bytes()
    assert outs["flag"] == outs["env"] == outs["flag-beats-env"]
    assert outs["config"] != outs["flag"]        # config seed 5 vs explicit 99


def test_cli_multihop_row_count(tmp_path):
    out = tmp_path / "hops.csv"
    assert cli_main(["multihop", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "sent_hz,stage,detected_hz,magnitude"
    assert len(lines) == 13                      # 6 frequencies x 2 stages


def test_cli_sweep_dist_row_count(tmp_path):
    out = tmp_path / "dist.csv"
    assert cli_main(["sweep-dist", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "tap_mm,boundary,magnitude"
    assert len(lines) == 34


def test_cli_eavesdrop_row_count(tmp_path):
    out = tmp_path / "eve.csv"
    assert cli_main(["eavesdrop", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 127


def test_cli_run_scenario_and_action_log(tmp_path):
    flows = tmp_path / "flows.csv"
    flows.write_text("src,dst,bytes,timestamp_ms\n"
                     "s1,D,120,10\n"
                     "s2,D,150,20\n"
                     "s3,D,200,30\n")
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps({
        "topology": SINGLE_BEAM,
        "flows_csv": str(flows),
        "heavy_hitter": {"threshold_bytes": 100, "window_ms": 1000.0},
        "ddos": {"distinct_sources": 3, "window_ms": 10_000.0},
        "horizon_ms": 8000.0,
    }))
    out = tmp_path / "reports.csv"
    log = tmp_path / "actions.jsonl"
    assert cli_main(["run", "--config", str(scenario), "--out", str(out),
                     "--action-log", str(log)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "event,node,sim_time_ms,payload_hex,frame_error"
    assert len(lines) == 4
    actions = [json.loads(line) for line in log.read_text().splitlines()]
    assert sorted(a["target"] for a in actions) == ["s1", "s2", "s3"]
    assert all(a["kind"] == "block-source" and a["reason"] == "ddos-alert"
               for a in actions)


def test_cli_run_requires_config():
    assert cli_main(["run"]) == 2


def test_cli_unknown_subcommand_exits_2(capsys):
    assert cli_main(["frobnicate"]) == 2
    assert cli_main([]) == 2
    capsys.readouterr()


def test_cli_northbound_serves_stdio(tmp_path, monkeypatch):
    topo = tmp_path / "topo.json"
    topo.write_text(json.dumps(two_beam_topology(noise_rms=0.0).to_dict()))
    script = "\n".join([
        json.dumps({"op": "load-topology", "path": str(topo)}),
        json.dumps({"op": "emit", "node": "mon-1", "event": "heartbeat"}),
        json.dumps({"op": "run", "horizon_ms": 3000}),
        json.dumps({"op": "poll-reports"}),
    ]) + "\n"
    monkeypatch.setattr("sys.stdin", io.StringIO(script))
    fake_out = io.StringIO()
    monkeypatch.setattr("sys.stdout", fake_out)
    assert cli_main(["northbound"]) == 0
    replies = [json.loads(line) for line in fake_out.getvalue().splitlines()]
    assert all(r["ok"] for r in replies)
    assert len(replies[-1]["result"]["reports"]) == 1
