import json
import math
from concurrent.futures import ThreadPoolExecutor
import pytest

from carriershift.cli import main as cli_main
from carriershift.controller import ControllerConfig
from carriershift.plant import (FaultProgram, FaultEvent, PhaseABShort,
                                PhaseJump, SymmetricSag)
from carriershift.scenarios import (Scenario, apply_overrides,
                                    builtin_scenarios, get_scenario,
                                    scenario_from_file, scenario_plant_params)
from carriershift.scheduler import (SimSettings, Simulation,
                                    align_shift_seconds, run_modes, run_single)
from carriershift.traces import (Metrics, compare_modes, compute_metrics,
                                 read_traces, write_traces, TRACE_HEADER)

FAST = SimSettings(preroll_cycles=1)
PARAMS = scenario_plant_params()


def short_run(mode="proposed", duration=0.004, settings=FAST, program=None,
              cfg=None, name="short"):
    cfg = cfg or ControllerConfig(mode=mode)
    return run_single(name, program or FaultProgram(), duration, PARAMS, cfg,
                      settings=settings)


# --------------------------------------------------------------------------
# scenario catalog
# --------------------------------------------------------------------------

def test_builtin_scenarios_contract():
    scenarios = {s.name: s for s in builtin_scenarios()}
    assert len(scenarios) == 4
    sag = scenarios["sym_sag_90"].fault.events[0]
    assert (sag.t_start, sag.t_end) == (0.0, 0.12)
    assert isinstance(sag.kind, SymmetricSag) and sag.kind.depth == 0.9
    neg = scenarios["jump_neg60"].fault.events[0]
    assert isinstance(neg.kind, PhaseJump)
    assert neg.kind.delta == pytest.approx(-math.pi / 3)
    assert isinstance(scenarios["ab_short"].fault.events[0].kind, PhaseABShort)
    assert isinstance(scenarios["jump_pos60"].fault.events[0].kind, PhaseJump)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario("bad", FaultProgram((FaultEvent(0.0, 0.5, SymmetricSag(0.5)),)),
                 duration=0.1)
    with pytest.raises(KeyError):
        get_scenario("nope")


def test_scenario_from_ini(tmp_path):
    path = tmp_path / "case.ini"
    path.write_text(
        "[scenario]\nname = my_case\nduration = 0.05\nmode = proposed\n"
        "[event.1]\nkind = symmetric_sag\ndepth = 0.4\nt_start = 0.01\nt_end = 0.03\n"
        "[plant]\nl_g = 2e-6\n"
        "[controller]\ndelta_i_mag = 1.5\n")
    sc = scenario_from_file(str(path))
    assert sc.name == "my_case" and sc.duration == 0.05 and sc.mode == "proposed"
    ev = sc.fault.events[0]
    assert isinstance(ev.kind, SymmetricSag) and ev.kind.depth == 0.4
    params, cfg = apply_overrides(scenario_plant_params(), ControllerConfig(),
                                  sc.overrides)
    assert params.l_g == 2e-6
    assert cfg.delta_i_mag == 1.5


def test_apply_overrides_rejects_unknown_keys():
    with pytest.raises(KeyError):
        apply_overrides(scenario_plant_params(), ControllerConfig(),
                        {"plant.bogus": "1"})


# --------------------------------------------------------------------------
# traces io
# --------------------------------------------------------------------------

def test_empty_trace_writes_header_only(tmp_path):
    p = tmp_path / "empty.csv"
    write_traces([], str(p))
    assert p.read_text() == ",".join(TRACE_HEADER) + "\n"


def test_trace_line_count_and_round_trip(tmp_path):
    res = short_run(duration=0.002)
    p = tmp_path / "t.csv"
    write_traces(res.rows, str(p))
    lines = p.read_text().splitlines()
    assert len(lines) == len(res.rows) + 1
    back = read_traces(str(p))
    assert len(back) == len(res.rows)
    for got, want in zip(back, res.rows):
        for g, w in zip(got, want):
            if isinstance(g, int):
                assert g == w
            else:
                assert g == pytest.approx(w, rel=1e-8, abs=1e-12)


def test_trace_time_strictly_increasing():
    res = short_run(duration=0.002)
    ts = [r[0] for r in res.rows]
    assert all(b > a for a, b in zip(ts, ts[1:]))


def test_read_traces_rejects_wrong_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_traces(str(p))


# --------------------------------------------------------------------------
# scheduler properties
# --------------------------------------------------------------------------

def test_determinism_byte_identical(tmp_path):
    prog = FaultProgram((FaultEvent(0.0, 0.004, SymmetricSag(0.9)),))
    p1, p2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    write_traces(short_run(duration=0.006, program=prog).rows, str(p1))
    write_traces(short_run(duration=0.006, program=prog).rows, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_resume_equals_one_shot():
    prog = FaultProgram((FaultEvent(0.0, 0.003, SymmetricSag(0.9)),))
    cfg = ControllerConfig(mode="proposed")
    whole = Simulation("x", prog, 0.005, PARAMS, cfg, FAST)
    whole.run_to_end()
    stepped = Simulation("x", prog, 0.005, PARAMS, cfg, FAST)
    stepped.run_until_tick(0)
    stepped.run_to_end()
    assert whole.rows == stepped.rows
    assert whole.resets == stepped.resets


def test_parallel_scenarios_match_serial():
    progs = {
        "sag": FaultProgram((FaultEvent(0.0, 0.003, SymmetricSag(0.9)),)),
        "jump": FaultProgram((FaultEvent(0.0, 0.005, PhaseJump(0.5)),)),
    }
    serial = {k: short_run(duration=0.005, program=p, name=k).rows
              for k, p in progs.items()}
    with ThreadPoolExecutor(max_workers=2) as pool:
        futs = {k: pool.submit(short_run, duration=0.005, program=p, name=k)
                for k, p in progs.items()}
        parallel = {k: f.result().rows for k, f in futs.items()}
    assert serial == parallel


def test_fault_alignment_quantized_to_plant_steps():
    cfg = ControllerConfig()
    s = SimSettings()
    step = (s.n_pwm // cfg.k_ovs) // s.steps_per_ovs * (cfg.t_cpu / s.n_pwm)
    for frac in [0.0, 0.1, 0.5, 0.999]:
        shift = align_shift_seconds(frac, cfg, s)
        assert shift / step == pytest.approx(round(shift / step), abs=1e-9)
    with pytest.raises(ValueError):
        align_shift_seconds(1.0, cfg, s)


def test_forced_load_uses_same_execution_shadow_write():
    prog = FaultProgram((FaultEvent(0.0, 0.004, SymmetricSag(0.9)),))
    res = short_run(duration=0.006, program=prog, settings=SimSettings())
    assert res.resets, "expected at least one carrier reset"
    loads = dict(res.loads)  # tick -> active triple (last load at that tick)
    by_time = {round(tel.t, 12): tel for tel in res.telemetry}
    for tick in res.resets:
        tel = by_time[round(tick * res.t_clk, 12)]
        assert loads[tick] == (tel.cmp_a, tel.cmp_b, tel.cmp_c)


def test_loads_only_at_carrier_extrema_without_reset():
    res = short_run(duration=0.004)
    assert not res.resets
    ticks = [t for t, _ in res.loads]
    n_pwm = SimSettings().n_pwm
    assert all((b - a) == n_pwm for a, b in zip(ticks, ticks[1:]))


def test_run_modes_returns_independent_results():
    prog = FaultProgram((FaultEvent(0.0, 0.003, SymmetricSag(0.9)),))
    out = run_modes("pair", prog, 0.005, PARAMS, ControllerConfig(),
                    ("dsdu", "proposed"), settings=FAST)
    assert set(out) == {"dsdu", "proposed"}
    assert out["proposed"].resets and not out["dsdu"].resets


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------

def test_compare_modes_reduction():
    a = Metrics(1.5, 0.01, 0, None, 0.001)
    b = Metrics(1.0, 0.02, 3, 1e-5, 0.001)
    cmp = compare_modes(a, b)
    assert cmp["peak_reduction_pu"] == pytest.approx(0.5)
    assert cmp["peak_reduction_pct"] == pytest.approx(100 * 0.5 / 1.5)
    same = compare_modes(a, a)
    assert same["peak_reduction_pu"] == 0.0


def test_no_fault_metrics():
    res = short_run(duration=0.004, settings=SimSettings())
    m = compute_metrics(res)
    assert m.rst_count == 0
    assert m.reaction_latency is None
    assert m.steady_state_current_error_pu < 0.02


# --------------------------------------------------------------------------
# command line
# --------------------------------------------------------------------------

def _ini(tmp_path, body):
    p = tmp_path / "case.ini"
    p.write_text(body)
    return str(p)


def test_cli_list_scenarios(capsys):
    assert cli_main(["run", "--list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("sym_sag_90", "ab_short", "jump_neg60", "jump_pos60"):
        assert name in out


def test_cli_runs_scenario_file(tmp_path, capsys):
    ini = _ini(tmp_path, "[scenario]\nname = mini\nduration = 0.002\nmode = proposed\n")
    out_dir = tmp_path / "out"
    rc = cli_main(["run", "--scenario", ini, "--out", str(out_dir)])
    assert rc == 0
    trace = out_dir / "mini_proposed.csv"
    summary = out_dir / "mini_summary.json"
    assert trace.exists() and summary.exists()
    payload = json.loads(summary.read_text())
    assert payload["scenario"] == "mini"
    assert payload["per_unit"]["basis"] == "phase-peak"
    assert "proposed" in payload["metrics"]
    rows = read_traces(str(trace))
    assert rows, "trace should not be empty"


def test_cli_usage_errors(tmp_path):
    assert cli_main(["run"]) == 1                       # missing --scenario
    assert cli_main(["run", "--scenario", "nope"]) == 1  # unknown name
    assert cli_main(["bogus"]) == 1                     # unknown subcommand
    assert cli_main(["run", "--scenario", "no_fault", "--mode", "xyz"]) == 1
    assert cli_main(["run", "--scenario", "no_fault", "--param", "oops"]) == 1
    assert cli_main(["run", "--scenario", "no_fault",
                     "--fault-align", "1.5"]) == 1


def test_cli_nonfinite_exit_code(tmp_path):
    ini = _ini(tmp_path, "[scenario]\nname = blowup\nduration = 0.001\nmode = proposed\n"
                         "[plant]\nl_f = 1e-12\n")
    rc = cli_main(["run", "--scenario", ini, "--out", str(tmp_path)])
    assert rc == 2
