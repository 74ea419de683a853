import math

import pytest

from elastic_purcell.harness import cli
from elastic_purcell.harness.config import ConfigError, ScenarioConfig, parse_config
from elastic_purcell.harness.scenarios import SCENARIOS, run_scenario, scenario_config


def test_parse_config_values_and_sweeps():
    cfg = parse_config("""
        # comment
        nu = 0.3
        phi = -pi/2     # trailing comment
        omega = auto
        sweep.omega = 1:3:3
        sweep.epsilon = 0.1, 0.2
    """)
    assert cfg.nu == 0.3
    assert cfg.phi == pytest.approx(-math.pi / 2)
    assert cfg.omega is None
    assert cfg.omega_value == pytest.approx(18 * math.sqrt(0.6) * 0.3)
    assert cfg.sweep == {"omega": [1.0, 2.0, 3.0], "epsilon": [0.1, 0.2]}


@pytest.mark.parametrize("text", [
    "nu = 0.5\nnu = 0.6",
    "nuu = 0.5",
    "nu 0.5",
    "nu = abc",
    "nu = -1",
    "signal = square",
    "sweep.scenario = a, b",
    "sweep.omega = 1:2",
])
def test_parse_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_text_round_trip():
    cfg = ScenarioConfig(nu=0.3, omega=2.5, sweep={"tau": [0.01, 0.02]})
    assert parse_config(cfg.to_text()) == cfg


def test_scenario_defaults_do_not_override_user_values():
    base = parse_config("n_avg = 5")
    assert scenario_config("fig2_velocity_sweep", base).n_avg == 5
    assert scenario_config("fig2_velocity_sweep").n_avg == 10
    with pytest.raises(ConfigError):
        scenario_config("nope")


@pytest.mark.parametrize("name", ["fig5_controls", "fig6_cycle_errors", "stlc",
                                  "resistance_oracle", "fig7"])
def test_scenarios_are_deterministic(tmp_path, name):
    cfg = scenario_config(name, ScenarioConfig(seed=7))
    a = run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    assert a.artifacts
    for f in a.artifacts:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    report = (tmp_path / "a" / "report.txt").read_text()
    assert report.startswith(f"scenario={name}\n")


def test_resistance_oracle_seed_changes_states(tmp_path):
    run_scenario(scenario_config("resistance_oracle", ScenarioConfig(seed=1)), tmp_path / "a")
    run_scenario(scenario_config("resistance_oracle", ScenarioConfig(seed=2)), tmp_path / "b")
    a = (tmp_path / "a" / "resistance_oracle.csv").read_text()
    b = (tmp_path / "b" / "resistance_oracle.csv").read_text()
    assert a != b


def test_sweep_with_workers_matches_serial(tmp_path):
    text = "n_avg = 3\nsweep.omega = 5, 8\n"
    serial = scenario_config("fig2_velocity_sweep", parse_config(text))
    run_scenario(serial, tmp_path / "s")
    run_scenario(serial.with_(workers=2), tmp_path / "p")
    assert ((tmp_path / "s" / "velocity_sweep.csv").read_bytes()
            == (tmp_path / "p" / "velocity_sweep.csv").read_bytes())


def test_every_scenario_is_listed(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in SCENARIOS:
        assert name in out


def test_cli_stlc(capsys):
    assert cli.main(["stlc", "--nu", "0.5", "--theta0", "0"]) == 0
    out = dict(line.split("=") for line in capsys.readouterr().out.split())
    assert float(out["detL"]) == pytest.approx(23525.1216, rel=1e-8)
    assert out["rank"] == "5"
    assert float(out["sussmann_degree3_residual"]) < 1e-8


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["frobnicate"]) == cli.EXIT_USAGE
    assert cli.main(["stlc", "--bogus"]) == cli.EXIT_USAGE
    assert cli.main(["stlc", "--nu", "zero"]) == cli.EXIT_CONFIG
    assert cli.main(["stlc", "--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG
    assert cli.main(["compare", "--scenario", "stlc"]) == cli.EXIT_CONFIG
    assert cli.main(["asymptotic", "--phi", "1.0", "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.cfg"
    bad.write_text("signal = piecewise4\ngamma = inf\ntau = 0.01\ncycles = 1\n")
    assert cli.main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_NUMERIC


def test_cli_simulate_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = cli.main(["simulate", "--signal", "piecewise4", "--cycles", "3", "--out", str(out)])
    assert code == 0
    assert (out / "trajectory.csv").exists()
    assert "dx_per_period=" in (out / "report.txt").read_text()


def test_cli_cycle_and_asymptotic(tmp_path, capsys):
    assert cli.main(["cycle", "--tau", "0.005"]) == 0
    assert "rel_error=" in capsys.readouterr().out
    assert cli.main(["asymptotic", "--out", str(tmp_path)]) == 0
    assert "omega_opt=6.97137" in capsys.readouterr().out
    assert (tmp_path / "orbit.csv").exists()
