import json

from click.testing import CliRunner

from gaussflow.cli import main

TWO_OSC = """
model: two_oscillator
params: {omega_s: 1.0, omega_e_sq: 1.0, gamma: 0.5}
states:
  system: {preset: vacuum}
  environment: {preset: vacuum}
time: {t_max: 10.0, steps: 100}
outputs: [trajectory, critical_time]
"""

QBM = """
model: qbm
params: {omega_s: 1.0, spring_constants: [0.4, 0.9]}
states:
  system: {mean: [1.0, 0.0], cov: [[0.5, 0.0], [0.0, 0.5]]}
  environment: {preset: vacuum}
time: {t_max: 5.0, steps: 500}
outputs: [qbm_residual]
"""


def write(tmp_path, text, name="scenario.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_validate_command(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["validate", "--scenario",
                               write(tmp_path, TWO_OSC)])
    assert res.exit_code == 0, res.output
    payload = json.loads(res.output)
    assert payload["valid"] and payload["model"] == "two_oscillator"


def test_validate_rejects_bad_state(tmp_path):
    bad = TWO_OSC.replace("system: {preset: vacuum}",
                          "system: {cov: [[0.4, 0.0], [0.0, 0.4]]}")
    runner = CliRunner()
    res = runner.invoke(main, ["validate", "--scenario",
                               write(tmp_path, bad)])
    assert res.exit_code == 2
    err = json.loads(res.output.strip().splitlines()[-1])
    assert err["error"] == "ScenarioError"
    assert "symplectic" in err["message"]


def test_simulate_writes_outputs(tmp_path):
    runner = CliRunner()
    out = tmp_path / "out"
    res = runner.invoke(main, ["simulate",
                               "--scenario", write(tmp_path, TWO_OSC),
                               "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert (out / "trajectory.csv").exists()
    assert (out / "summary.json").exists()
    report = json.loads(res.output)
    assert "t_c" in report["outputs"]["critical_time"]


def test_single_purpose_subcommands(tmp_path):
    runner = CliRunner()
    scenario = write(tmp_path, TWO_OSC)
    for cmd, key in [("critical-time", "critical_time"),
                     ("purity-rate", "purity_rate"),
                     ("correlation-rate", "correlation_rate"),
                     ("coefficients", "coefficients")]:
        res = runner.invoke(main, [cmd, "--scenario", scenario,
                                   "--out", str(tmp_path / cmd)])
        assert res.exit_code == 0, (cmd, res.output)
        report = json.loads(res.output)
        assert list(report["outputs"].keys()) == [key]


def test_qbm_residual_command(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["qbm-residual",
                               "--scenario", write(tmp_path, QBM),
                               "--out", str(tmp_path / "out")])
    assert res.exit_code == 0, res.output
    report = json.loads(res.output)
    assert report["diagnostics"]["qbm_residual_sup"] < 1e-3


def test_format_json_flag(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["simulate",
                               "--scenario", write(tmp_path, TWO_OSC),
                               "--out", str(tmp_path / "out"),
                               "--format", "json"])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "out" / "trajectory.json").exists()


def test_failed_output_sets_exit_code(tmp_path):
    doc = TWO_OSC.replace("[trajectory, critical_time]", "[wigner_grid]") \
        + "wigner: {extent: 1.0, points: 8}\n"
    runner = CliRunner()
    res = runner.invoke(main, ["wigner", "--scenario",
                               write(tmp_path, doc),
                               "--out", str(tmp_path / "out")])
    assert res.exit_code == 1
    report = json.loads(res.output)
    assert "error" in report["outputs"]["wigner_grid"]


def test_missing_scenario_file():
    runner = CliRunner()
    res = runner.invoke(main, ["simulate", "--scenario", "/nope.yaml"])
    assert res.exit_code == 2
