"""Command-line front end.

Every subcommand takes a scenario file; single-purpose subcommands override
the scenario's output list so one command produces one artifact.  Errors
leave a machine-readable JSON object on stderr and a nonzero exit code.
"""

import dataclasses
import json
import sys as _sys

import click

from .exceptions import GaussflowError
from .scenario import Scenario, load_scenario, run


def _fail(exc, code=2):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(payload), err=True)
    _sys.exit(code)


def _common(fn):
    fn = click.option("--scenario", "scenario_path", required=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="Scenario YAML file.")(fn)
    fn = click.option("--out", "out_dir", default=".", show_default=True,
                      type=click.Path(file_okay=False),
                      help="Output directory.")(fn)
    fn = click.option("--tol", type=float, default=None,
                      help="Override the flow integration tolerance.")(fn)
    fn = click.option("--format", "fmt", default="csv", show_default=True,
                      type=click.Choice(["csv", "json"]),
                      help="Time-series file format.")(fn)
    return fn


def _load(scenario_path, tol, outputs=None):
    sc = load_scenario(scenario_path)
    changes = {}
    if tol is not None:
        tols = dict(sc.tolerances)
        tols["flow"] = tol
        changes["tolerances"] = tols
    if outputs is not None:
        changes["outputs"] = tuple(outputs)
    return dataclasses.replace(sc, **changes) if changes else sc


def _execute(scenario_path, out_dir, tol, fmt, outputs=None):
    try:
        sc = _load(scenario_path, tol, outputs)
        report = run(sc, out_dir, fmt=fmt)
    except GaussflowError as exc:
        _fail(exc)
    except (ValueError, OSError) as exc:
        _fail(exc)
    failures = {k: v for k, v in report.outputs.items() if "error" in v}
    click.echo(json.dumps(report.to_dict(), indent=1, default=str))
    if failures:
        _sys.exit(1)


@click.group()
@click.version_option(package_name="gaussflow")
def main():
    """Gaussian phase-space dynamics for open quadratic systems."""


@main.command()
@_common
def simulate(scenario_path, out_dir, tol, fmt):
    """Run the scenario's full requested output list."""
    _execute(scenario_path, out_dir, tol, fmt)


def _single(name, kind, doc):
    @main.command(name=name, help=doc)
    @_common
    def _cmd(scenario_path, out_dir, tol, fmt):
        _execute(scenario_path, out_dir, tol, fmt, outputs=[kind])
    return _cmd


_single("coefficients", "coefficients",
        "Master-equation coefficients on the time grid.")
_single("critical-time", "critical_time",
        "First zero of det Phi_ii in (0, t_max].")
_single("purity-rate", "purity_rate",
        "Initial second derivative of the purity.")
_single("correlation-rate", "correlation_rate",
        "Initial system-environment correlation rate.")
_single("wigner", "wigner_grid",
        "Grid-based Wigner propagation to t_max (d = 1).")
_single("qbm-residual", "qbm_residual",
        "Residual of the Brownian-motion memory equation.")


@main.command()
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def validate(scenario_path):
    """Parse and validate a scenario without running it."""
    try:
        sc = _load(scenario_path, None)
    except GaussflowError as exc:
        _fail(exc)
    click.echo(json.dumps({
        "valid": True, "name": sc.name, "model": sc.model,
        "outputs": list(sc.outputs), "t_max": sc.t_max, "steps": sc.steps,
    }))


if __name__ == "__main__":
    main()
