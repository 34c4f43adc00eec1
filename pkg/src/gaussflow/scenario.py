"""Scenario files: schema, validation and the run orchestrator.

One scenario document describes one run: a model, two initial states, a
time grid and a list of requested outputs.  ``run`` produces CSV (or JSON)
time-series files plus a JSON summary; output is deterministic — floats
are written with their shortest round-trip representation.
"""

import json
import math
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .bipartite import BipartiteSystem, QuadraticHamiltonian, full_flow
from .exceptions import GaussflowError, SingularFlowError
from .models import QBMParams, TwoOscillatorParams, qbm_build, qbm_residual, \
    two_oscillator_system
from .reduced import (
    correlation_rate,
    critical_time,
    evolve_reduced,
    master_coefficients,
    purity_rate_initial,
    reduced_wigner_grid,
)
from .states import GaussianState, squeezed, thermal_state, vacuum, validate, \
    wigner_eval
from .symplectic import PhaseSpaceFlow

KNOWN_OUTPUTS = (
    "trajectory", "coefficients", "critical_time", "purity_rate",
    "correlation_rate", "wigner_grid", "qbm_residual",
)

DEFAULT_TOLERANCES = {
    "flow": 1e-10,
    "critical_time": 1e-10,
    "validity": 1e-9,
    "wigner_decay": 1e-8,
}

__all__ = ["Scenario", "RunReport", "ScenarioError", "parse_scenario",
           "load_scenario", "build_system", "run"]


class ScenarioError(GaussflowError):
    """Scenario document violates the schema."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"scenario key '{key}': {message}")


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    params: dict
    system_state: GaussianState
    environment_state: GaussianState
    t_max: float
    steps: int
    outputs: tuple
    tolerances: dict
    wigner: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


@dataclass
class RunReport:
    scenario: dict
    version: str
    tolerances: dict
    outputs: dict
    diagnostics: dict
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "version": self.version,
            "tolerances": self.tolerances,
            "outputs": self.outputs,
            "diagnostics": self.diagnostics,
            "wall_time_s": self.wall_time_s,
        }


def _require(doc, key, types, where=""):
    label = f"{where}.{key}" if where else key
    if key not in doc:
        raise ScenarioError(label, "missing")
    val = doc[key]
    if not isinstance(val, types):
        raise ScenarioError(
            label, f"expected {types}, got {type(val).__name__}")
    return val


def _matrix(doc, key, shape, where=""):
    raw = _require(doc, key, list, where)
    arr = np.asarray(raw, dtype=float)
    if arr.shape != shape:
        raise ScenarioError(f"{where}.{key}" if where else key,
                            f"expected shape {shape}, got {arr.shape}")
    return arr


def build_system(model: str, params: dict) -> BipartiteSystem:
    """Assemble the bipartite system described by (model, params)."""
    if model == "two_oscillator":
        p = TwoOscillatorParams(
            omega_s=float(_require(params, "omega_s", (int, float), "params")),
            omega_e_sq=float(_require(params, "omega_e_sq", (int, float),
                                      "params")),
            gamma=float(_require(params, "gamma", (int, float), "params")))
        return two_oscillator_system(p)
    if model == "qbm":
        k = np.asarray(_require(params, "spring_constants", list, "params"),
                       dtype=float)
        p = QBMParams(
            mass=float(params.get("mass", 1.0)),
            omega_s=float(_require(params, "omega_s", (int, float), "params")),
            spring_constants=k)
        return qbm_build(p)
    if model == "custom":
        d = int(_require(params, "d", int, "params"))
        N = int(_require(params, "N", int, "params"))
        hs = _matrix(params, "hessian_system", (2 * d, 2 * d), "params")
        he = _matrix(params, "hessian_environment", (2 * N, 2 * N), "params")
        G = _matrix(params, "coupling", (2 * d, 2 * N), "params")
        return BipartiteSystem(
            system=QuadraticHamiltonian(n=d, hessian=hs),
            environment=QuadraticHamiltonian(n=N, hessian=he),
            coupling=G)
    raise ScenarioError("model", f"unknown model {model!r}")


def _build_state(doc, n, hamiltonian, where):
    if "preset" in doc:
        preset = doc["preset"]
        if preset == "vacuum":
            return vacuum(n)
        if preset == "thermal":
            beta = float(_require(doc, "beta", (int, float), where))
            return thermal_state(hamiltonian, beta)
        if preset == "squeezed":
            r = float(_require(doc, "r", (int, float), where))
            return squeezed(r, n)
        raise ScenarioError(f"{where}.preset", f"unknown preset {preset!r}")
    cov = _matrix(doc, "cov", (2 * n, 2 * n), where)
    mean = np.asarray(doc.get("mean", np.zeros(2 * n)), dtype=float)
    if mean.shape != (2 * n,):
        raise ScenarioError(f"{where}.mean",
                            f"expected length {2 * n}, got {mean.shape}")
    return GaussianState(n=n, mean=mean, cov=cov)


def parse_scenario(doc) -> Scenario:
    """Validate a scenario document (a mapping or YAML text)."""
    if isinstance(doc, str):
        doc = yaml.safe_load(doc)
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "document must be a mapping")

    model = _require(doc, "model", str)
    params = _require(doc, "params", dict)
    sys = build_system(model, params)  # validates parameters early

    states_doc = _require(doc, "states", dict)
    st_sys = _build_state(_require(states_doc, "system", dict, "states"),
                          sys.d, sys.system, "states.system")
    st_env = _build_state(_require(states_doc, "environment", dict, "states"),
                          sys.N, sys.environment, "states.environment")
    for label, st in (("system", st_sys), ("environment", st_env)):
        rep = validate(st)
        if not rep.is_valid:
            raise ScenarioError(
                f"states.{label}",
                "not a valid quantum state: min symplectic eigenvalue "
                f"{rep.min_symplectic_eigenvalue:.6g} < 1/2")

    time_doc = _require(doc, "time", dict)
    t_max = float(_require(time_doc, "t_max", (int, float), "time"))
    steps = int(_require(time_doc, "steps", int, "time"))
    if t_max <= 0 or steps < 1:
        raise ScenarioError("time", "t_max must be > 0 and steps >= 1")

    outputs = tuple(_require(doc, "outputs", list))
    for o in outputs:
        if o not in KNOWN_OUTPUTS:
            raise ScenarioError("outputs", f"unknown output {o!r}")
    if "qbm_residual" in outputs and model != "qbm":
        raise ScenarioError("outputs", "qbm_residual requires the qbm model")

    tol = dict(DEFAULT_TOLERANCES)
    tol.update({k: float(v) for k, v in doc.get("tolerances", {}).items()})
    return Scenario(
        name=str(doc.get("name", "scenario")), model=model, params=params,
        system_state=st_sys, environment_state=st_env, t_max=t_max,
        steps=steps, outputs=outputs, tolerances=tol,
        wigner=dict(doc.get("wigner", {})), raw=doc)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


# ---------------------------------------------------------------------------
# output writers: shortest round-trip float text, byte-deterministic
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _write_table(path: Path, header, rows, fmt: str):
    if fmt == "json":
        payload = {"columns": list(header),
                   "rows": [[_fmt(v) for v in row] for row in rows]}
        path = path.with_suffix(".json")
        path.write_text(json.dumps(payload, indent=1) + "\n")
    else:
        lines = [",".join(header)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        path.write_text("\n".join(lines) + "\n")
    return str(path)


def _mat_header(prefix, shape):
    if len(shape) == 1:
        return [f"{prefix}_{i}" for i in range(shape[0])]
    return [f"{prefix}_{i}{j}" for i in range(shape[0])
            for j in range(shape[1])]


def _run_trajectory(sc, sys, flow, out_dir, fmt):
    traj = evolve_reduced(flow, sc.system_state, sc.environment_state)
    d2 = 2 * sys.d
    header = (["t"] + _mat_header("cov", (d2, d2)) + _mat_header("m", (d2,))
              + ["purity", "linear_entropy", "von_neumann_entropy",
                 "det_phi_ii"])
    rows = []
    for k in range(len(traj)):
        rows.append([traj.times[k], *traj.cov[k].ravel(), *traj.mean[k],
                     traj.purity[k], traj.linear_entropy[k],
                     traj.von_neumann_entropy[k], traj.det_phi_ii[k]])
    path = _write_table(out_dir / "trajectory.csv", header, rows, fmt)
    diag = {"min_symplectic_eigenvalue":
            float(np.min(traj.min_symplectic_eigenvalue))}
    return path, diag


def _run_coefficients(sc, sys, flow, out_dir, fmt):
    picture = sc.raw.get("picture", "interaction")
    coeffs = master_coefficients(flow, sc.environment_state, picture=picture)
    d2 = 2 * sys.d
    header = (["t"] + _mat_header("A", (d2, d2)) + _mat_header("B", (d2, d2))
              + _mat_header("v", (d2,)) + _mat_header("theta", (d2, d2)))
    rows = [[c.t, *c.A.ravel(), *c.B.ravel(), *c.v, *c.theta.ravel()]
            for c in coeffs]
    return _write_table(out_dir / "coefficients.csv", header, rows, fmt), {}


def _run_wigner(sc, sys, flow_bundle, out_dir, fmt):
    if sys.d != 1:
        raise ScenarioError("wigner", "wigner_grid output supports d = 1")
    extent = float(sc.wigner.get("extent", 6.0))
    points = int(sc.wigner.get("points", 128))
    ax = np.linspace(-extent, extent, points)
    X, P = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([X, P], axis=-1)
    w0 = wigner_eval(sc.system_state, pts)
    flow = PhaseSpaceFlow(d=sys.d, N=sys.N, t=float(flow_bundle.times[-1]),
                          M=flow_bundle.phi[-1])
    wt = reduced_wigner_grid(flow, w0, (ax, ax), sc.environment_state,
                             decay_tol=sc.tolerances["wigner_decay"])
    header = ["x", "xi", "w0", "wt"]
    rows = [[X.flat[i], P.flat[i], w0.flat[i], wt.flat[i]]
            for i in range(w0.size)]
    return _write_table(out_dir / "wigner.csv", header, rows, fmt), {}


def _run_qbm_residual(sc, sys, flow, out_dir, fmt):
    k = np.asarray(sc.params["spring_constants"], dtype=float)
    p = QBMParams(mass=float(sc.params.get("mass", 1.0)),
                  omega_s=float(sc.params["omega_s"]), spring_constants=k)
    z0 = np.concatenate([sc.system_state.mean, sc.environment_state.mean])
    if not np.any(z0):
        z0 = np.zeros(2 * (1 + p.n_bath))
        z0[0] = 1.0  # displaced start so the residual test is non-trivial
    times = np.linspace(0.0, sc.t_max, sc.steps + 1)
    res = qbm_residual(p, z0, times)
    rows = list(zip(times, res))
    path = _write_table(out_dir / "qbm_residual.csv", ["t", "residual"],
                        rows, fmt)
    return path, {"qbm_residual_sup": float(np.max(np.abs(res)))}


def run(scenario: Scenario, out_dir, fmt: str = "csv") -> RunReport:
    """Execute a scenario, writing requested outputs under ``out_dir``.

    Scalar outputs land in the summary; time series go to per-output files.
    A failing output is recorded as ``{"error": ...}`` in the report and
    does not abort the remaining outputs.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = _time.perf_counter()

    sys = build_system(scenario.model, scenario.params)
    times = np.linspace(0.0, scenario.t_max, scenario.steps + 1)
    flow = full_flow(sys, times, tol=scenario.tolerances["flow"])

    outputs = {}
    diagnostics = {"max_symplectic_defect": flow.max_symplectic_defect}

    for kind in scenario.outputs:
        try:
            if kind == "trajectory":
                path, diag = _run_trajectory(scenario, sys, flow, out_dir, fmt)
                outputs[kind] = {"file": path}
                diagnostics.update(diag)
            elif kind == "coefficients":
                path, _ = _run_coefficients(scenario, sys, flow, out_dir, fmt)
                outputs[kind] = {"file": path}
            elif kind == "critical_time":
                tc = critical_time(
                    sys, scenario.t_max,
                    rel_tol=scenario.tolerances["critical_time"])
                outputs[kind] = {"t_c": None if tc is None else _fmt(tc)}
                diagnostics["t_c"] = tc
            elif kind == "purity_rate":
                rate = purity_rate_initial(sys, scenario.system_state,
                                           scenario.environment_state)
                outputs[kind] = {"ddot_purity": _fmt(rate)}
            elif kind == "correlation_rate":
                rep = correlation_rate(sys, scenario.system_state,
                                       scenario.environment_state)
                outputs[kind] = {"norm": _fmt(rep.norm),
                                 "correlated": rep.correlated}
            elif kind == "wigner_grid":
                path, _ = _run_wigner(scenario, sys, flow, out_dir, fmt)
                outputs[kind] = {"file": path}
            elif kind == "qbm_residual":
                path, diag = _run_qbm_residual(scenario, sys, flow, out_dir,
                                               fmt)
                outputs[kind] = {"file": path}
                diagnostics.update(diag)
        except (GaussflowError, SingularFlowError, ValueError) as exc:
            outputs[kind] = {"error": f"{type(exc).__name__}: {exc}"}

    report = RunReport(
        scenario=scenario.raw, version=__version__,
        tolerances=scenario.tolerances, outputs=outputs,
        diagnostics=diagnostics,
        wall_time_s=_time.perf_counter() - t0)
    (out_dir / "summary.json").write_text(
        json.dumps(report.to_dict(), indent=1, default=_json_default) + "\n")
    return report


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")
