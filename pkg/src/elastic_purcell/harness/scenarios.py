"""Named scenarios that regenerate the figure data as CSV files."""

import csv
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .. import asymptotics as asy
from .. import geocontrol as geo
from ..core import Params, assemble_resistance_closed, assemble_resistance_quadrature
from ..dynamics import (
    ControlSignal,
    IntegratorOptions,
    default_transient_periods,
    eval_control,
    integrate,
    mean_velocity,
    net_displacement_per_period,
)
from .config import ConfigError, ScenarioConfig


def tool_version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


@dataclass
class RunReport:
    scenario: str
    metrics: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    runtime: float = 0.0
    tool_version: str = ""

    def to_text(self):
        lines = [f"scenario={self.scenario}", f"tool_version={self.tool_version}",
                 f"runtime_s={self.runtime:.3f}"]
        for k, v in self.metrics.items():
            lines.append(f"{k}={_fmt(v)}")
        lines.append("artifacts=" + ",".join(self.artifacts))
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _sinusoid_run_length(cfg, sig):
    n_skip = cfg.n_skip if cfg.n_skip is not None else default_transient_periods(sig, cfg.params)
    return n_skip, (n_skip + cfg.n_avg) * sig.period


def measure_speed(cfg):
    """Numeric and O(eps^2) mean speed for one sinusoidal configuration."""
    sig = ControlSignal.sinusoidal(cfg.epsilon, cfg.omega_value, cfg.phi)
    n_skip, t_end = _sinusoid_run_length(cfg, sig)
    opts = IntegratorOptions(rtol=cfg.rtol, atol=cfg.atol, sample_dt=sig.period)
    traj = integrate(np.array([0, 0, cfg.theta0, 0, 0], dtype=float), sig, t_end, cfg.params, opts)
    v_num = mean_velocity(traj, n_skip, cfg.n_avg)
    v_th = asy.mean_velocity_theory(cfg.nu, sig.omega, cfg.phi, cfg.epsilon)
    err = abs(v_th - v_num) / abs(v_num) if v_num else math.nan
    return v_th, v_num, err


def _map(func, items, workers):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(i) for i in items]


def run_sweep(cfg, out):
    """Mean speed over the cartesian product of the sweep axes."""
    axes = cfg.sweep or {"epsilon": [0.1, 0.3, 0.5, 0.7],
                         "omega": [float(w) for w in np.linspace(1, 20, 8)]}
    names = list(axes)
    points = [cfg.with_(**dict(zip(names, combo)))
              for combo in itertools.product(*(axes[n] for n in names))]
    results = _map(measure_speed, points, cfg.workers)
    rows = [[*(getattr(p, n) for n in names), *r] for p, r in zip(points, results)]
    path = out / "velocity_sweep.csv"
    _write_csv(path, [*names, "v_theory", "v_numeric", "rel_error"], rows)
    errs = [r[2] for r in results if math.isfinite(r[2])]
    return {"points": len(points), "max_rel_error": max(errs) if errs else math.nan}, [path.name]


def run_simulate(cfg, out):
    sig = cfg.control()
    if cfg.t_end is not None:
        t_end = cfg.t_end
    elif sig.kind == "sinusoidal":
        t_end = _sinusoid_run_length(cfg, sig)[1]
    elif sig.kind == "piecewise4":
        t_end = cfg.cycles * sig.period
    else:
        t_end = 10.0
    y0 = np.array([0, 0, cfg.theta0, 0, 0], dtype=float)
    traj = integrate(y0, sig, t_end, cfg.params, cfg.integrator())
    path = out / "trajectory.csv"
    traj.to_csv(path)
    metrics = {f"final_{k}": float(v) for k, v in zip(geo.COMPONENTS, traj.states[-1])}
    if sig.kind != "zero":
        n_periods = int(math.floor(t_end / sig.period + 1e-9))
        n_skip = cfg.n_skip if cfg.n_skip is not None else default_transient_periods(sig, cfg.params)
        n_skip = min(n_skip, n_periods - 1) if sig.kind == "sinusoidal" else 0
        n_avg = n_periods - n_skip
        if n_avg >= 1:
            try:
                dx, dy = net_displacement_per_period(traj, n_skip, n_avg)
                metrics.update(dx_per_period=dx, dy_per_period=dy,
                               mean_velocity=math.hypot(dx, dy) / sig.period)
            except ValueError:
                pass
    return metrics, [path.name]


def run_fig3(cfg, out):
    """Trajectories and asymptotic orbits for several amplitudes at omega_opt."""
    eps_values = cfg.sweep.get("epsilon", [0.1, 0.5, 0.7])
    artifacts, metrics = [], {}
    for eps in eps_values:
        sig = ControlSignal.sinusoidal(eps, cfg.omega_value, math.pi / 2)
        n_skip = default_transient_periods(sig, cfg.params)
        t_end = cfg.t_end or (n_skip + 4) * sig.period
        y0 = np.array([0, 0, cfg.theta0, 0, 0], dtype=float)
        opts = IntegratorOptions(rtol=cfg.rtol, atol=cfg.atol, sample_dt=sig.period / 64)
        traj = integrate(y0, sig, t_end, cfg.params, opts)
        tag = f"eps{eps:g}"
        traj.to_csv(out / f"trajectory_{tag}.csv")
        orbit = asy.asymptotic_orbit(cfg.nu, sig.omega, eps, cfg.theta0)
        t = traj.times
        _write_csv(out / f"orbit_{tag}.csv", ["t", "x", "y", "theta", "alpha_m", "alpha_p"],
                   zip(t, orbit.x(t), orbit.y(t), orbit.theta(t), orbit.alpha_m(t), orbit.alpha_p(t)))
        artifacts += [f"trajectory_{tag}.csv", f"orbit_{tag}.csv"]
        report = asy.compare_to_numeric(traj, orbit, n_skip, n_avg=4)
        metrics[f"{tag}_velocity_rel_error"] = report.velocity_rel_error
        metrics[f"{tag}_theta_sup_error"] = report.theta_sup_error
        metrics[f"{tag}_alpha_m_sup_error"] = report.alpha_m_sup_error
        metrics[f"{tag}_alpha_p_sup_error"] = report.alpha_p_sup_error
    return metrics, artifacts


def run_fig5(cfg, out):
    """Continuous gait and its 4-phase piecewise approximation, omega = pi / (2 tau)."""
    tau = cfg.tau
    cont = ControlSignal.sinusoidal(cfg.epsilon, math.pi / (2 * tau), math.pi / 2)
    pw = ControlSignal.piecewise4(cfg.gamma, tau)
    t = np.linspace(0.0, 2 * pw.period, 401)
    rows = [(ti, *eval_control(cont, ti), *eval_control(pw, ti)) for ti in t]
    path = out / "controls.csv"
    _write_csv(path, ["t", "u1_continuous", "u2_continuous", "u1_piecewise", "u2_piecewise"], rows)
    return {"omega": cont.omega, "tau": tau}, [path.name]


def one_cycle_comparison(nu, gamma, tau, theta0=0.0):
    """Second-order prediction vs. integration over one 4-phase cycle from equilibrium."""
    params = Params(nu)
    ye = geo.equilibrium(theta0)
    theory = geo.cycle_displacement(ye, gamma, tau, params)
    opts = IntegratorOptions(rtol=1e-13, atol=1e-16)
    traj = integrate(ye, ControlSignal.piecewise4(gamma, tau), 4 * tau, params, opts)
    numeric = traj.states[-1] - ye
    return theory, numeric, geo.error_metrics(theory, numeric)


def run_fig6(cfg, out):
    taus = cfg.sweep.get("tau", [0.04, 0.02, 0.01, 0.005, 0.0025])
    rows, metrics = [], {}
    for tau in taus:
        theory, numeric, err = one_cycle_comparison(cfg.nu, cfg.gamma, tau, cfg.theta0)
        rows.append([tau, *theory, *numeric, *err.errors])
    header = (["tau"] + [f"theory_{c}" for c in geo.COMPONENTS]
              + [f"numeric_{c}" for c in geo.COMPONENTS] + [f"E_{c}" for c in geo.COMPONENTS])
    path = out / "cycle_errors.csv"
    _write_csv(path, header, rows)
    for i, tau in enumerate(taus):
        metrics[f"E_x_tau{tau:g}"] = rows[i][11]
        metrics[f"E_theta_tau{tau:g}"] = rows[i][13]
    return metrics, [path.name]


def continuous_vs_piecewise(cfg):
    tau = cfg.tau
    cont = ControlSignal.sinusoidal(cfg.epsilon, math.pi / (2 * tau), math.pi / 2)
    pw = ControlSignal.piecewise4(cfg.gamma, tau)
    y0 = np.array([0, 0, cfg.theta0, 0, 0], dtype=float)
    t_end = cfg.t_end or 100 * tau
    opts = IntegratorOptions(rtol=cfg.rtol, atol=cfg.atol, sample_dt=tau / 8)
    return integrate(y0, cont, t_end, cfg.params, opts), integrate(y0, pw, t_end, cfg.params, opts)


def run_fig7(cfg, out):
    tc, tp = continuous_vs_piecewise(cfg)
    tc.to_csv(out / "trajectory_continuous.csv")
    tp.to_csv(out / "trajectory_piecewise.csv")
    metrics = {
        "final_x_continuous": float(tc.states[-1, 0]),
        "final_x_piecewise": float(tp.states[-1, 0]),
        "max_theta_gap": float(np.max(np.abs(tc.states[:, 2] - tp.states[:, 2]))),
        "max_alpha_gap": float(np.max(np.abs(tc.states[:, 3:] - tp.states[:, 3:]))),
    }
    return metrics, ["trajectory_continuous.csv", "trajectory_piecewise.csv"]


def iterated_comparison(cfg):
    ye = np.array([0, 0, cfg.theta0, 0, 0], dtype=float)
    theory = geo.iterated_cycle_displacement(ye, cfg.gamma, cfg.tau, cfg.cycles, cfg.params)
    sig = ControlSignal.piecewise4(cfg.gamma, cfg.tau)
    opts = IntegratorOptions(rtol=cfg.rtol, atol=cfg.atol, sample_dt=sig.period)
    traj = integrate(ye, sig, cfg.cycles * sig.period, cfg.params, opts)
    numeric = np.array([traj.state_at(k * sig.period) for k in range(cfg.cycles + 1)])
    return theory, numeric


def run_fig8(cfg, out):
    theory, numeric = iterated_comparison(cfg)
    header = (["cycle"] + [f"theory_{c}" for c in geo.COMPONENTS]
              + [f"numeric_{c}" for c in geo.COMPONENTS])
    rows = [[k, *theory[k], *numeric[k]] for k in range(len(theory))]
    path = out / "iterated.csv"
    _write_csv(path, header, rows)
    metrics = {
        "final_x_theory": float(theory[-1, 0]),
        "final_x_numeric": float(numeric[-1, 0]),
        "x_rel_error": float(abs(theory[-1, 0] - numeric[-1, 0]) / abs(numeric[-1, 0])),
    }
    return metrics, [path.name]


def run_stlc(cfg, out):
    report = geo.build_L(cfg.theta0, cfg.params)
    path = out / "L_matrix.csv"
    _write_csv(path, ["row", "g1", "g2", "g3", "g4", "g5"],
               [[geo.COMPONENTS[i], *report.L[i]] for i in range(5)])
    metrics = {
        "detL": report.detL,
        "det_tolerance": report.det_tolerance,
        "rank": report.rank,
        "sigma_min_over_max": report.conditioning,
        "sussmann_degree3_residual": report.sussmann_degree3_residual,
    }
    return metrics, [path.name]


def run_resistance_oracle(cfg, out):
    """Closed form vs. quadrature at random states drawn from ``seed``."""
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for _ in range(100):
        state = np.concatenate([rng.uniform(-1, 1, 2), rng.uniform(-np.pi / 2, np.pi / 2, 3)])
        dev = np.max(np.abs(assemble_resistance_closed(state, cfg.params)
                            - assemble_resistance_quadrature(state, cfg.params)))
        rows.append([*state, dev])
    path = out / "resistance_oracle.csv"
    _write_csv(path, ["x", "y", "theta", "alpha_m", "alpha_p", "max_abs_dev"], rows)
    return {"max_abs_dev": max(r[-1] for r in rows)}, [path.name]


SCENARIOS = {
    "custom": ("single integration with the configured signal", {}, run_simulate),
    "fig2_velocity_sweep": ("mean speed vs frequency for eps in {0.1,0.3,0.5,0.7}",
                            {"n_avg": 10}, run_sweep),
    "fig3": ("x-y trajectories and asymptotic orbits for eps in {0.1,0.5,0.7}", {}, run_fig3),
    "fig5_controls": ("continuous controls and piecewise approximation", {}, run_fig5),
    "fig6_cycle_errors": ("one-cycle relative errors vs tau", {}, run_fig6),
    "fig7": ("continuous vs piecewise inputs over [0, 100 tau]", {}, run_fig7),
    "fig8_iterated": ("iterated cycle expansion vs integration, 100 cycles", {}, run_fig8),
    "stlc": ("Lie-bracket rank matrix and Sussmann residual", {}, run_stlc),
    "resistance_oracle": ("closed-form vs quadrature resistance matrix at random states",
                          {}, run_resistance_oracle),
}


def scenario_config(name, base=None, explicit=()):
    """Config for a named scenario.

    Scenario defaults fill only keys that ``base`` leaves at the global default
    and that are not listed in ``explicit``.
    """
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; see list-scenarios")
    defaults = SCENARIOS[name][1]
    base = base or ScenarioConfig()
    pristine = ScenarioConfig()
    changes = {k: v for k, v in defaults.items()
               if k not in explicit and getattr(base, k) == getattr(pristine, k)}
    return base.with_(scenario=name, **changes)


def run_scenario(cfg, out=None):
    """Run ``cfg.scenario``, writing CSV artifacts and ``report.txt`` to ``out``."""
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}; see list-scenarios")
    out = Path(out if out is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        metrics, artifacts = SCENARIOS[cfg.scenario][2](cfg, out)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"scenario {cfg.scenario}: {exc}") from exc
    report = RunReport(cfg.scenario, metrics, artifacts, time.perf_counter() - start, tool_version())
    (out / "report.txt").write_text(report.to_text())
    return report
