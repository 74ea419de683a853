"""Command-line interface.

Exit status: 0 success, 1 usage error, 2 configuration error, 3 numeric failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .. import asymptotics as asy
from .. import geocontrol as geo
from ..core import SingularResistanceError
from ..dynamics import IntegrationError
from .config import SCHEMA, ConfigError, ScenarioConfig, load_config
from .scenarios import SCENARIOS, one_cycle_comparison, run_scenario, scenario_config

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# flag -> config key; values go through the same converters as the config file
_FLAGS = {
    "--nu": "nu", "--theta0": "theta0", "--signal": "signal", "--epsilon": "epsilon",
    "--omega": "omega", "--phi": "phi", "--gamma": "gamma", "--tau": "tau",
    "--t-end": "t_end", "--n-skip": "n_skip", "--n-avg": "n_avg", "--cycles": "cycles",
    "--method": "method", "--rtol": "rtol", "--atol": "atol", "--dt": "dt",
    "--sample-dt": "sample_dt", "--seed": "seed", "--workers": "workers", "--out": "out",
}


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="key = value config file")
    p.add_argument("--format", choices=["csv"], default="csv", help="artifact format")
    for flag, key in _FLAGS.items():
        p.add_argument(flag, dest=key, metavar=key.upper(), default=None)
    return p


def build_parser():
    parser = _Parser(prog="elastic-purcell",
                     description="Elastic three-link swimmer: simulation and analysis.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    common = _common()
    helps = {
        "simulate": "integrate a scenario and write trajectory CSVs",
        "asymptotic": "closed-form weakly nonlinear predictions",
        "stlc": "Lie-bracket rank certificate at the straight equilibrium",
        "cycle": "one 4-phase cycle: second-order expansion vs integration",
        "iterate": "iterated cycle expansion vs integration",
        "sweep": "mean speed over a parameter grid",
        "compare": "continuous vs piecewise (fig7) or asymptotic vs numeric (fig3)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text)
        if name in ("simulate", "sweep", "compare"):
            p.add_argument("--scenario", default=None)
    sub.add_parser("list-scenarios", help="list named scenarios")
    return parser


def _resolve(args, scenario=None):
    """Config file values, overridden by explicit flags, then scenario defaults."""
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    explicit = {}
    for key in _FLAGS.values():
        raw = getattr(args, key)
        if raw is None:
            continue
        try:
            explicit[key] = SCHEMA[key](raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for --{key.replace('_', '-')}: {raw!r}") from exc
    try:
        cfg = cfg.with_(**explicit)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if scenario is not None:
        cfg = scenario_config(scenario, cfg, explicit)
    return cfg, explicit


def _print_report(report):
    sys.stdout.write(report.to_text())


def _vec(v):
    return " ".join(f"{x:.10g}" for x in v)


def _cmd_simulate(args):
    cfg, _ = _resolve(args, args.scenario or None)
    _print_report(run_scenario(cfg))


def _cmd_sweep(args):
    name = args.scenario or "fig2_velocity_sweep"
    cfg, _ = _resolve(args, name)
    _print_report(run_scenario(cfg))


def _cmd_compare(args):
    name = args.scenario or "fig7"
    if name not in ("fig7", "fig3"):
        raise ConfigError("compare supports scenarios fig7 and fig3")
    cfg, _ = _resolve(args, name)
    _print_report(run_scenario(cfg))


def _cmd_iterate(args):
    cfg, _ = _resolve(args, "fig8_iterated")
    _print_report(run_scenario(cfg))


def _cmd_asymptotic(args):
    cfg, explicit = _resolve(args)
    w = cfg.omega_value
    dx, dy, mag = asy.second_order_displacement(cfg.nu, w, cfg.phi, cfg.epsilon, cfg.theta0)
    print(f"nu={cfg.nu:.17g}")
    print(f"omega={w:.17g}")
    print(f"epsilon={cfg.epsilon:.17g}")
    print(f"dx_per_period={dx:.17g}")
    print(f"dy_per_period={dy:.17g}")
    print(f"displacement_per_period={mag:.17g}")
    print(f"mean_velocity={asy.mean_velocity_theory(cfg.nu, w, cfg.phi, cfg.epsilon):.17g}")
    if 0 < cfg.nu < 1:
        w_opt, v_max = asy.optimal_frequency(cfg.nu, cfg.epsilon)
        print(f"omega_opt={w_opt:.17g}")
        print(f"v_max={v_max:.17g}")
    if "out" in explicit:
        orbit = asy.asymptotic_orbit(cfg.nu, w, cfg.epsilon, cfg.theta0, cfg.phi)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        t = np.linspace(0.0, 2 * orbit.period, 257)
        cols = [t, orbit.x(t), orbit.y(t), orbit.theta(t), orbit.alpha_m(t), orbit.alpha_p(t)]
        with open(out / "orbit.csv", "w") as fh:
            fh.write("t,x,y,theta,alpha_m,alpha_p\n")
            for row in zip(*cols):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        print("artifacts=orbit.csv")


def _cmd_stlc(args):
    cfg, explicit = _resolve(args)
    if "out" in explicit:
        _print_report(run_scenario(cfg.with_(scenario="stlc")))
        return
    rep = geo.build_L(cfg.theta0, cfg.params)
    print(f"detL={rep.detL:.17g}")
    print(f"rank={rep.rank}")
    print(f"sigma_min_over_max={rep.conditioning:.17g}")
    print(f"sussmann_degree3_residual={rep.sussmann_degree3_residual:.17g}")


def _cmd_cycle(args):
    cfg, _ = _resolve(args)
    theory, numeric, err = one_cycle_comparison(cfg.nu, cfg.gamma, cfg.tau, cfg.theta0)
    print("components=" + ",".join(geo.COMPONENTS))
    print(f"theory={_vec(theory)}")
    print(f"numeric={_vec(numeric)}")
    print(f"rel_error={_vec(err.errors)}")


def _cmd_list(args):
    width = max(map(len, SCENARIOS))
    for name, (text, _, _) in SCENARIOS.items():
        print(f"{name:<{width}}  {text}")


COMMANDS = {
    "simulate": _cmd_simulate, "asymptotic": _cmd_asymptotic, "stlc": _cmd_stlc,
    "cycle": _cmd_cycle, "iterate": _cmd_iterate, "sweep": _cmd_sweep,
    "compare": _cmd_compare, "list-scenarios": _cmd_list,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotImplementedError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SingularResistanceError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
