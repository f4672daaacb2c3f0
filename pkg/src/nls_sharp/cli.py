"""``nls-sharp`` command line entry point.

Exit codes: 0 success or PASS, 1 experiment FAIL, 2 configuration error,
3 runtime error.  Messages go to stderr; data goes to files.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .config import ConfigError, RunConfig, load_config
from .experiments import (
    EXPERIMENTS,
    exp_blowup,
    exp_conservation,
    exp_dispersive,
    exp_gronwall,
    exp_sharp_weight,
    exp_wkb,
    free_gaussian_sup,
    regime,
)
from .initial import initial_from_spec
from .norms import COLUMNS
from .optics import trace_rays
from .potentials import Zero, potential_from_spec
from .propagator import BlowupDetected, GuardRejected, evolve

log = logging.getLogger("nls_sharp")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _opts(cfg: RunConfig, *keys):
    return {k: cfg.experiment[k] for k in keys if k in cfg.experiment}


def run_experiment(name: str, cfg: RunConfig):
    p = cfg.potential
    if name == "sharp-weight":
        opts = _opts(cfg, "radii", "tau", "decay", "dx", "growth_min", "ratio_tol", "saturation_max", "profile")
        if "comparison" in cfg.experiment:
            opts["comparison"] = potential_from_spec({"kind": cfg.experiment["comparison"]})
        return exp_sharp_weight(p, dt=cfg.params.dt, **opts)
    if name == "blowup-regime":
        opts = _opts(cfg, "amplitude", "gradient_factor")
        return exp_blowup(cfg.grid, sigma=cfg.params.sigma, T=cfg.params.T, dt=cfg.params.dt, potential=p, **opts)
    u0 = initial_from_spec(cfg.grid, cfg.ic)
    if name == "conservation":
        return exp_conservation(p, u0, cfg.params, **_opts(cfg, "mass_tol", "energy_tol"))
    if name == "gronwall":
        return exp_gronwall(p, u0, cfg.params)
    if name == "wkb":
        return exp_wkb(p, u0, **_opts(cfg, "t_list", "dt_ref", "dt_ode", "r2_min", "intercept_tol"))
    if name == "dispersive":
        opts = _opts(cfg, "rel_tol", "ratio_bound")
        window = cfg.experiment.get("window", [0.1, min(3.0, cfg.params.T)])
        closed = cfg.experiment.get("closed_form", isinstance(p, Zero) and cfg.ic.get("kind") in ("gaussian", "ground_state"))
        reference = None
        if closed:
            width = cfg.ic.get("width", 1.0)
            amp = float(abs(u0.values).max())
            reference = lambda t: free_gaussian_sup(t, width, amp)  # noqa: E731
        return exp_dispersive(
            p, u0, cfg.params.T, dt=cfg.params.dt, window=tuple(window), reference=reference,
            record_every=cfg.params.record_every, **opts,
        )
    raise ConfigError(f"unknown experiment {name!r}; try `nls-sharp list`")


def cmd_run(cfg: RunConfig) -> int:
    u0 = initial_from_spec(cfg.grid, cfg.ic)
    out = cfg.output_dir
    blowup = None
    try:
        traj = evolve(u0, cfg.potential, cfg.params, keep_snapshots=bool(cfg.output.get("snapshots", False)))
    except BlowupDetected as exc:
        traj = exc.trajectory
        blowup = exc
        log.warning("%s", exc)
    rows = [r.as_tuple() for r in traj.diagnostics]
    io.write_csv(out / "diagnostics.csv", COLUMNS, rows)
    artifacts = ["diagnostics.csv"]
    for col in ("mass", "total_E", "modified_E_lambda", "sigma_tilde_norm"):
        j = COLUMNS.index(col)
        io.write_xy(out / f"{col}.dat", [[r[0], r[j]] for r in rows])
        artifacts.append(f"{col}.dat")
    if cfg.output.get("snapshots", False) and traj.snapshots:
        import numpy as np

        cols = ["t"] + [f"re_{i}" for i in range(cfg.grid.size)] + [f"im_{i}" for i in range(cfg.grid.size)]
        srows = [[t, *f.values.real.ravel(), *f.values.imag.ravel()] for t, f in zip(traj.times, traj.snapshots)]
        io.write_csv(out / "snapshots.csv", cols, srows)
        artifacts.append("snapshots.csv")
        io.write_xy(out / "grid.dat", np.column_stack([np.arange(cfg.grid.N), cfg.grid.axis]))
    if cfg.output.get("rays", False):
        from .optics import launch_points

        bundle = trace_rays(cfg.potential, launch_points(cfg.grid), cfg.params.T, cfg.params.dt)
        cols, rrows = io.ray_rows(bundle, int(cfg.output.get("ray_stride", 16)))
        io.write_csv(out / "rays.csv", cols, rrows)
        artifacts.append("rays.csv")
    io.write_json(
        out / "report.json",
        {
            "name": "run",
            "potential": cfg.potential.spec(),
            "params": {"lambda": cfg.params.lam, "sigma": cfg.params.sigma, "dt": cfg.params.dt, "T": cfg.params.T},
            "grid": {"d": cfg.grid.d, "L": cfg.grid.L, "N": cfg.grid.N},
            "blowup": None if blowup is None else {"t": blowup.t, "reason": blowup.reason},
            "artifacts": artifacts + ["report.json"],
        },
    )
    log.info("wrote %s", out)
    return EXIT_OK


def cmd_experiment(name: str, cfg: RunConfig) -> int:
    report = run_experiment(name, cfg)
    io.write_report(cfg.output_dir / name, report)
    status = "PASS" if report.passed else "FAIL"
    print(f"{name}: {status}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def describe_regime(cfg: RunConfig) -> str:
    try:
        v = regime(cfg.grid.d, cfg.params.sigma, cfg.params.lam, cfg.potential)
    except ValueError as exc:
        return f"regime: {exc}"
    sq = "n/a" if v.super_quadratic_bound is None else f"{v.super_quadratic_bound:g}"
    return (
        f"theorem={v.applicable_theorem} space={v.required_space} status={v.global_status} "
        f"two_over_d={v.two_over_d:g} super_quadratic_bound={sq}"
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration (TOML)")
    common.add_argument("--output-dir", type=Path, help="override [output] dir")
    common.add_argument("--dry-run", action="store_true", help="validate config and print the regime verdict")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nls-sharp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="evolve one configuration and write diagnostics")
    ex = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    ex.add_argument("name", choices=EXPERIMENTS)
    sub.add_parser("list", help="list experiment names")
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "list":
        for name in EXPERIMENTS:
            print(name)
        return EXIT_OK
    if args.config is None:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.output_dir)
        if args.command == "experiment":
            cfg.experiment.setdefault("name", args.name)
            if cfg.experiment["name"] != args.name:
                raise ConfigError(f"{cfg.source}: config is for experiment {cfg.experiment['name']!r}, not {args.name!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        print(describe_regime(cfg))
        return EXIT_OK
    try:
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_experiment(args.name, cfg)
    except (ConfigError, GuardRejected) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
