"""Command-line front end.

Usage::

    coldplasma SUBCOMMAND [CONFIG | --config CONFIG] [--out DIR] [--threads N]
               [--tolerance X] [--threshold-T X]

Every subcommand writes its CSV files and ``summary.json`` into ``--out``
(default ``.``). Exit status: 0 ok, 1 validation failure, 2 configuration
error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import math
import sys
import traceback
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import correction as corr
from . import oracle, poincare, validate
from .config import ConfigError, RunConfig, load_config
from .fields import PlaneWave, StepPlasmaField
from .io import CsvWriter, write_csv, write_summary
from .numerics import NumericalError
from .phase_functions import build
from .ponderomotive import force_profile
from .pulse import slowness
from .zero_density import TRAJECTORY_COLUMNS, Trajectory, position_forward

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_VALIDATION", "EXIT_CONFIG", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

Z_CHUNK = 2048


class UsageError(Exception):
    """Configuration that is well formed but unusable for the chosen subcommand."""


# -- helpers -------------------------------------------------------------------


def _xi_grid(cfg: RunConfig, pulse, start=0.0):
    lam = pulse.wavelength
    end = max(pulse.support[1], lam)
    xi_max = cfg.get("run", "xi_max", end + lam)
    n = cfg.get("run", "samples_per_wavelength", 32)
    count = max(2, int(math.ceil(n * (xi_max - start) / lam)) + 1)
    return np.linspace(start, xi_max, count)


def _times(cfg: RunConfig, default_stop):
    t0 = cfg.get("run", "t_start", 0.0)
    t1 = cfg.get("run", "t_stop", default_stop)
    if t1 < t0:
        raise UsageError(f"[run] t_stop = {t1:g} precedes t_start = {t0:g}")
    return np.linspace(t0, t1, cfg.get("run", "t_count", 201))


def _particle(cfg: RunConfig):
    x = np.asarray(cfg.get("particle", "position", (0.0, 0.0, 0.0)), dtype=float)
    b = np.asarray(cfg.get("particle", "velocity", (0.0, 0.0, 0.0)), dtype=float)
    return x, b


def _xi0(cfg: RunConfig, pulse):
    xi0 = cfg.get("run", "xi0")
    if xi0 is None:
        if pulse.is_zero:
            raise UsageError("[run] xi0 is required for a zero pulse")
        xi0 = slowness(pulse).xi0
    return float(xi0)


def _setup(cfg: RunConfig):
    if not cfg.n0 > 0:
        raise UsageError("[plasma] n0 > 0 is required for this subcommand")
    return corr.PlasmaSetup(cfg.n0)


def _exit_time(cfg, wave, x, b):
    """Lab time at which the wave has passed the particle, plus one wavelength."""
    P, cut = poincare.reduce(wave, x, b)
    pf = build(cfg.species(), cut, tol=cfg.tolerance)
    sol = poincare.ReducedSolution(P, cut, pf)
    return float(sol.lab_time(max(cut.support[1], 0.0))) + wave.wavelength


def _trajectory_columns(traj: Trajectory):
    rows = traj.rows()
    return [rows[:, i] for i in range(rows.shape[1])]


# -- subcommands ---------------------------------------------------------------


def cmd_pulse(cfg, args, out):
    pulse = cfg.pulse()
    xi = _xi_grid(cfg, pulse)
    e = pulse.e_perp(xi)
    a = pulse.a_perp(xi)
    w = pulse.dimensionless_amplitude(xi)
    write_csv(out / "pulse.csv", ["xi", "ex", "ey", "ax", "ay", "w"], [xi, e[:, 0], e[:, 1], a[:, 0], a[:, 1], w])
    result = {"support": list(pulse.support), "rows": xi.size, "w_max": float(np.max(w))}
    if not pulse.is_zero:
        rep = slowness(pulse)
        result.update(delta=rep.delta, xi0=rep.xi0)
    return EXIT_OK, result, ["pulse.csv"]


def cmd_zero_density(cfg, args, out):
    pulse = cfg.pulse()
    pf = build(cfg.species(), pulse, tol=cfg.tolerance)
    lam = pulse.wavelength
    z_min = cfg.get("run", "Z_min", 0.0)
    z_max = cfg.get("run", "Z_max", z_min)
    Z = np.linspace(z_min, z_max, cfg.get("run", "Z_count", 1))
    t = _times(cfg, float(pf.Xi(pf.support_end)) + z_max + lam)
    pf.write_csv(out / "phase_functions.csv", _xi_grid(cfg, pulse))

    def chunk(zs):
        X = np.zeros((zs.size, 1, 3))
        X[:, 0, 2] = zs
        traj = position_forward(pf, t[None, :], X)
        cols = _trajectory_columns(traj)
        return cols + [np.repeat(zs, t.size)]

    chunks = [Z[i:i + Z_CHUNK] for i in range(0, Z.size, Z_CHUNK)]
    with CsvWriter(out / "trajectories.csv", TRAJECTORY_COLUMNS + ["Z"]) as w:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            # map keeps the submission order, so rows stay Z-major
            for cols in pool.map(chunk, chunks):
                w.write(cols)
        rows = w.rows
    result = {
        "Z_count": Z.size,
        "t_count": t.size,
        "rows": rows,
        "Y3_end": float(pf.Y3(pf.support_end)),
        "u_z_end": float(pf.u_z(pf.support_end)),
    }
    return EXIT_OK, result, ["phase_functions.csv", "trajectories.csv"]


def cmd_ponderomotive(cfg, args, out):
    pulse = cfg.pulse()
    sp = cfg.species()
    pf = build(sp, pulse, tol=cfg.tolerance)
    xi = _xi_grid(cfg, pulse)
    prof = force_profile(sp, pulse, pf, xi)
    prof.write_csv(out / "ponderomotive.csv")
    result = {"rows": xi.size, "Fp_max": float(np.max(np.abs(prof.F_p))), "Fm_max": float(np.max(np.abs(prof.F_m)))}
    if not pulse.is_zero:
        result["delta"] = slowness(pulse).delta
    return EXIT_OK, result, ["ponderomotive.csv"]


def cmd_test_particle(cfg, args, out):
    pulse = cfg.pulse()
    wave = PlaneWave(pulse, cfg.direction())
    x, b = _particle(cfg)
    t = _times(cfg, _exit_time(cfg, wave, x, b))
    traj = poincare.solve_arbitrary_ic(cfg.species(), wave, x, b, t, tol=cfg.tolerance)
    write_csv(out / "trajectory.csv", TRAJECTORY_COLUMNS, _trajectory_columns(traj))
    result = {"rows": t.size, "final_position": traj.x[-1], "final_gamma": traj.state.gamma[-1]}
    return EXIT_OK, result, ["trajectory.csv"]


def cmd_correction(cfg, args, out):
    pulse = cfg.pulse()
    pf = build(cfg.species(), pulse, tol=cfg.tolerance)
    setup = _setup(cfg)
    xi = _xi_grid(cfg, pulse)
    Z = cfg.get("run", "Z", 0.0)
    fc = corr.FirstCorrection(pf, setup, xi_max=float(xi[-1]))
    fc.write_csv(out / "correction.csv", xi, Z)
    xi0 = _xi0(cfg, pulse)
    rep = corr.validity(pf, setup, Z, xi0, cfg.threshold, correction=fc if xi0 <= fc.xi_max else None)
    result = {
        "K": setup.K, "Z": Z, "xi0": xi0, "T_max": rep.T_max, "cond2_ratio": rep.cond2_ratio,
        "threshold": rep.threshold, "validity": "PASS" if rep.passed else "FAIL",
    }
    return EXIT_OK, result, ["correction.csv"]


def cmd_slingshot(cfg, args, out):
    pulse = cfg.pulse()
    pf = build(cfg.species(), pulse, tol=cfg.tolerance)
    setup = _setup(cfg)
    xi0 = _xi0(cfg, pulse)
    with warnings.catch_warnings():
        # the verdict is printed in the report and returned as the exit status
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = corr.slingshot(pf, setup, xi0, cfg.threshold, R=cfg.get("run", "radius"),
                             l=cfg.get("run", "pancake_length"))
    v = rep.validity
    write_csv(out / "slingshot.csv", ["zeta", "K", "gamma_eM", "H_MeV", "Tmax", "cond2_ratio"],
              [[rep.zeta], [rep.K], [rep.gamma_M], [rep.H_MeV], [v.T_max], [v.cond2_ratio]])
    print(rep.summary())
    result = {
        "zeta": rep.zeta, "K": rep.K, "K_xi0_sq": rep.K * xi0**2, "gamma_eM": rep.gamma_M, "H_MeV": rep.H_MeV,
        "T_max": v.T_max, "cond2_ratio": v.cond2_ratio, "threshold": v.threshold, "xi0": xi0,
        "geometry": rep.geometry, "validity": "PASS" if rep.passed else "FAIL",
    }
    return (EXIT_OK if rep.passed else EXIT_VALIDATION), result, ["slingshot.csv"]


def cmd_oracle(cfg, args, out):
    pulse = cfg.pulse()
    lam = pulse.wavelength
    wave = PlaneWave(pulse, cfg.direction())
    x, b = _particle(cfg)
    plasma = StepPlasmaField(cfg.n0) if cfg.n0 > 0 else None
    step = cfg.get("run", "step", lam / 200)
    t0 = cfg.get("run", "t_start", 0.0)
    t1 = cfg.get("run", "t_stop", _exit_time(cfg, wave, x, b))
    nsteps = max(1, int(math.ceil((t1 - t0) / step - 1e-9)))
    every = max(1, nsteps // max(1, cfg.get("run", "t_count", 201) - 1))
    res = oracle.integrate(cfg.species(), wave, x, b, (t0, t1), oracle.OracleConfig(step, plasma=plasma),
                           sample_every=every)
    cols = _trajectory_columns(res.trajectory) + [res.mass_shell_res, res.canon_perp_res]
    write_csv(out / "oracle.csv", TRAJECTORY_COLUMNS + ["mass_shell_res", "canon_perp_res"], cols)
    result = {
        "step": step, "rows": res.trajectory.x0.size, "landings": res.landings,
        "mass_shell_res_max": float(np.max(np.abs(res.mass_shell_res))),
        "canon_perp_res_max": float(np.max(res.canon_perp_res)),
    }
    return EXIT_OK, result, ["oracle.csv"]


def cmd_validate(cfg, args, out):
    pulse = cfg.pulse()
    x, b = _particle(cfg)
    xi0 = cfg.get("run", "xi0")
    ctx = validate.make_context(cfg.species(), pulse, n0=cfg.n0, direction=cfg.direction(), x_init=x,
                                beta_init=b, xi0=xi0, seed=cfg.get("run", "seed", 0), tol=cfg.tolerance)
    checks, _ = validate.run_suites(ctx, threads=args.threads)
    for c in checks:
        print(c.line())
    failed = [f"{c.suite}.{c.name}" for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    result = {
        "checks": {f"{c.suite}.{c.name}": {"value": c.value, "tolerance": c.tolerance, "passed": c.passed}
                   for c in checks},
        "failed": failed,
    }
    return (EXIT_VALIDATION if failed else EXIT_OK), result, []


COMMANDS = {
    "pulse": cmd_pulse,
    "zero-density": cmd_zero_density,
    "ponderomotive": cmd_ponderomotive,
    "test-particle": cmd_test_particle,
    "correction": cmd_correction,
    "slingshot": cmd_slingshot,
    "oracle": cmd_oracle,
    "validate": cmd_validate,
}


# -- entry point -----------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config_pos", nargs="?", metavar="CONFIG", help="configuration file")
    common.add_argument("--config", help="configuration file (alternative to the positional form)")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for batch loops")
    common.add_argument("--tolerance", type=float, help="override [run] tolerance")
    common.add_argument("--threshold-T", dest="threshold_T", type=float, help="override [run] threshold_T")
    parser = argparse.ArgumentParser(prog="coldplasma", description="Relativistic cold-plasma plane-wave solver.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name, func in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(func.__doc__ or name).strip().splitlines()[0])
    return parser


cmd_pulse.__doc__ = "field and potential profile (pulse.csv)"
cmd_zero_density.__doc__ = "exact zero-density trajectories (phase_functions.csv, trajectories.csv)"
cmd_ponderomotive.__doc__ = "magnetic and ponderomotive forces (ponderomotive.csv)"
cmd_test_particle.__doc__ = "arbitrary initial conditions by frame reduction (trajectory.csv)"
cmd_correction.__doc__ = "first plasma correction (correction.csv)"
cmd_slingshot.__doc__ = "surface-electron energy estimate with validity verdict (slingshot.csv)"
cmd_oracle.__doc__ = "brute-force RK4 reference trajectory (oracle.csv)"
cmd_validate.__doc__ = "run every invariant suite"


def _module_tag(exc):
    """Name of the innermost package module in the traceback of ``exc``."""
    pkg = Path(__file__).resolve().parent
    tag = "coldplasma"
    for frame in traceback.extract_tb(exc.__traceback__):
        p = Path(frame.filename).resolve()
        if p.parent == pkg:
            tag = p.stem
    return tag


def _load(args):
    if args.config and args.config_pos and args.config != args.config_pos:
        raise ConfigError([f"two different configs given: {args.config_pos!r} and {args.config!r}"])
    path = args.config or args.config_pos
    if path is None:
        raise ConfigError(["no configuration given (positional CONFIG or --config)"])
    cfg = load_config(path)
    errors = []
    if args.tolerance is not None:
        if not args.tolerance > 0:
            errors.append("--tolerance must be > 0")
        cfg.set("run", "tolerance", args.tolerance)
    if args.threshold_T is not None:
        if not args.threshold_T > 0:
            errors.append("--threshold-T must be > 0")
        cfg.set("run", "threshold_T", args.threshold_T)
    if args.threads < 1:
        errors.append("--threads must be >= 1")
    if errors:
        raise ConfigError(errors)
    return cfg, str(path)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg, path = _load(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        status, result, files = COMMANDS[args.command](cfg, args, out)
    except (UsageError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error [{_module_tag(exc)}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error [{_module_tag(exc)}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_summary(out / "summary.json", {
        "command": args.command,
        "config": path,
        "version": __version__,
        "species": cfg.species().label,
        "tolerance": cfg.tolerance,
        "threshold_T": cfg.threshold,
        "outputs": files,
        "result": result,
        "status": status,
    })
    return status


if __name__ == "__main__":
    sys.exit(main())
