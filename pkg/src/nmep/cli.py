"""Command-line entry point: ``nmep <subcommand> [options]``.

Exit codes: 0 success, 1 invalid input, 2 solver or oracle failure,
3 verification failure. Every run writes its data files plus a JSON
manifest; repeated identical runs produce byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import evolve_eigenbasis, evolve_rk4, time_grid
from .eigen import decompose, eigen_residual
from .errors import InvalidConfigError, InvalidInputError, NumericalFailure
from .model import config_from_mapping, derive_rates, load_config
from .revivals import ep_matrix, jordan_analysis, reconstruct, revival_amplitude
from .spectra import analytic_spectrum, find_peaks, omega_grid, windowed_spectrum
from .verify import run_suite

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

DEFAULTS = {"omega0": 1.0, "delta_omega": 0.002, "n_modes": 4001, "rotating_frame": True}


class UsageError(InvalidInputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path: Path, header, columns):
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: Path, obj):
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Path):
        return str(v)
    raise TypeError(f"not serializable: {type(v).__name__}")


def parse_time(text: str, revival_time: float | None) -> float:
    """Absolute time or ``<k>TR`` meaning k revival periods."""
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*TR\s*", text)
    if m:
        if revival_time is None:
            raise UsageError("the TR suffix needs delta_omega")
        k = m.group(1)
        try:
            factor = int(k)
        except ValueError:
            factor = float(k)
        return factor * revival_time
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"bad time {text!r}: expected a number or <k>TR") from None


def _physics_args(p):
    p.add_argument("--config", help="key=value configuration file; flags override it")
    p.add_argument("--omega0", type=float)
    p.add_argument("--delta-omega", type=float)
    p.add_argument("--n-modes", type=int, help="number of reservoir modes N+1 (odd)")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--gamma", type=float)
    grp.add_argument("--coupling", type=float)
    p.add_argument("--lab-frame", action="store_true", help="keep the carrier omega0")


def _out_args(p, default_name):
    p.add_argument("--out", help="data file path")
    p.add_argument("--out-dir", help=f"output directory (data file {default_name})")
    p.set_defaults(default_name=default_name)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nmep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("eigen", help="eigenfrequencies and oscillator weights")
    _physics_args(p)
    p.add_argument("--method", choices=["finite", "infinite", "dense"], default="finite")
    p.add_argument("--k-max", type=int)
    _out_args(p, "eigen.csv")

    p = sub.add_parser("evolve", help="oscillator trajectory a(t)")
    _physics_args(p)
    p.add_argument("--t-max", default="3TR")
    p.add_argument("--samples-per-period", type=int, default=2000)
    p.add_argument("--method", choices=["eigenbasis", "rk4"], default="eigenbasis")
    p.add_argument("--mode", choices=["finite", "infinite"], default="finite")
    p.add_argument("--dt", type=float, help="RK4 step (default: half the stability bound)")
    p.add_argument("--norm", action="store_true", help="store reservoir amplitudes and emit the norm")
    _out_args(p, "trajectory.csv")

    p = sub.add_parser("revivals", help="closed-form revival amplitudes and reconstruction")
    _physics_args(p)
    p.add_argument("--t-max", default="3TR")
    p.add_argument("--samples-per-period", type=int, default=2000)
    p.add_argument("--n-max", type=int)
    _out_args(p, "revivals.csv")

    p = sub.add_parser("spectrum", help="analytic and windowed revival spectra")
    _physics_args(p)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--half-width", type=float, default=25.0, help="grid half-width in units of gamma")
    p.add_argument("--spacing", type=float, default=1.0 / 400, help="grid spacing in units of gamma")
    p.add_argument("--window", help="t_lo:t_hi (numbers or <k>TR) for a windowed transform")
    p.add_argument("--samples-per-period", type=int, default=2000)
    _out_args(p, "spectrum.csv")

    p = sub.add_parser("ep-matrix", help="exceptional-point chain matrix and its Jordan data")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    _out_args(p, "ep_matrix.json")

    p = sub.add_parser("verify", help="run the invariant suites")
    p.add_argument("--suite", choices=["quick", "full"], default="quick")
    p.add_argument("--out", help="manifest path")
    p.add_argument("--out-dir")
    p.set_defaults(default_name="verify.json")
    return parser


def resolve_config(args):
    values = dict(DEFAULTS)
    if args.config:
        try:
            values.update(load_config(args.config))
        except OSError as exc:
            raise InvalidConfigError(f"cannot read config: {exc}") from None
    flags = {"omega0": args.omega0, "delta_omega": args.delta_omega, "n_modes": args.n_modes,
             "gamma": args.gamma, "coupling": args.coupling}
    if args.gamma is not None:
        values.pop("coupling", None)
    if args.coupling is not None:
        values.pop("gamma", None)
    values.update({k: v for k, v in flags.items() if v is not None})
    if args.lab_frame:
        values["rotating_frame"] = False
    return config_from_mapping(values)


def _output_path(args, required=True) -> Path | None:
    if args.out:
        path = Path(args.out)
    elif args.out_dir:
        path = Path(args.out_dir) / args.default_name
    elif required:
        raise UsageError("missing output path: give --out or --out-dir")
    else:
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _manifest(command, args, config=None, checks=(), outputs=(), **extra):
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "default_name", "out", "out_dir", "config")}
    man = {"tool": "nmep", "version": __version__, "subcommand": command,
           "parameters": params, "outputs": [str(p) for p in outputs],
           "checks": [c if isinstance(c, dict) else c.as_dict() for c in checks]}
    if args and getattr(args, "config", None):
        man["config_file"] = str(args.config)
    if config is not None:
        man["config"] = config.as_dict()
        if config.coupling > 0:
            gamma, Gamma, T_R = derive_rates(config)
            man["derived"] = {"gamma": gamma, "Gamma": Gamma, "T_R": T_R}
    man.update(extra)
    return man


def _check(name, measured, tol):
    measured = float(measured)
    return {"name": name, "measured": measured, "tolerance": tol, "passed": bool(measured <= tol)}


def cmd_eigen(args):
    config = resolve_config(args)
    path = _output_path(args)
    dec = decompose(config, args.method, k_max=args.k_max)
    if dec.residual is None:
        dec.residual = eigen_residual(dec.omega_tilde, config)
    write_csv(path, ["k", "omega_tilde", "alpha", "weight", "residual"],
              [dec.k, dec.omega_tilde, dec.alpha, dec.weight, dec.residual])
    s = dec.weight_sum()
    checks = [_check("weight_sum_deficit", abs(1 - s) if args.method != "infinite" else max(0.99 - s, 0),
                     1e-10 if args.method != "infinite" else 0.0),
              _check("max_abs_residual_over_delta_omega",
                     np.max(np.abs(dec.residual)) / config.delta_omega, 1e-10)]
    write_json(_sidecar(path, ".manifest.json"),
               _manifest("eigen", args, config, checks, [path], method=dec.method,
                         n_eigenmodes=len(dec), weight_sum=s))
    return EXIT_OK


def cmd_evolve(args):
    config = resolve_config(args)
    path = _output_path(args)
    t_max = parse_time(args.t_max, config.revival_time)
    t = time_grid(config, t_max, args.samples_per_period)
    if args.method == "eigenbasis":
        traj = evolve_eigenbasis(config, t, args.mode, store_reservoir=args.norm)
    else:
        traj = evolve_rk4(config, t, args.dt, store_reservoir=args.norm)
    header = ["t", "re_a", "im_a", "abs2_a"]
    cols = [t, traj.a.real, traj.a.imag, traj.abs2]
    checks = [_check("initial_amplitude_error", abs(traj.a[0] - 1), 1e-12)]
    if args.norm:
        header.append("norm")
        cols.append(traj.norm)
        tol = 1e-10 if args.method == "eigenbasis" else 1e-8
        checks.append(_check("max_norm_deviation", np.max(np.abs(traj.norm - 1)), tol))
    write_csv(path, header, cols)
    write_json(_sidecar(path, ".manifest.json"),
               _manifest("evolve", args, config, checks, [path], method=traj.method,
                         t_max=t_max, warnings=traj.warnings, info=traj.info))
    return EXIT_OK


def cmd_revivals(args):
    config = resolve_config(args)
    path = _output_path(args)
    gamma, _, T_R = derive_rates(config)
    t_max = parse_time(args.t_max, T_R)
    t = time_grid(config, t_max, args.samples_per_period)
    n_max = int(math.floor(t_max / T_R)) if args.n_max is None else args.n_max
    total = reconstruct(t, config, n_max)
    cols, header = [t], ["t"]
    for n in range(n_max + 1):
        shifted = t - n * T_R
        term = np.zeros_like(t)
        on = shifted >= 0
        term[on] = revival_amplitude(n, shifted[on], gamma)
        cols.append(term)
        header.append(f"a_{n}")
    header.append("reconstructed")
    cols.append(total)
    write_csv(path, header, cols)
    write_json(_sidecar(path, ".manifest.json"),
               _manifest("revivals", args, config, [], [path], n_max=n_max, t_max=t_max,
                         heaviside_at_zero=1))
    return EXIT_OK


def _spectrum_gamma(args):
    if args.gamma is not None:
        return args.gamma, None
    config = resolve_config(args)
    return derive_rates(config)[0], config


def cmd_spectrum(args):
    path = _output_path(args)
    config = None
    if args.window:
        config = resolve_config(args)
        gamma = derive_rates(config)[0]
    else:
        gamma, config = _spectrum_gamma(args)
    grid = omega_grid(args.half_width * gamma, args.spacing * gamma)
    ana = analytic_spectrum(args.order, grid, gamma)
    header = ["omega", "S_analytic", "abs2_S_analytic"]
    cols = [grid, ana.values, ana.abs2]
    report = {"order": args.order, **find_peaks(ana).as_dict()}
    extra = {}
    if args.window:
        lo, hi = (parse_time(s, config.revival_time) for s in args.window.split(":"))
        t = time_grid(config, hi, args.samples_per_period)
        traj = evolve_eigenbasis(config, t)
        win = windowed_spectrum(traj, (lo, hi), grid, gamma, args.order)
        header += ["re_S_windowed", "im_S_windowed", "abs2_S_windowed"]
        cols += [win.values.real, win.values.imag, win.abs2]
        report["windowed"] = find_peaks(win).as_dict()
        extra = {"window": [lo, hi], "warnings": traj.warnings}
    write_csv(path, header, cols)
    peaks_path = _sidecar(path, ".peaks.json")
    write_json(peaks_path, report)
    write_json(_sidecar(path, ".manifest.json"),
               _manifest("spectrum", args, config, [], [path, peaks_path], gamma=gamma,
                         grid={"half_width": float(grid[-1]), "spacing": float(grid[1] - grid[0]),
                               "points": int(grid.size)}, **extra))
    return EXIT_OK


def cmd_ep_matrix(args):
    path = _output_path(args)
    if args.order < 0 or not args.gamma > 0:
        raise UsageError("--order must be >= 0 and --gamma > 0")
    m = ep_matrix(args.order, args.gamma)
    info = jordan_analysis(m)
    write_json(path, {"order": m.order_plus_one, "matrix": m.entries, **info.as_dict()})
    write_json(_sidecar(path, ".manifest.json"), _manifest("ep-matrix", args, None, [], [path]))
    return EXIT_OK


def cmd_verify(args):
    checks = run_suite(args.suite)
    failures = [c.name for c in checks if not c.passed]
    path = _output_path(args, required=False)
    man = _manifest("verify", args, None, checks, [path] if path else [], failures=failures)
    if path:
        write_json(path, man)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.measured:.3e} (tol {c.tolerance:.1e})")
    return EXIT_VERIFY if failures else EXIT_OK


COMMANDS = {"eigen": cmd_eigen, "evolve": cmd_evolve, "revivals": cmd_revivals,
            "spectrum": cmd_spectrum, "ep-matrix": cmd_ep_matrix, "verify": cmd_verify}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ValueError as exc:  # InvalidInputError included
        print(f"nmep: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"nmep: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
