"""Command-line interface: simulate, period, floquet-scan, blowup, spectrum.

Every subcommand reads optional defaults from an INI-style config file
(section named after the subcommand) with explicit command-line flags taking
precedence, validates the merged configuration before any computation, and
writes CSV/JSON with 17 significant digits so identical configurations
produce byte-identical outputs.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import blowup as blowup_mod
from . import conserved, floquet
from .integrator import IntegrationError, IntegratorConfig
from .systems import SYSTEMS, equilibrium_spectrum, get_system, system_density
from .integrator import integrate

__all__ = ["main", "RunConfig", "UsageError", "read_trajectory_csv",
           "read_period_csv"]

F = "{:.17g}".format


class UsageError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    """Merged (config file < command line) parameters of one subcommand."""

    subcommand: str
    system: Optional[str] = None
    init: Optional[str] = None
    eps: Optional[float] = None
    grid: Optional[str] = None
    rtol: float = 1e-10
    atol: float = 1e-10
    t_max: Optional[float] = None
    out: Optional[str] = None
    jobs: Optional[int] = None
    bz0: Optional[float] = None
    bz0_grid: Optional[str] = None
    plot_script: Optional[str] = None

    def integrator_config(self) -> IntegratorConfig:
        cfg = IntegratorConfig(rtol=self.rtol, atol=self.atol)
        try:
            cfg.validate()
        except ValueError as exc:
            raise UsageError(f"rtol/atol: {exc}") from None
        return cfg

    def parsed_init(self, dim: int) -> np.ndarray:
        if self.init is None:
            raise UsageError("init: missing initial state")
        try:
            vals = np.array([float(v) for v in self.init.split(",")])
        except ValueError:
            raise UsageError(f"init: not a comma-separated float list: "
                             f"{self.init!r}") from None
        if vals.shape != (dim,):
            raise UsageError(
                f"init: system {self.system!r} needs {dim} components, "
                f"got {len(vals)}")
        return vals

    def parsed_grid(self) -> np.ndarray:
        if self.grid is None:
            raise UsageError("grid: missing (use start:stop:step)")
        parts = self.grid.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid: expected start:stop:step, got {self.grid!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise UsageError(f"grid: non-numeric entry in {self.grid!r}") from None
        if step <= 0.0 or stop <= start:
            raise UsageError("grid: need stop > start and step > 0")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        vals = start + step * np.arange(n)
        if vals.size == 0:
            raise UsageError("grid: empty")
        return vals


def _merge_config(args: argparse.Namespace, defaults: dict) -> RunConfig:
    merged = dict(defaults)
    if args.config:
        parser = configparser.ConfigParser()
        read = parser.read(args.config)
        if not read:
            raise UsageError(f"config: cannot read {args.config!r}")
        if parser.has_section(args.subcommand):
            for key, val in parser.items(args.subcommand):
                key = key.replace("-", "_")
                if key not in merged:
                    raise UsageError(f"config: unknown key {key!r} in "
                                     f"[{args.subcommand}]")
                merged[key] = val
    for key in merged:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val
    # coerce strings coming from the config file
    for key in ("eps", "rtol", "atol", "t_max", "bz0"):
        if key in merged and merged[key] is not None:
            try:
                merged[key] = float(merged[key])
            except (TypeError, ValueError):
                raise UsageError(f"{key}: not a number: {merged[key]!r}") from None
    if merged.get("jobs") is not None:
        try:
            merged["jobs"] = int(merged["jobs"])
        except (TypeError, ValueError):
            raise UsageError(f"jobs: not an integer: {merged['jobs']!r}") from None
    return RunConfig(subcommand=args.subcommand, **merged)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.system not in SYSTEMS:
        raise UsageError(f"system: unknown {cfg.system!r}; "
                         f"choose from {sorted(SYSTEMS)}")
    sysdef = get_system(cfg.system)
    y0 = cfg.parsed_init(sysdef.dim)
    if cfg.t_max is None or cfg.t_max <= 0.0:
        raise UsageError("t-max: must be a positive number")
    if cfg.out is None:
        raise UsageError("out: missing output path")
    icfg = cfg.integrator_config()
    traj = integrate(sysdef.rhs, y0, 0.0, cfg.t_max, icfg,
                     raise_on_limit=False)
    with_k = cfg.system == "axisym2"
    header = (["t"] + list(sysdef.labels) + ["density"]
              + (["K"] if with_k else []))
    with open(cfg.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, row in zip(traj.times, traj.states):
            rec = [F(t)] + [F(v) for v in row]
            rec.append(F(system_density(cfg.system, row)))
            if with_k:
                rec.append(F(conserved.first_integral_K(row[0], row[1])))
            writer.writerow(rec)
    if traj.status != "completed":
        print(f"simulate: terminated early ({traj.status}) at "
              f"t={traj.t_final}", file=sys.stderr)
    return 0


def cmd_period(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise UsageError("out: missing output path")
    if cfg.eps is not None:
        grid = np.array([cfg.eps])
    else:
        grid = cfg.parsed_grid()
    for e in grid:
        if not (0.0 < e < 0.5):
            raise UsageError(f"eps: {e} outside (0, 0.5)")
    icfg = cfg.integrator_config()
    rows = [conserved.compute_period(float(e), icfg) for e in grid]
    with open(cfg.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "T_quadrature", "T_event", "T_asymptotic",
                         "A_minus", "A_plus", "K"])
        for r in rows:
            writer.writerow([F(r.epsilon), F(r.T_quadrature), F(r.T_event),
                             F(r.T_asymptotic), F(r.A_minus), F(r.A_plus),
                             F(r.K)])
    return 0


_GNUPLOT_TEMPLATE = """\
# |multiplier| magnitudes against base amplitude
set datafile separator ','
set key autotitle columnhead
set xlabel 'A*'
set ylabel '|lambda|'
set grid
plot {plots}
"""


def cmd_floquet_scan(cfg: RunConfig) -> int:
    if cfg.system not in floquet.VARIATIONAL_SYSTEMS:
        raise UsageError(
            f"system: unknown variational system {cfg.system!r}; choose "
            f"from {sorted(floquet.VARIATIONAL_SYSTEMS)}")
    if cfg.out is None:
        raise UsageError("out: missing output path")
    grid = cfg.parsed_grid()
    for a in grid:
        if not (0.0 < a < 0.5):
            raise UsageError(f"grid: amplitude {a} outside (0, 0.5)")
    rows = floquet.scan(cfg.system, grid, cfg.integrator_config(),
                        jobs=cfg.jobs)
    floquet.write_scan_csv(rows, cfg.out)
    if cfg.plot_script:
        n = len(rows[0].lambda_abs)
        plots = ", ".join(
            f"'{cfg.out}' using 1:{i + 3} with lines" for i in range(n))
        with open(cfg.plot_script, "w") as fh:
            fh.write(_GNUPLOT_TEMPLATE.format(plots=plots))
    return 0


def cmd_blowup(cfg: RunConfig) -> int:
    if cfg.system not in SYSTEMS:
        raise UsageError(f"system: unknown {cfg.system!r}; "
                         f"choose from {sorted(SYSTEMS)}")
    if cfg.t_max is None or cfg.t_max <= 0.0:
        raise UsageError("t-max: must be a positive number")
    if cfg.out is None:
        raise UsageError("out: missing output path prefix")
    sysdef = get_system(cfg.system)
    icfg = cfg.integrator_config()
    if cfg.bz0_grid is not None:
        if cfg.system != "radial5":
            raise UsageError("bz0-grid: only meaningful for system radial5")
        base = cfg.parsed_init(4)
        parts = cfg.bz0_grid.split(":")
        if len(parts) != 3:
            raise UsageError(f"bz0-grid: expected start:stop:step, "
                             f"got {cfg.bz0_grid!r}")
        start, stop, step = (float(p) for p in parts)
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        grid = start + step * np.arange(n)
        table = blowup_mod.magnetic_threshold_probe(base, grid, cfg.t_max,
                                                    icfg)
        with open(cfg.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["Bz0", "verdict", "t_c_estimate", "reason",
                             "max_norm", "max_A"])
            for bz0, rep in table:
                writer.writerow([
                    F(bz0), rep.verdict,
                    "" if rep.t_c_estimate is None else F(rep.t_c_estimate),
                    rep.reason, F(rep.max_norm_observed),
                    F(rep.max_A_observed)])
        return 0
    y0 = cfg.parsed_init(sysdef.dim)
    report = blowup_mod.simulate_until_blowup(sysdef, y0, cfg.t_max, icfg)
    blowup_mod.write_report_json(report, cfg.out + ".json")
    blowup_mod.write_series_csv(report.trajectory, sysdef.labels,
                                cfg.out + ".csv")
    print(f"blowup: {report.verdict} ({report.reason})"
          + ("" if report.t_c_estimate is None
             else f" t_c~{report.t_c_estimate:.6g}"))
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    if cfg.bz0 is None:
        raise UsageError("bz0: missing magnetic field value")
    spec = equilibrium_spectrum(cfg.bz0)
    lines = [f"lambda_{k + 1} = {F(ev.real)} {'+' if ev.imag >= 0 else '-'} "
             f"{F(abs(ev.imag))}i" for k, ev in enumerate(spec.eigenvalues)]
    text = "\n".join(lines)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["re", "im"])
            for ev in spec.eigenvalues:
                writer.writerow([F(ev.real), F(ev.imag)])
    print(text)
    return 0


# ---------------------------------------------------------------------------
# Readers (round-trip counterparts of the writers above)
# ---------------------------------------------------------------------------


def read_trajectory_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in rec] for rec in reader]
    data = np.array(rows)
    return header, data


def read_period_csv(path):
    return read_trajectory_csv(path)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldplasma",
        description="Affine cold-plasma oscillations: trajectories, periods, "
                    "Floquet multiplier scans, blow-up experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--rtol", type=float, default=None,
                       help="relative tolerance (default 1e-10)")
        p.add_argument("--atol", type=float, default=None,
                       help="absolute tolerance (default 1e-10)")
        p.add_argument("--config", default=None,
                       help="INI config file; section [<subcommand>]")
        p.add_argument("--out", default=None, help="output path")

    p = sub.add_parser("simulate", help="integrate a system, write CSV "
                       "(t, components, density, K for axisym2)")
    p.add_argument("--system", default=None, choices=sorted(SYSTEMS))
    p.add_argument("--init", default=None,
                   help="comma-separated initial state")
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    add_common(p)

    p = sub.add_parser("period", help="period table CSV (epsilon, "
                       "T_quadrature, T_event, T_asymptotic, A_minus, "
                       "A_plus, K) over an amplitude grid")
    p.add_argument("--eps", type=float, default=None,
                   help="single amplitude A(0)")
    p.add_argument("--grid", default=None, help="start:stop:step amplitudes")
    add_common(p)

    p = sub.add_parser("floquet-scan", help="multiplier scan CSV "
                       "(A_star, T, |lambda| sorted, S, class)")
    p.add_argument("--system", default=None,
                   choices=sorted(floquet.VARIATIONAL_SYSTEMS))
    p.add_argument("--grid", default=None, help="start:stop:step amplitudes")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker threads (default: cpu count)")
    p.add_argument("--plot-script", dest="plot_script", default=None,
                   help="also emit a gnuplot script drawing |lambda| vs A*")
    add_common(p)

    p = sub.add_parser("blowup", help="blow-up experiment: JSON report + "
                       "time-series CSV (or verdict table with --bz0-grid)")
    p.add_argument("--system", default=None, choices=sorted(SYSTEMS))
    p.add_argument("--init", default=None,
                   help="comma-separated initial state "
                        "((a,c,A,C) with --bz0-grid)")
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    p.add_argument("--bz0-grid", dest="bz0_grid", default=None,
                   help="start:stop:step of initial Bz (radial5 only)")
    add_common(p)

    p = sub.add_parser("spectrum", help="equilibrium eigenvalues for a "
                       "given magnetic field Bz0")
    p.add_argument("--bz0", type=float, default=None)
    add_common(p)
    return parser


_DEFAULTS = {
    "simulate": dict(system=None, init=None, t_max=None, rtol=1e-10,
                     atol=1e-10, out=None),
    "period": dict(eps=None, grid=None, rtol=1e-10, atol=1e-10, out=None),
    "floquet-scan": dict(system=None, grid=None, jobs=None,
                         plot_script=None, rtol=1e-10, atol=1e-10, out=None),
    "blowup": dict(system=None, init=None, t_max=None, bz0_grid=None,
                   rtol=1e-10, atol=1e-10, out=None),
    "spectrum": dict(bz0=None, rtol=1e-10, atol=1e-10, out=None),
}

_HANDLERS = {
    "simulate": cmd_simulate,
    "period": cmd_period,
    "floquet-scan": cmd_floquet_scan,
    "blowup": cmd_blowup,
    "spectrum": cmd_spectrum,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args, _DEFAULTS[args.subcommand])
        return _HANDLERS[args.subcommand](cfg)
    except UsageError as exc:
        parser.error(str(exc))  # exits with code 2
    except (IntegrationError, conserved.InvalidAmplitude,
            conserved.EventNotFound, conserved.SingularDensity,
            conserved.NoBoundedOrbit) as exc:
        print(f"coldplasma {args.subcommand}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
