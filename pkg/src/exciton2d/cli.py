"""Command-line front end: ``exciton2d {gamma,kc,sweep,emission,oracle-check}``."""
from __future__ import annotations

import argparse
from dataclasses import replace
import io
import math
import sys
from typing import List, Optional

import numpy as np

from .config import ConfigError, DipoleOrientation, LatticeConfig, parse_config, validate_config
from .damping import NoCrossingError, critical_k, gamma_exciton
from .dispersion import WaveVector2D, exciton_energy
from .oracle import OracleSettings, oracle_sweep
from .sweep import (
    FIGURES,
    SWEPT_VARIABLES,
    SweepSpec,
    emission_report,
    fmt_float,
    run_sweep,
    write_emission_table,
    write_table,
)
from .units import CONSTANTS, rate_ev_to_per_s


def _load(args) -> tuple:
    if args.config:
        cfg, dip = parse_config(args.config)
    else:
        cfg, dip = LatticeConfig(), DipoleOrientation()
    over = {}
    if getattr(args, "theta", None) is not None:
        over["theta"] = args.theta
    if getattr(args, "phi", None) is not None:
        over["phi"] = args.phi
    if over:
        dip = replace(dip, **over)
        validate_config(cfg, dip)
    return cfg, dip


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "wb") as fh:
            fh.write(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def _band_energy(cfg, e0):
    return exciton_energy(cfg, WaveVector2D(e0 / CONSTANTS.hbar_c, 0.0))


def cmd_gamma(args) -> int:
    cfg, dip = _load(args)
    E_ex = _band_energy(cfg, args.e0)
    res = gamma_exciton(cfg, dip, E_ex, args.e0)
    lines = ["e0_ev,e_ex_ev,gamma_ev,gamma_per_s,gamma_at_ev,ratio,regime"]
    if res.divergent:
        g = r = gs = "DIVERGENT"
    else:
        g, r, gs = fmt_float(res.gamma), fmt_float(res.ratio), fmt_float(rate_ev_to_per_s(res.gamma))
    lines.append(
        ",".join([fmt_float(args.e0), fmt_float(E_ex), g, gs, fmt_float(res.gamma_at), r, str(res.regime)])
    )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_kc(args) -> int:
    cfg, _ = _load(args)
    cp = critical_k(cfg, tuple(args.direction))
    text = (
        "k_c_per_angstrom,e0_c_ev,direction_x,direction_y,residual_ev,zone_edge_ev\n"
        f"{fmt_float(cp.k_c)},{fmt_float(cp.E_0_c)},{fmt_float(cp.direction[0])},"
        f"{fmt_float(cp.direction[1])},{fmt_float(cp.residual)},"
        f"{fmt_float(CONSTANTS.hbar_c * math.pi / cfg.a)}\n"
    )
    _emit(text, args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg, dip = _load(args)
    rng = None
    if args.start is not None or args.stop is not None or args.samples is not None:
        if args.start is None or args.stop is None or args.samples is None:
            raise ValueError("--start, --stop and --samples must be given together")
        rng = (args.start, args.stop, args.samples)
    if args.figure:
        spec = SweepSpec.for_figure(args.figure, rng)
    else:
        if args.var is None or rng is None:
            raise ValueError("--custom needs --var, --start, --stop and --samples")
        fixed = {"theta": dip.theta, "phi": dip.phi}
        if args.e0 is not None:
            fixed["E_0"] = args.e0
        fixed.pop(args.var, None)
        spec = SweepSpec("custom", args.var, rng, fixed)
    rows = run_sweep(spec, cfg, dip, with_oracle=args.oracle, workers=args.workers)
    if args.out:
        write_table(rows, args.out)
    else:
        write_table(rows, sys.stdout)
    return 0


def cmd_emission(args) -> int:
    cfg, dip = _load(args)
    E_ex = _band_energy(cfg, args.e0)
    n_sites = args.n_sites if args.n_sites is not None else cfg.n_sites
    times = np.linspace(args.t_start, args.t_stop, args.n_times)
    rows = emission_report(cfg, dip, E_ex, args.e0, n_sites, times, args.z)
    write_emission_table(rows, args.out if args.out else sys.stdout)
    return 0


def cmd_oracle_check(args) -> int:
    cfg, dip = _load(args)
    thetas = np.linspace(0.0, math.pi / 2, args.n_theta)
    phis = np.linspace(0.0, math.pi, args.n_phi)
    e0s = np.linspace(args.e0_min, args.e0_max, args.n_e0)
    grid = [(t, p, e) for t in thetas for p in phis for e in e0s]
    table = oracle_sweep(grid, cfg, dip.mu, OracleSettings(), workers=args.workers)
    buf = io.StringIO()
    buf.write("theta,phi,e0_ev,closed_ev,oracle_ev,rel_err,error\n")
    for r in table.rows:
        cells = [fmt_float(r.theta), fmt_float(r.phi), fmt_float(r.E_0)]
        for v in (r.closed_form, r.oracle, r.relative_error):
            cells.append("" if v is None else fmt_float(v))
        cells.append((r.error or "").replace(",", ";"))
        buf.write(",".join(cells) + "\n")
    _emit(buf.getvalue(), args.out)
    worst = table.max_relative_error
    print(f"max relative error: {worst!r} ({len(table.flagged)} flagged rows)", file=sys.stderr)
    return 0 if worst is not None and worst <= args.tol else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exciton2d",
        description="Radiative damping and emission of excitons in a 2D square optical lattice.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, angles=True):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--out", help="output path (default: stdout)")
        if angles:
            p.add_argument("--theta", type=float, help="dipole tilt from z (rad), overrides config")
            p.add_argument("--phi", type=float, help="angle between k and in-plane dipole (rad)")

    p = sub.add_parser("gamma", help="damping rate at a single point")
    common(p)
    p.add_argument("--e0", type=float, required=True, help="photon line energy hbar c k (eV)")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("kc", help="critical (light-cone) wavevector")
    common(p, angles=False)
    p.add_argument("--direction", type=float, nargs=2, default=(1.0, 0.0), metavar=("DX", "DY"))
    p.set_defaults(func=cmd_kc)

    p = sub.add_parser("sweep", help="figure reproduction or custom sweep")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--figure", choices=sorted(FIGURES), help="built-in figure parameters")
    g.add_argument("--custom", action="store_true", help="sweep --var over --start/--stop")
    p.add_argument("--var", choices=SWEPT_VARIABLES)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--e0", type=float, help="fixed E_0 (eV) for phi/theta sweeps")
    p.add_argument("--oracle", action="store_true", help="add golden-rule oracle columns")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("emission", help="population and intensity versus time")
    common(p)
    p.add_argument("--e0", type=float, required=True)
    p.add_argument("--n-sites", type=int, help="number of lattice sites (default n_x*n_y)")
    p.add_argument("--z", type=float, default=0.0, help="distance from the lattice plane (Angstrom)")
    p.add_argument("--t-start", type=float, default=0.0, help="s")
    p.add_argument("--t-stop", type=float, required=True, help="s")
    p.add_argument("--n-times", type=int, default=101)
    p.set_defaults(func=cmd_emission)

    p = sub.add_parser("oracle-check", help="closed form versus golden-rule oracle on a grid")
    common(p, angles=False)
    p.add_argument("--n-theta", type=int, default=5)
    p.add_argument("--n-phi", type=int, default=5)
    p.add_argument("--n-e0", type=int, default=9)
    p.add_argument("--e0-min", type=float, default=0.05)
    p.add_argument("--e0-max", type=float, default=0.85)
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return 2
    except (ValueError, NoCrossingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
