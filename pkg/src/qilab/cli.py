"""Command-line front end: ``qilab <subcommand> [flags]``.

Exit codes: 0 success, 1 invalid flags or configuration, 2 numerical failure.
Data files carry no timestamps; each run also writes ``manifest.json``.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .density import DensityError, density_profile, e_ke_closed, energy_report, profile_grid
from .lattice import (LatticeConfig, LatticeConfigError, oracle_run, phi2_difference,
                      phi2_difference_continuum, regulator_offset, total_energy_diagnostics,
                      vacuum_bands)
from .modes import overlap_table
from .pulses import evolve, quantum_interest_report
from .quadrature import QuadratureError, QuadratureSpec
from .ramp import RampConfig, ramp_run
from .sampling import DivergenceError, eta_threshold, violation_report
from .well import OverflowDomainError, WellConfig

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _eta(text: str):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--eta takes a number or 'auto', got {text!r}")


def _well_flags(p, kmax=True):
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--lam", type=float, default=1.0)
    if kmax:
        p.add_argument("--kmax", type=float, default=None, help="branch-cut cutoff (default 200/a)")
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--out", type=Path, default=Path("."))


def _profile_flags(p):
    p.add_argument("--grid", type=int, default=401)
    p.add_argument("--xmax", type=float, default=None, help="half-width of the grid (default 2a)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qilab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qilab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("density", help="T00R profile CSV and energy report JSON")
    _well_flags(p)
    _profile_flags(p)

    p = sub.add_parser("energy", help="E_KE by both routes and the profile integral")
    _well_flags(p)
    p.add_argument("--grid", type=int, default=401, help="interior samples for the profile route")

    p = sub.add_parser("qi", help="exponential-plateau quantum-inequality test")
    _well_flags(p)
    p.add_argument("--eta", type=_eta, default="auto")

    p = sub.add_parser("modes", help="overlap table C_kq on a momentum grid")
    _well_flags(p)
    p.add_argument("--k", type=_floats, default=None, help="momenta (default 20 points up to 10/a)")
    p.add_argument("--q", type=_floats, default=None)

    p = sub.add_parser("ramp", help="first-order kinetic-energy change over a linear ramp")
    _well_flags(p, kmax=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--kmax", type=float, default=None, help="momentum cutoff (default 50/a)")
    p.add_argument("--nk", type=int, default=None, help="uniform momentum panels above 1/a")

    p = sub.add_parser("pulses", help="post-quench density snapshots")
    _well_flags(p)
    _profile_flags(p)
    p.add_argument("--t", type=_floats, required=True)

    p = sub.add_parser("oracle", help="lattice vacuum, quench and total-energy diagnostics")
    _well_flags(p)
    p.add_argument("--L", type=float, default=None, help="box half-length (default 10a)")
    p.add_argument("--M", type=int, default=2048)
    p.add_argument("--t", type=_floats, default=[0.0])

    p = sub.add_parser("compare", help="continuum and lattice densities side by side")
    _well_flags(p)
    _profile_flags(p)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--M", type=int, default=2048)
    p.add_argument("--t", type=_floats, default=[0.0])
    return parser


def _config(args) -> tuple[WellConfig, QuadratureSpec]:
    try:
        cfg = WellConfig(args.v0, args.a, args.lam)
        kmax = args.kmax if args.command != "ramp" else None
        quad = QuadratureSpec(kappa_max=kmax, rel_tol=args.rtol)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return cfg, quad


def _profile(args, cfg, quad):
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    xmax = 2.0 * cfg.a if args.xmax is None else args.xmax
    if not xmax > 0:
        raise UsageError("--xmax must be positive")
    return density_profile(cfg, profile_grid(cfg, args.grid, xmax), quad)


def _tag(t: float) -> str:
    return f"{t:.6g}".replace("-", "m")


def cmd_density(args, out: Path, man: io.RunManifest) -> dict:
    cfg, quad = _config(args)
    prof = _profile(args, cfg, quad)
    rep = energy_report(cfg, quad)
    man.add(io.write_profile(out / "density.csv", prof))
    man.add(io.write_json(out / "energy.json", rep.as_json()))
    return rep.as_json()


def cmd_energy(args, out, man) -> dict:
    cfg, quad = _config(args)
    rep = energy_report(cfg, quad, n_interior=args.grid)
    man.add(io.write_json(out / "energy.json", rep.as_json()))
    return rep.as_json()


def cmd_qi(args, out, man) -> dict:
    cfg, quad = _config(args)
    eta = args.eta
    if eta == "auto":
        star = eta_threshold(e_ke_closed(cfg, quad))
        # with no negative energy there is no threshold; any positive eta will do
        eta = star / 2 if star > 0 else 1.0 / cfg.a
    if not eta > 0:
        raise UsageError("--eta must be positive")
    rep = violation_report(cfg, eta, quad).as_json()
    man.add(io.write_json(out / "qi.json", rep))
    return rep


def cmd_modes(args, out, man) -> dict:
    cfg, _ = _config(args)
    k = np.asarray(args.k if args.k else np.linspace(0.5, 10.0, 20) / cfg.a)
    q = np.asarray(args.q) if args.q else None
    if np.any(k <= 0) or (q is not None and np.any(q <= 0)):
        raise UsageError("momenta must be positive")
    table = overlap_table(cfg, k, q)
    man.add(io.write_overlaps(out / "overlaps.csv", table))
    return {"v0": cfg.v0, "a": cfg.a, "n_k": int(k.size), "n_q": int(table.q.size)}


def cmd_ramp(args, out, man) -> dict:
    cfg, quad = _config(args)
    try:
        probe = RampConfig(args.alpha, cfg, k_max=args.kmax)
        width = None
        if args.nk is not None:
            if args.nk < 1:
                raise UsageError("--nk must be positive")
            width = max(probe.cutoff - 1.0 / cfg.a, 1.0 / cfg.a) / args.nk
        rcfg = RampConfig(args.alpha, cfg, k_max=args.kmax, panel_width=width)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = ramp_run(rcfg, quad)
    summary = res.summary()
    summary["warnings"] = [str(w.message) for w in caught]
    man.add(io.write_ramp(out / "ramp.csv", res))
    man.add(io.write_json(out / "ramp.json", summary))
    return summary


def cmd_pulses(args, out, man) -> dict:
    cfg, quad = _config(args)
    times = sorted(set(args.t))
    if any(t < 0 for t in times):
        raise UsageError("--t values must be non-negative")
    prof = _profile(args, cfg, quad)
    snaps = [evolve(prof, t) for t in times]
    for s in snaps:
        man.add(io.write_snapshot(out / f"pulses_t{_tag(s.t)}.csv", s))
    rep = quantum_interest_report(snaps)
    man.add(io.write_json(out / "pulses.json", rep))
    return rep


def _lattice(args, cfg) -> LatticeConfig:
    L = 10.0 * cfg.a if args.L is None else args.L
    try:
        return LatticeConfig(L, args.M, cfg)
    except LatticeConfigError as exc:
        raise UsageError(str(exc)) from exc


def cmd_oracle(args, out, man) -> dict:
    cfg, quad = _config(args)
    lcfg = _lattice(args, cfg)
    times = sorted(set(args.t))
    dens = oracle_run(lcfg, times)
    for t, d in dens.items():
        man.add(io.write_lattice_density(out / f"lattice_t{_tag(t)}.csv", lcfg.x, d))
    if cfg.is_free:
        diag = {"total_energy": 0.0, "e_ke_continuum": 0.0, "L": lcfg.L, "M": lcfg.M,
                "phi2_difference": 0.0, "phi2_difference_continuum": 0.0}
    else:
        bands = vacuum_bands(lcfg)
        diag = total_energy_diagnostics(bands, lcfg, quad)
        diag["phi2_difference"] = phi2_difference(bands, lcfg, 0.0)
        diag["phi2_difference_continuum"] = phi2_difference_continuum(cfg, lcfg.L, 0.0)
    man.add(io.write_json(out / "oracle.json", diag))
    return diag


def cmd_compare(args, out, man) -> dict:
    cfg, quad = _config(args)
    lcfg = _lattice(args, cfg)
    times = sorted(set(args.t))
    if any(t < 0 for t in times):
        raise UsageError("--t values must be non-negative")
    prof = _profile(args, cfg, quad)
    dens = oracle_run(lcfg, times)
    rows = []
    worst = {}
    for t in times:
        snap = evolve(prof, t)
        lat = np.interp(snap.grid, lcfg.x, dens[t])
        off = 0.5 * (regulator_offset(cfg, snap.grid - t) + regulator_offset(cfg, snap.grid + t))
        if t == 0:
            off = regulator_offset(cfg, snap.grid)
        for x, c, l, o in zip(snap.grid, snap.values, lat, off):
            rows.append((t, x, c, l, o))
        worst[_tag(t)] = float(np.max(np.abs(lat - snap.values - off)))
    man.add(io.write_csv(out / "compare.csv", ("t", "x", "continuum", "lattice", "regulator_offset"),
                         rows))
    summary = {"v0": cfg.v0, "a": cfg.a, "L": lcfg.L, "M": lcfg.M,
               "max_abs_residual_after_offset": worst}
    man.add(io.write_json(out / "compare.json", summary))
    return summary


COMMANDS = {
    "density": cmd_density, "energy": cmd_energy, "qi": cmd_qi, "modes": cmd_modes,
    "ramp": cmd_ramp, "pulses": cmd_pulses, "oracle": cmd_oracle, "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Path(args.out)
    params = {k: v for k, v in vars(args).items() if k != "out"}
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in params.items()}
    man = io.RunManifest(args.command, params, __version__)
    try:
        summary = COMMANDS[args.command](args, out, man)
    except UsageError as exc:
        print(f"qilab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DensityError, QuadratureError, DivergenceError, OverflowDomainError,
            FloatingPointError) as exc:
        print(f"qilab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LatticeConfigError as exc:
        print(f"qilab {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    man.write(out)
    print(json.dumps(io._plain(summary), sort_keys=False, default=str, allow_nan=True))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
