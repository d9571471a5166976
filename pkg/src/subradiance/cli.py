"""Command-line entry point: ``subradiance <command> --config run.json``.

Exit status is 0 on success, 2 for invalid configurations and 1 for
failures during computation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError, validate
from .dynamics import evolve, g2_tau, g2_zero
from .fitting import (
    FitParams,
    Histogram,
    fit_g2,
    fit_report,
    normalize_histogram,
    read_histogram_csv,
)
from .liouvillian import build_liouvillian
from .observables import cooperativity, dicke_populations, population_contrast
from .operators import basis_state, ket_to_dm, top_fock_population
from .steady import steady_state
from .sweep import OBSERVABLES, find_peak_kappa, run_sweep

__all__ = ["main"]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if np.isnan(v) else f"{v:.16e}"


def _emit(text: str, out: str | None, default_name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    p = Path(out)
    if p.is_dir():
        p = p / default_name
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in r])
    return buf.getvalue()


def cmd_steady(rc, args) -> None:
    space, params = rc.space, rc.params
    wanted = rc.raw.get("steady", {}).get("observables")
    if wanted is None:
        wanted = list(OBSERVABLES) if space.n_emitters == 2 else ["cooperativity", "g2_zero"]
    rho = steady_state(build_liouvillian(space, params))
    values = {}
    pops = dicke_populations(rho, space) if set(wanted) & {"p_gg", "p_ee", "p_plus", "p_minus", "contrast"} else None
    for name in wanted:
        if name == "contrast":
            values[name] = population_contrast(pops)
        elif name.startswith("p_"):
            values[name] = getattr(pops, name)
        elif name == "cooperativity":
            values[name] = cooperativity(rho, space)
        elif name == "g2_zero":
            values[name] = g2_zero(space, params, rho)
    values["top_fock_population"] = top_fock_population(rho, space)
    _emit(_csv(["quantity", "value"], values.items()), args.out, "steady.csv")


def _initial_state(rc) -> np.ndarray:
    space = rc.space
    init = rc.raw["evolve"].get("initial_state", "ground")
    if init == "ground":
        return ket_to_dm(basis_state(space, "g" * space.n_emitters))
    if init == "fully-excited":
        return ket_to_dm(basis_state(space, "e" * space.n_emitters))
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    for k, p in enumerate(rc.rho0_diagonal):
        rho[k * space.n_fock, k * space.n_fock] = p
    return rho


def evolve_table(rc) -> str:
    ev = rc.raw["evolve"]
    times = np.linspace(0.0, ev["t_max"], ev["points"]) if ev["t_max"] > 0 else np.array([0.0])
    L = build_liouvillian(rc.space, rc.params)
    traj = evolve(L, _initial_state(rc), times, method=ev.get("method", "RK45"))
    rows = []
    for t, r in zip(traj.times, traj.states):
        p = dicke_populations(r, rc.space)
        rows.append((t, p.p_gg, p.p_ee, p.p_plus, p.p_minus))
    return _csv(["time", "p_gg", "p_ee", "p_plus", "p_minus"], rows)


def cmd_evolve(rc, args) -> None:
    _emit(evolve_table(rc), args.out, "evolve.csv")


def cmd_g2(rc, args) -> None:
    g = rc.raw["g2"]
    delays = np.linspace(0.0, g["tau_max"], g["points"]) if g["tau_max"] > 0 else np.array([0.0])
    curve = g2_tau(rc.space, rc.params, delays, kind=g.get("kind", "collective"),
                   method=g.get("method", "RK45"))
    _emit(_csv(["delay", "value"], zip(curve.delays, curve.values)), args.out, "g2.csv")


def _write_sweep(result, out, stem) -> None:
    if out is None:
        sys.stdout.write(result.to_csv())
        return
    p = Path(out)
    if p.is_dir() or out.endswith("/"):
        p.mkdir(parents=True, exist_ok=True)
        csv_path = p / f"{stem}.csv"
    else:
        p.parent.mkdir(parents=True, exist_ok=True)
        csv_path = p
    result.write(csv_path, csv_path.with_suffix(".json"))


def cmd_sweep(rc, args) -> None:
    _write_sweep(run_sweep(rc.sweep, jobs=args.jobs), args.out, "sweep")


def cmd_fit(rc, args) -> None:
    f = rc.raw["fit"]
    path = Path(f["data"])
    if not path.is_absolute() and args.config:
        path = Path(args.config).parent / path
    h = read_histogram_csv(path)
    if f.get("normalized", False):
        h = Histogram(h.delays, h.counts, True, f["tau_norm_ps"])
    else:
        h = normalize_histogram(h, f["tau_norm_ps"])
    init = None
    if "init" in f:
        i = f["init"]
        init = FitParams(i["A"], i["B"], i["T_a_ps"], i["T_b_ps"])
    p = fit_g2(h, init=init, irf_sigma=f.get("irf_sigma_ps") or None)
    _emit(json.dumps(fit_report(p, h), indent=2) + "\n", args.out, "fit.json")


def _reproduce(name: str, args) -> None:
    raw = cfgmod.builtin(name)
    out = Path(args.out) if args.out else Path(".")
    if name in ("fig3", "figS4", "figS5"):
        rc = validate(raw, "sweep")
        if args.validate_only:
            return
        out.mkdir(parents=True, exist_ok=True)
        run_sweep(rc.sweep, jobs=args.jobs).write(out / f"{name}.csv", out / f"{name}.json")
    elif name == "figS3":
        rcs = []
        for P in raw["pumps"]:
            cfg = {"model": dict(raw["model"], pump=P), "evolve": raw["evolve"]}
            rcs.append((P, validate(cfg, "evolve")))
        if args.validate_only:
            return
        out.mkdir(parents=True, exist_ok=True)
        for P, rc in rcs:
            (out / f"figS3_P{P:g}.csv").write_text(evolve_table(rc))
    elif name == "figS6":
        rc = validate({"model": raw["model"]}, "steady")
        if args.validate_only:
            return
        out.mkdir(parents=True, exist_ok=True)
        rows, peaks = [], {}
        for gam in raw["dephasings"]:
            res = find_peak_kappa(replace(rc.params, dephasing=gam), tuple(raw["kappa_range"]),
                                  raw["points"], rc.space.n_emitters, rc.space.fock_cutoff)
            rows += [(gam, k, v) for k, v in zip(res.kappas, res.g2_values)]
            peaks[str(gam)] = {"kappa_star": res.kappa_star, "g2_peak": res.g2_peak}
        (out / "figS6.csv").write_text(_csv(["dephasing", "kappa", "g2_zero"], rows))
        (out / "figS6_peaks.json").write_text(json.dumps(peaks, indent=2, sort_keys=True) + "\n")


COMMANDS = {
    "steady": cmd_steady,
    "evolve": cmd_evolve,
    "g2": cmd_g2,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subradiance",
        description="Cavity-mediated collective emission: steady states, dynamics, "
                    "photon correlations and g2 histogram fits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output file or directory (default: stdout)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--validate-only", action="store_true",
                       help="check the configuration and exit without computing")

    for name in COMMANDS:
        common(sub.add_parser(name))
    rep = sub.add_parser("reproduce", help="run a bundled figure configuration")
    rep.add_argument("figure", choices=sorted(cfgmod.BUILTIN))
    common(rep, needs_config=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        if args.command == "reproduce":
            _reproduce(args.figure, args)
        else:
            rc = validate(cfgmod.load_config(args.config), args.command)
            if not args.validate_only:
                COMMANDS[args.command](rc, args)
    except ConfigError as exc:
        print(f"error: ConfigError: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surfaced as a typed message, not a traceback
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.validate_only:
        print("config valid", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
