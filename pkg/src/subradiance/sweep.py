"""Parameter-grid evaluation of steady-state observables.

Each grid point is an independent task keyed by its flat index; results are
always assembled in index order, so the output does not depend on the worker
count or completion order.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import DarkStateError, evolve, g2_zero
from .liouvillian import SystemParams, build_liouvillian
from .observables import (
    UndefinedObservable,
    UnsupportedEmitterCount,
    cooperativity,
    dicke_populations,
    population_contrast,
)
from .operators import CUTOFF_TOLERANCE, basis_state, build_space, ket_to_dm, top_fock_population
from .steady import SteadyStateError, steady_state

__all__ = [
    "AXIS_NAMES",
    "OBSERVABLES",
    "Axis",
    "SweepSpec",
    "SweepResult",
    "run_sweep",
    "evaluate_point",
    "NoPeakError",
    "PeakResult",
    "find_peak_kappa",
    "PopulationTable",
    "population_trajectories",
]

AXIS_NAMES = ("kappa", "pump", "dephasing", "coupling", "n_emitters")
OBSERVABLES = ("p_gg", "p_ee", "p_plus", "p_minus", "contrast", "cooperativity", "g2_zero")
STATUSES = ("ok", "undefined", "cutoff-violation", "solver-error")
MAX_EMITTERS = 4

_PARAM_FIELD = {"kappa": "kappa", "pump": "pump", "dephasing": "dephasing", "coupling": "g"}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    points: int
    scale: str = "log"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if self.scale not in ("log", "linear"):
            raise ValueError(f"axis scale must be 'log' or 'linear', got {self.scale!r}")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError(f"axis {self.name!r} needs at least 2 points")
        if not self.max > self.min:
            raise ValueError(f"axis {self.name!r}: max must exceed min")
        if self.scale == "log" and self.min <= 0:
            raise ValueError(f"log axis {self.name!r} needs positive bounds")
        if self.name == "n_emitters":
            if self.scale != "linear":
                raise ValueError("n_emitters axis must be linear")
            vals = self.values()
            if len(set(vals)) != len(vals) or vals[0] < 1 or vals[-1] > MAX_EMITTERS:
                raise ValueError(
                    f"n_emitters axis must give distinct integers in 1..{MAX_EMITTERS}")
        elif self.min < 0:
            raise ValueError(f"axis {self.name!r} must be non-negative")

    def values(self) -> list:
        if self.name == "n_emitters":
            return [int(round(v)) for v in np.linspace(self.min, self.max, int(self.points))]
        if self.scale == "log":
            return list(np.logspace(np.log10(self.min), np.log10(self.max), int(self.points)))
        return list(np.linspace(self.min, self.max, int(self.points)))


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition.

    ``max_fock_cutoff`` enables per-point cutoff escalation: a point whose
    top Fock level exceeds the tolerance is recomputed with a larger cutoff
    (doubling, capped at ``max_fock_cutoff``). Leave it ``None`` to keep
    ``fock_cutoff`` fixed and flag such points as ``cutoff-violation``.
    """

    axes: tuple[Axis, ...]
    fixed: SystemParams
    observables: tuple[str, ...] = OBSERVABLES
    fock_cutoff: int = 3
    n_emitters: int = 2
    max_fock_cutoff: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "observables", tuple(self.observables))
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a sweep needs one or two axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"axis names must be distinct, got {names}")
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad or not self.observables:
            raise ValueError(f"unknown observables {bad}; expected a subset of {OBSERVABLES}")
        if len(set(self.observables)) != len(self.observables):
            raise ValueError("observables must be distinct")
        if self.fock_cutoff < 1:
            raise ValueError("fock_cutoff must be >= 1")
        if self.max_fock_cutoff is not None and self.max_fock_cutoff < self.fock_cutoff:
            raise ValueError("max_fock_cutoff must be >= fock_cutoff")
        if not 1 <= self.n_emitters <= MAX_EMITTERS:
            raise ValueError(f"n_emitters must be in 1..{MAX_EMITTERS}")
        if self.fixed.detunings is not None and "n_emitters" in names:
            raise ValueError("explicit detunings cannot be combined with an n_emitters axis")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(a.points) for a in self.axes)

    def grid(self) -> list[tuple]:
        return list(itertools.product(*(a.values() for a in self.axes)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axes"] = [asdict(a) for a in self.axes]
        d["fixed"] = asdict(self.fixed)
        d["observables"] = list(self.observables)
        return d


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[dict] = field(default_factory=list)

    def status_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(STATUSES, 0)
        for r in self.rows:
            counts[r["status"]] += 1
        return counts

    def column(self, name: str) -> np.ndarray:
        """Observable or axis values reshaped to the grid (NaN where missing)."""
        vals = np.array([r.get(name, math.nan) for r in self.rows], dtype=float)
        return vals.reshape(self.spec.shape)

    def to_csv(self) -> str:
        """CSV text: axis columns, observables in spec order, status.

        Wall time is deliberately omitted so the file is byte-reproducible.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        axes = [a.name for a in self.spec.axes]
        w.writerow(axes + list(self.spec.observables) + ["status"])
        for r in self.rows:
            w.writerow([_fmt(r[a]) for a in axes]
                       + [_fmt(r.get(o, math.nan)) for o in self.spec.observables]
                       + [r["status"]])
        return buf.getvalue()

    def sidecar(self) -> str:
        return json.dumps({"spec": self.spec.to_dict(), "rows": len(self.rows),
                           "status_counts": self.status_counts()}, indent=2, sort_keys=True)

    def write(self, csv_path, json_path=None) -> None:
        with open(csv_path, "w", newline="") as f:
            f.write(self.to_csv())
        if json_path is not None:
            with open(json_path, "w") as f:
                f.write(self.sidecar() + "\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.16e}"


def _point_params(spec: SweepSpec, values: tuple) -> tuple[SystemParams, int]:
    params, n = spec.fixed, spec.n_emitters
    for axis, v in zip(spec.axes, values):
        if axis.name == "n_emitters":
            n = int(v)
        else:
            params = replace(params, **{_PARAM_FIELD[axis.name]: float(v)})
    return params, n


def _observables(rho, space, params, wanted) -> tuple[dict, bool]:
    out, undefined = {}, False
    pops = None
    for name in wanted:
        try:
            if name in ("p_gg", "p_ee", "p_plus", "p_minus", "contrast"):
                if pops is None:
                    pops = dicke_populations(rho, space)
                out[name] = population_contrast(pops) if name == "contrast" else getattr(pops, name)
            elif name == "cooperativity":
                out[name] = cooperativity(rho, space)
            elif name == "g2_zero":
                out[name] = g2_zero(space, params, rho)
        except (UndefinedObservable, UnsupportedEmitterCount, DarkStateError):
            out[name] = math.nan
            undefined = True
    return out, undefined


def evaluate_point(spec: SweepSpec, index: int) -> dict:
    """Compute one grid row. Failures are recorded in ``status``, never raised."""
    return _evaluate(spec, index, spec.grid()[index])


def _evaluate(spec: SweepSpec, index: int, values: tuple) -> dict:
    t0 = time.perf_counter()
    row = {"index": index}
    row.update({a.name: v for a, v in zip(spec.axes, values)})
    params, n = _point_params(spec, values)
    cutoff = spec.fock_cutoff
    status, message = "ok", ""
    while True:
        space = build_space(n, cutoff)
        try:
            rho = steady_state(build_liouvillian(space, params))
        except (SteadyStateError, ValueError) as exc:
            status, message, rho = "solver-error", str(exc), None
            break
        top = top_fock_population(rho, space)
        if top <= CUTOFF_TOLERANCE:
            break
        if spec.max_fock_cutoff is None or cutoff >= spec.max_fock_cutoff:
            status, message = "cutoff-violation", f"top Fock population {top:.3e}"
            break
        cutoff = min(2 * cutoff, spec.max_fock_cutoff)
    row["fock_cutoff"] = cutoff
    if rho is not None:
        obs, undefined = _observables(rho, space, params, spec.observables)
        row.update(obs)
        if undefined and status == "ok":
            status = "undefined"
    row["status"] = status
    row["message"] = message
    row["wall_time"] = time.perf_counter() - t0
    return row


def _evaluate_chunk(args):
    spec, items = args
    return [_evaluate(spec, i, v) for i, v in items]


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Evaluate every grid point; ``jobs > 1`` distributes points over processes."""
    grid = list(enumerate(spec.grid()))
    if jobs <= 1:
        rows = [_evaluate(spec, i, v) for i, v in grid]
    else:
        size = max(1, math.ceil(len(grid) / (4 * jobs)))
        chunks = [(spec, grid[k:k + size]) for k in range(0, len(grid), size)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = [r for chunk in ex.map(_evaluate_chunk, chunks) for r in chunk]
    rows.sort(key=lambda r: r["index"])
    return SweepResult(spec, rows)


@dataclass(frozen=True)
class PeakResult:
    kappa_star: float
    g2_peak: float
    kappas: np.ndarray
    g2_values: np.ndarray


class NoPeakError(RuntimeError):
    pass


def _g2_or_nan(params, space, kappa):
    try:
        return g2_zero(space, replace(params, kappa=float(kappa)))
    except (SteadyStateError, DarkStateError):
        return math.nan


def find_peak_kappa(params: SystemParams, kappa_range=(1.0, 10.0), points: int = 25,
                    n_emitters: int = 2, fock_cutoff: int = 3) -> PeakResult:
    """Cavity loss rate maximizing the zero-delay collective correlation.

    The maximum over a log-spaced grid is refined with a golden-section
    search in log(kappa) between the two neighbouring grid points.
    """
    lo, hi = kappa_range
    if points < 15:
        raise ValueError("at least 15 grid points are required")
    if not (lo <= params.g and hi >= 10 * params.g):
        raise ValueError("kappa_range must span at least [g, 10 g]")
    space = build_space(n_emitters, fock_cutoff)
    kappas = np.logspace(np.log10(lo), np.log10(hi), points)
    vals = np.array([_g2_or_nan(params, space, k) for k in kappas])
    if np.all(np.isnan(vals)):
        raise NoPeakError("g2(0) is undefined at every grid point")
    i = int(np.nanargmax(vals))
    k_star, g_star = float(kappas[i]), float(vals[i])
    if 0 < i < points - 1 and np.isfinite(vals[i - 1]) and np.isfinite(vals[i + 1]):
        x = np.log(kappas[i - 1:i + 2])
        res = minimize_scalar(lambda u: -_g2_or_nan(params, space, np.exp(u)),
                              bracket=tuple(x), method="golden",
                              options={"xtol": 1e-6})
        if np.isfinite(res.fun) and -res.fun >= g_star:
            k_star, g_star = float(np.exp(res.x)), float(-res.fun)
    return PeakResult(k_star, g_star, kappas, vals)


@dataclass(frozen=True)
class PopulationTable:
    pump: float
    times: np.ndarray
    p_gg: np.ndarray
    p_ee: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    steady: dict

    def rows(self):
        return zip(self.times, self.p_gg, self.p_ee, self.p_plus, self.p_minus)


def population_trajectories(params: SystemParams, pump_list, t_grid, fock_cutoff: int = 5,
                            method: str = "RK45") -> list[PopulationTable]:
    """Dicke populations versus time from |gg,0>, one table per pump rate.

    Each table also carries the steady-state populations as reference limits.
    """
    space = build_space(2, fock_cutoff)
    rho0 = ket_to_dm(basis_state(space, "gg", 0))
    tables = []
    for P in pump_list:
        p = replace(params, pump=float(P))
        L = build_liouvillian(space, p)
        traj = evolve(L, rho0, t_grid, method=method)
        pops = [dicke_populations(r, space) for r in traj.states]
        limit = dicke_populations(steady_state(L), space).as_dict()
        tables.append(PopulationTable(
            float(P), traj.times,
            *(np.array([getattr(q, k) for q in pops]) for k in ("p_gg", "p_ee", "p_plus", "p_minus")),
            steady=limit))
    return tables
