"""Empirical g2(tau) model, coincidence-histogram fitting and unit conversions.

The fitted model is

    g2(tau) = [1 - (1 - A) exp(-|tau|/T_a)] [1 + B exp(-|tau|/T_b)]

with an antibunching dip (amplitude A, time scale T_a) multiplied by a
bunching peak (amplitude B, time scale T_b). Delays are in picoseconds.
Frequencies in the conversion helpers are ordinary frequencies in GHz.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import constants
from scipy.optimize import least_squares
from scipy.special import erfc, erfcx

__all__ = [
    "FitParams",
    "Histogram",
    "FitError",
    "eval_g2_model",
    "normalize_histogram",
    "fit_g2",
    "initial_guess",
    "read_histogram_csv",
    "write_histogram_csv",
    "fit_report",
    "synthetic_histogram",
    "kappa_from_q",
    "derived_coupling",
]

MAX_ITER = 200
STEP_TOL = 1e-10
# an e-fold change of a parameter moving no bin by more than this leaves it undetermined
_SENSITIVITY_FLOOR = 1e-3
_MIN_BUNCHING = 0.05
_MIN_SCALE_RATIO = 3.0


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class FitParams:
    A: float
    B: float
    T_a: float
    T_b: float
    covariance: np.ndarray | None = None
    n_iterations: int = 0
    converged: bool = True
    identifiable: bool = True
    cost: float = float("nan")

    def __post_init__(self):
        if not (self.T_a > 0 and self.T_b > 0):
            raise ValueError(f"time scales must be positive, got T_a={self.T_a}, T_b={self.T_b}")

    @property
    def g2_zero(self) -> float:
        return self.A * (1.0 + self.B)

    @property
    def values(self) -> np.ndarray:
        return np.array([self.A, self.B, self.T_a, self.T_b])

    @property
    def stderr(self) -> np.ndarray:
        if self.covariance is None:
            return np.full(4, np.nan)
        return np.sqrt(np.diag(self.covariance))


@dataclass(frozen=True)
class Histogram:
    delays: np.ndarray
    counts: np.ndarray
    normalized: bool = False
    normalization_window: float | None = None
    raw_counts: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float)
        c = np.asarray(self.counts, dtype=float)
        if d.ndim != 1 or d.shape != c.shape:
            raise ValueError("delays and counts must be 1-d arrays of equal length")
        if np.any(np.diff(d) <= 0):
            raise ValueError("delays must be strictly increasing")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValueError("counts must be finite and non-negative")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "counts", c)


def _exp_conv(tau, T, sigma):
    """exp(-|tau|/T) convolved with a unit-area Gaussian of width sigma."""
    if not sigma:
        return np.exp(-np.abs(tau) / T)
    out = np.zeros_like(tau, dtype=float)
    for s in (1.0, -1.0):
        t = s * tau
        u = (sigma / T - t / sigma) / np.sqrt(2.0)
        with np.errstate(over="ignore", under="ignore"):
            pos = erfcx(np.maximum(u, 0.0)) * np.exp(-t ** 2 / (2 * sigma ** 2))
            neg = np.exp(sigma ** 2 / (2 * T ** 2) - t / T) * erfc(np.minimum(u, 0.0))
        out += 0.5 * np.where(u >= 0, pos, neg)
    return out


def eval_g2_model(p: FitParams, tau, irf_sigma: float | None = None):
    """Model value at ``tau`` (ps). ``irf_sigma`` convolves with a Gaussian response."""
    tau = np.asarray(tau, dtype=float)
    return _model(np.array([p.A, p.B, p.T_a, p.T_b]), tau, irf_sigma)


def _model(v, tau, irf_sigma=None):
    A, B, Ta, Tb = v
    if not irf_sigma:
        a = np.exp(-np.abs(tau) / Ta)
        b = np.exp(-np.abs(tau) / Tb)
        return (1.0 - (1.0 - A) * a) * (1.0 + B * b)
    Tab = 1.0 / (1.0 / Ta + 1.0 / Tb)
    return (1.0 + B * _exp_conv(tau, Tb, irf_sigma) - (1.0 - A) * _exp_conv(tau, Ta, irf_sigma)
            - (1.0 - A) * B * _exp_conv(tau, Tab, irf_sigma))


def _jacobian(theta, tau, irf_sigma=None):
    """d model / d (A, B, log T_a, log T_b)."""
    A, B, la, lb = theta
    Ta, Tb = np.exp(la), np.exp(lb)
    if irf_sigma:
        J = np.empty((tau.size, 4))
        for k in range(4):
            h = 1e-6 * max(1.0, abs(theta[k]))
            up, dn = theta.copy(), theta.copy()
            up[k] += h
            dn[k] -= h
            J[:, k] = (_model(_unpack(up), tau, irf_sigma) - _model(_unpack(dn), tau, irf_sigma)) / (2 * h)
        return J
    x = np.abs(tau)
    a = np.exp(-x / Ta)
    b = np.exp(-x / Tb)
    dip = 1.0 - (1.0 - A) * a
    peak = 1.0 + B * b
    return np.column_stack([
        a * peak,
        dip * b,
        -(1.0 - A) * a * (x / Ta) * peak,
        dip * B * b * (x / Tb),
    ])


def _unpack(theta):
    return np.array([theta[0], theta[1], np.exp(theta[2]), np.exp(theta[3])])


def normalize_histogram(h: Histogram, tau_norm: float) -> Histogram:
    """Divide by the mean count over bins with |tau| >= ``tau_norm``."""
    mask = np.abs(h.delays) >= tau_norm
    n = int(mask.sum())
    if n == 0:
        raise ValueError(f"no bins with |tau| >= {tau_norm}")
    if n < 20:
        raise ValueError(f"normalization window has {n} bins; at least 20 are required")
    plateau = h.counts[mask].mean()
    if plateau <= 0:
        raise ValueError("plateau mean is zero")
    raw = h.raw_counts if h.raw_counts is not None else (None if h.normalized else h.counts)
    return Histogram(h.delays, h.counts / plateau, True, float(tau_norm), raw)


def initial_guess(h: Histogram) -> FitParams:
    """Starting point read off the shape of a normalized histogram.

    T_b comes from the half width of the central bunching lobe, A from the
    depth of the dip that follows it, B from the central peak height over
    the dip, and T_a from where the dip has recovered by a factor 1/e.
    """
    x = np.abs(h.delays)
    order = np.argsort(x, kind="stable")
    x, y = x[order], h.counts[order]
    k = max(1, min(5, len(y) // 50))
    y0 = float(np.mean(y[:k]))
    # smooth lightly so single noisy bins do not set the dip
    w = max(1, len(y) // 500)
    ys = np.convolve(y, np.ones(w) / w, mode="same") if w > 1 else y
    i_min = int(np.argmin(ys))
    A = float(np.clip(ys[i_min], 1e-3, 1.0))
    span = x[-1] - x[0] if x[-1] > x[0] else 1.0
    if y0 > A * 1.02:
        B = max(y0 / A - 1.0, 1e-3)
        half = A + 0.5 * (y0 - A)
        below = np.nonzero(ys[:max(i_min, 1) + 1] <= half)[0]
        x_half = x[below[0]] if below.size else x[max(i_min, 1)] / 2
        T_b = max(x_half / np.log(2.0), 1e-6 * span, x[1] - x[0] if len(x) > 1 else 1.0)
    else:
        B = 1e-3
        T_b = max(1e-3 * span, 1e-9)
    target = 1.0 - (1.0 - A) / np.e
    after = np.nonzero(ys[i_min:] >= target)[0]
    T_a = x[i_min + after[0]] if after.size else 0.3 * span
    T_a = max(T_a, 3.0 * T_b)
    return FitParams(A, B, float(T_a), float(T_b), converged=False)


def _weights(h: Histogram) -> np.ndarray:
    if h.raw_counts is None:
        return np.ones_like(h.counts)
    raw = np.asarray(h.raw_counts, dtype=float)
    scale = h.counts.sum() / raw.sum() if raw.sum() > 0 else 1.0
    # sigma of a normalized bin is sqrt(raw) scaled into normalized units
    return 1.0 / (np.maximum(raw, 1.0) * scale ** 2)


def _candidate_starts(h: Histogram, sw: np.ndarray, n_grid: int = 16, keep: int = 6) -> list[np.ndarray]:
    """Coarse grid over (T_a, T_b, B) with A solved in closed form at each node.

    With T_a, T_b and B fixed the model is linear in 1 - A, so the best
    A >= 0 follows from one weighted projection. Each (T_a, T_b) node is
    scored by its best B, and the best nodes seed the nonlinear fit. This
    removes any dependence on the ordering of the two time scales.
    """
    x = np.abs(h.delays)
    step = max(1, x.size // 2000)
    xs, ys, w2 = x[::step], h.counts[::step] - 1.0, sw[::step] ** 2
    lo = max(np.min(np.diff(h.delays)), 1e-5 * x.max())
    hi = x.max() / 3.0
    if not hi > lo:
        return []
    grid = np.geomspace(lo, hi, n_grid)
    Bs = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 31)])[:, None]
    scored = []
    for Ta in grid:
        a = np.exp(-xs / Ta)
        for Tb in grid:
            b = np.exp(-xs / Tb)
            u = a * (1.0 + Bs * b)          # y - 1 - B b = -(1 - A) u
            t = ys - Bs * b
            c = -np.sum(w2 * u * t, axis=1) / np.maximum(np.sum(w2 * u * u, axis=1), 1e-300)
            c = np.minimum(c, 1.0)           # A = 1 - c >= 0
            cost = np.sum(w2 * (t + c[:, None] * u) ** 2, axis=1)
            k = int(np.argmin(cost))
            scored.append((float(cost[k]), 1.0 - float(c[k]), float(Bs[k, 0]), Ta, Tb))
    scored.sort(key=lambda t: t[0])
    # keep the best nodes of each time-scale ordering (T_a below, equal to or
    # above T_b) so every basin gets a start; nodes where B = 0 or A = 1
    # make one time scale irrelevant, describe the same curve and count once
    picked, seen = [], set()
    for order in (-1, 0, 1):
        n = 0
        for _, A, B, Ta, Tb in scored:
            key = (None if A >= 1.0 else Ta, None if B == 0.0 else Tb)
            if np.sign(Ta - Tb) != order or key in seen:
                continue
            seen.add(key)
            picked.append(np.array([A, B, np.log(Ta), np.log(Tb)]))
            n += 1
            if n == keep:
                break
    return picked


def fit_g2(h: Histogram, init: FitParams | None = None, irf_sigma: float | None = None,
           max_iter: int = MAX_ITER) -> FitParams:
    """Weighted least-squares fit of the g2 model to a normalized histogram.

    Bounded trust-region least squares (scipy's ``trf``) on
    (A, B, log T_a, log T_b) with A, B >= 0; accepted steps always lower
    the cost. A run stops when the step is below 1e-10 relative to the
    parameters, and fails after ``max_iter`` function evaluations.

    Without ``init`` the fit is started from the shape heuristics of
    :func:`initial_guess` and from the best nodes of a coarse time-scale
    grid, and the lowest-cost converged run is kept. The bound B >= 0
    matters: the model is invariant under A -> 1 + B, B -> A - 1 with the
    two time scales exchanged, and only the sign of B tells the two apart.

    Bins are weighted by Poisson variances when raw counts are attached,
    uniformly otherwise.
    """
    if not h.normalized:
        raise FitError("histogram must be normalized first (see normalize_histogram)")
    tau, y = h.delays, h.counts
    span = float(np.max(np.abs(tau)))
    sw = np.sqrt(_weights(h))
    if init is not None:
        starts = [np.array([init.A, init.B, np.log(init.T_a), np.log(init.T_b)])]
    else:
        p0 = initial_guess(h)
        starts = [np.array([p0.A, p0.B, np.log(p0.T_a), np.log(p0.T_b)])]
        starts += _candidate_starts(h, sw)
    starts = [th for th in starts if span >= 3.0 * np.exp(th[2])]
    if not starts:
        raise FitError("histogram does not extend to 3 T_a; antibunching recovery is not sampled")
    dt = max(np.min(np.diff(tau)), 1e-12) if tau.size > 1 else 1.0
    lower = np.array([0.0, 0.0, np.log(dt / 100.0), np.log(dt / 100.0)])
    upper = np.array([np.inf, np.inf, np.log(100.0 * span), np.log(100.0 * span)])

    def resid(th):
        return sw * (_model(_unpack(th), tau, irf_sigma) - y)

    def jac(th):
        return sw[:, None] * _jacobian(th, tau, irf_sigma)

    best = None
    for th0 in starts:
        th0 = np.clip(th0, lower, upper)
        res = least_squares(resid, th0, jac=jac, bounds=(lower, upper), method="trf",
                            x_scale="jac", xtol=STEP_TOL, ftol=1e-15, gtol=1e-15,
                            max_nfev=max_iter)
        if res.status <= 0:
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise FitError(f"no convergence after {max_iter} iterations")
    return _finish(best.x, tau, sw, best.fun, best.cost, best.nfev,
                   h.raw_counts is not None, irf_sigma)


def _finish(theta, tau, sw, r, cost, n_iter, absolute, irf_sigma):
    vals = _unpack(theta)
    Jraw = _jacobian(theta, tau, irf_sigma)
    sens = np.max(np.abs(Jraw), axis=0)
    free = sens >= _SENSITIVITY_FLOOR
    J = sw[:, None] * Jraw
    cov_theta = np.full((4, 4), np.inf)
    # a weak bunching term or time scales within a factor 3 of each other
    # trade off against one another even when the matrix is formally regular
    ratio = max(vals[2], vals[3]) / min(vals[2], vals[3])
    identifiable = bool(free.all()) and vals[1] > _MIN_BUNCHING and ratio > _MIN_SCALE_RATIO
    if free.any():
        Jf = J[:, free]
        JtJ = Jf.T @ Jf
        scale = np.sqrt(np.diag(JtJ))
        Jn = JtJ / np.outer(scale, scale)
        if np.linalg.cond(Jn) > 1e12:
            identifiable = False
        dof = max(len(r) - int(free.sum()), 1)
        s2 = 1.0 if absolute else 2.0 * cost / dof
        sub = s2 * np.linalg.pinv(JtJ, rcond=1e-14)
        idx = np.nonzero(free)[0]
        cov_theta[np.ix_(idx, idx)] = sub
    # map the log-time rows to T_a, T_b
    jac = np.array([1.0, 1.0, vals[2], vals[3]])
    with np.errstate(invalid="ignore"):
        cov = cov_theta * np.outer(jac, jac)
    return FitParams(float(vals[0]), float(vals[1]), float(vals[2]), float(vals[3]),
                     covariance=cov, n_iterations=n_iter, converged=True,
                     identifiable=identifiable, cost=float(cost))


def synthetic_histogram(p: FitParams, delays, plateau: float = 1.0, rng=None,
                        irf_sigma: float | None = None) -> Histogram:
    """Histogram drawn from the model: ``plateau`` times the model, Poisson-noised if ``rng`` is given."""
    delays = np.asarray(delays, dtype=float)
    mean = plateau * eval_g2_model(p, delays, irf_sigma)
    counts = rng.poisson(mean).astype(float) if rng is not None else mean
    return Histogram(delays, counts)


def read_histogram_csv(path) -> Histogram:
    """Two-column CSV (delay_ps, counts); '#' comment lines and one header row allowed."""
    delays, counts = [], []
    with open(path, newline="") as f:
        for row in csv.reader(line for line in f if not line.lstrip().startswith("#")):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise ValueError(f"expected two columns, got {row!r}")
            try:
                d, c = float(row[0]), float(row[1])
            except ValueError:
                if delays:
                    raise ValueError(f"bad histogram row {row!r}") from None
                continue  # header
            delays.append(d)
            counts.append(c)
    return Histogram(np.array(delays), np.array(counts))


def write_histogram_csv(h: Histogram, path, comment: str | None = None) -> None:
    with open(path, "w", newline="") as f:
        if comment:
            for line in comment.splitlines():
                f.write(f"# {line}\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["delay_ps", "counts"])
        for d, c in zip(h.delays, h.counts):
            w.writerow([repr(float(d)), repr(float(c))])


def fit_report(p: FitParams, h: Histogram | None = None) -> dict:
    """JSON-serializable summary of a fit.

    ``g2_zero`` is the model value A(1+B); ``g2_zero_raw_bin`` is the
    normalized count of the bin closest to zero delay, when a histogram is given.
    """
    cov = p.covariance if p.covariance is not None else np.full((4, 4), np.nan)
    out = {
        "A": float(p.A),
        "B": float(p.B),
        "T_a_ps": float(p.T_a),
        "T_b_ps": float(p.T_b),
        "g2_zero": float(p.g2_zero),
        "covariance": [[_json_float(v) for v in row] for row in cov],
        "n_iterations": int(p.n_iterations),
        "converged": bool(p.converged),
        "identifiable": bool(p.identifiable),
    }
    if h is not None:
        out["g2_zero_raw_bin"] = float(h.counts[np.argmin(np.abs(h.delays))])
    return out


def _json_float(v):
    v = float(v)
    if np.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


def kappa_from_q(q: float, wavelength_nm: float) -> float:
    """Cavity loss rate kappa = c / (lambda Q) in GHz (ordinary frequency)."""
    if not (q > 0 and wavelength_nm > 0):
        raise ValueError("Q and wavelength must be positive")
    return constants.c / (wavelength_nm * 1e-9) / q / 1e9


def derived_coupling(kappa_ghz: float, t_b_ps: float) -> float:
    """Coupling g in GHz from the bunching time, using Gamma = 1/T_b = 4 g^2 / kappa."""
    if not (kappa_ghz > 0 and t_b_ps > 0):
        raise ValueError("kappa and T_b must be positive")
    gamma_ghz = 1e3 / t_b_ps
    return float(np.sqrt(gamma_ghz * kappa_ghz / 4.0))
