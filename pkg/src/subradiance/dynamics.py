"""Time evolution and photon correlations.

Two-time correlations use the quantum regression theorem on the
unnormalized conditional state: chi(0) = J rho_ss J^dag is propagated with
the same generator (it is linear, so no renormalization is needed) and

    g2(tau) = tr(J^dag J chi(tau)) / <J^dag J>_ss^2 .

The denominator uses the stationary intensity for both time arguments.

Uncoupled emitters (g = 0) share no optical mode, so their photons are
counted without interference: the detected intensity is the sum of the
individual intensities and

    g2(0) = sum_{i != j} <n_i n_j> / (sum_i <n_i>)^2 ,

which is 1 - 1/N for identical independent emitters. ``g2_zero`` picks this
estimator automatically when g = 0; ``detection`` overrides the choice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from .liouvillian import LiouvillianMap, SystemParams, build_liouvillian, unvec, vec
from .operators import (
    CUTOFF_TOLERANCE,
    Space,
    cavity_annihilation,
    collective_lowering,
    emitter_lowering,
    emitter_number,
    expectation,
    top_fock_population,
)
from .steady import steady_state

__all__ = [
    "RTOL",
    "ATOL",
    "Trajectory",
    "CorrelationCurve",
    "IntegrationError",
    "CutoffError",
    "DarkStateError",
    "evolve",
    "propagate",
    "normalized_g2",
    "g2_zero",
    "g2_tau",
    "g2_cavity_zero",
]

RTOL = 1e-8
ATOL = 1e-10


class IntegrationError(RuntimeError):
    pass


class CutoffError(RuntimeError):
    """The highest retained Fock level carries more population than allowed."""


class DarkStateError(ValueError):
    """The emitted intensity vanishes, so a normalized correlation is undefined."""


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim, dim)

    def __len__(self):
        return len(self.times)

    def expect(self, op) -> np.ndarray:
        return np.array([expectation(r, op) for r in self.states])


@dataclass(frozen=True)
class CorrelationCurve:
    delays: np.ndarray
    values: np.ndarray
    kind: str  # "collective" or "cavity"


def propagate(L: LiouvillianMap, x0: np.ndarray, times, *, method: str = "RK45",
              rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """Integrate x' = L(x) for an arbitrary (not necessarily normalized) matrix.

    Returns an array of shape (len(times), dim, dim). ``times`` must be
    non-decreasing and start at or after 0; the integration starts at 0.

    ``method`` is any :func:`scipy.integrate.solve_ivp` scheme, or ``"expm"``
    for the exact propagator exp(L t) applied between consecutive times
    (dense below 4096 superoperator rows, Krylov-free Taylor action above).
    The exponential has no stiffness limit, which matters for horizons of
    many inverse pump rates.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-decreasing and non-negative")
    d = L.dim
    y0 = vec(np.asarray(x0, dtype=complex))
    t_end = float(times[-1])
    if t_end == 0.0:
        return np.repeat(unvec(y0, d)[None], len(times), axis=0)
    M = L.matrix
    if method == "expm":
        return _propagate_expm(M, y0, times, d)
    kwargs = {}
    if method in ("BDF", "Radau", "LSODA"):
        kwargs["jac"] = M
    sol = solve_ivp(lambda t, y: M @ y, (0.0, t_end), y0, method=method, t_eval=times,
                    rtol=rtol, atol=atol, **kwargs)
    if sol.status != 0:
        raise IntegrationError(f"integration failed: {sol.message}")
    return np.stack([unvec(sol.y[:, k], d) for k in range(sol.y.shape[1])])


def _propagate_expm(M, y0, times, d):
    dense = M.toarray() if M.shape[0] <= 4096 else None
    out, y, t_prev = [], y0, 0.0
    for t in times:
        dt = t - t_prev
        if dt > 0:
            y = la.expm(dense * dt) @ y if dense is not None else expm_multiply(M * dt, y)
        out.append(unvec(y, d))
        t_prev = t
    return np.stack(out)


def evolve(L: LiouvillianMap, rho0: np.ndarray, times, *, method: str = "RK45",
           rtol: float = RTOL, atol: float = ATOL, check_cutoff: bool = True) -> Trajectory:
    """Density matrix at each requested time, starting from ``rho0`` at t = 0.

    The default integrator is the adaptive Dormand-Prince 5(4) pair with
    dense output. Raises :class:`IntegrationError` on step-size failure or
    trace drift above 1e-8, and :class:`CutoffError` when any reported
    state puts more than ``CUTOFF_TOLERANCE`` in the top Fock level.
    """
    times = np.asarray(times, dtype=float)
    if len(times) > 1 and np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    states = propagate(L, rho0, times, method=method, rtol=rtol, atol=atol)
    tr0 = np.trace(rho0)
    drift = np.max(np.abs(np.trace(states, axis1=1, axis2=2) - tr0))
    if drift > 1e-8:
        raise IntegrationError(f"trace drifted by {drift:.3e}")
    if check_cutoff:
        worst = max(top_fock_population(r, L.space) for r in states)
        if worst > CUTOFF_TOLERANCE:
            raise CutoffError(
                f"top Fock level population {worst:.3e} exceeds {CUTOFF_TOLERANCE:g}; "
                "increase fock_cutoff")
    return Trajectory(times, states)


def normalized_g2(rho: np.ndarray, op) -> float:
    """<A^dag A^dag A A> / <A^dag A>^2 on ``rho``."""
    Ad = op.getH()
    n1 = expectation(rho, Ad @ op).real
    if n1 <= 1e-12:
        raise DarkStateError(f"<A^dag A> = {n1:.3e}; correlation is undefined")
    return expectation(rho, Ad @ Ad @ op @ op).real / n1 ** 2


def _detection(params: SystemParams, detection: str) -> str:
    if detection == "auto":
        return "independent" if params.g == 0 else "collective"
    if detection not in ("collective", "independent"):
        raise ValueError(f"unknown detection mode {detection!r}")
    return detection


def _independent_g2(rho: np.ndarray, space: Space) -> float:
    numbers = [emitter_number(space, i) for i in range(1, space.n_emitters + 1)]
    total = sum(expectation(rho, n).real for n in numbers)
    if total <= 1e-12:
        raise DarkStateError(f"sum <n_i> = {total:.3e}; correlation is undefined")
    pairs = sum(expectation(rho, numbers[i] @ numbers[j]).real
                for i in range(len(numbers)) for j in range(len(numbers)) if i != j)
    return pairs / total ** 2


def g2_zero(space: Space, params: SystemParams, rho_ss: np.ndarray | None = None,
            detection: str = "auto") -> float:
    """Zero-delay correlation on the steady state.

    ``detection`` is ``"collective"`` (the J operator), ``"independent"``
    (incoherent sum of emitter intensities) or ``"auto"``, which uses the
    independent form only for uncoupled emitters (g = 0).
    """
    mode = _detection(params, detection)
    if rho_ss is None:
        rho_ss = steady_state(build_liouvillian(space, params))
    if mode == "independent":
        return _independent_g2(rho_ss, space)
    return normalized_g2(rho_ss, collective_lowering(space))


def g2_cavity_zero(space: Space, params: SystemParams, rho_ss: np.ndarray | None = None) -> float:
    """Zero-delay correlation of the cavity field <a^dag a^dag a a>/<a^dag a>^2."""
    if rho_ss is None:
        rho_ss = steady_state(build_liouvillian(space, params))
    a = cavity_annihilation(space)
    n = expectation(rho_ss, a.getH() @ a).real
    if n < 1e-14:
        raise DarkStateError(f"cavity is empty (<a^dag a> = {n:.3e})")
    return expectation(rho_ss, a.getH() @ a.getH() @ a @ a).real / n ** 2


def g2_tau(space: Space, params: SystemParams, delays, *, kind: str = "collective",
           method: str = "RK45", rho_ss: np.ndarray | None = None) -> CorrelationCurve:
    """Normalized second-order correlation at each delay (units of 1/g).

    ``kind`` selects the detected field: ``"collective"`` (J), ``"cavity"``
    (a) or ``"independent"`` (sum of emitter intensities without
    interference, one conditional state per emitter).
    """
    L = build_liouvillian(space, params)
    if rho_ss is None:
        rho_ss = steady_state(L)
    delays = np.asarray(delays, dtype=float)
    if kind == "independent":
        ops = [emitter_lowering(space, i) for i in range(1, space.n_emitters + 1)]
        N = sum(o.getH() @ o for o in ops).tocsr()
    elif kind == "collective":
        ops = [collective_lowering(space)]
    elif kind == "cavity":
        ops = [cavity_annihilation(space)]
    else:
        raise ValueError(f"unknown correlation kind {kind!r}")
    if kind != "independent":
        N = (ops[0].getH() @ ops[0]).tocsr()
    n_ss = expectation(rho_ss, N).real
    if n_ss <= 1e-12:
        raise DarkStateError(f"stationary intensity {n_ss:.3e}; correlation is undefined")
    values = np.zeros(len(delays))
    for A in ops:
        chi0 = A @ (A.conj() @ rho_ss.T).T  # A rho A^dag
        chis = propagate(L, chi0, delays, method=method)
        values += np.array([expectation(c, N).real for c in chis])
    return CorrelationCurve(delays, values / n_ss ** 2, kind)
