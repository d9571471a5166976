"""Stationary states of the Lindblad generator."""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .liouvillian import LiouvillianMap, unvec, vec
from .operators import DensityMatrixError, check_density_matrix

__all__ = [
    "SteadyStateError",
    "NoUniqueSteadyStateError",
    "MultipleSteadyStatesError",
    "steady_state",
    "steady_state_by_evolution",
    "smallest_singular_values",
]


class SteadyStateError(RuntimeError):
    """The stationary state could not be computed or failed verification."""


class NoUniqueSteadyStateError(SteadyStateError):
    pass


class MultipleSteadyStatesError(SteadyStateError):
    def __init__(self, sigma0: float, sigma1: float):
        self.sigma0, self.sigma1 = sigma0, sigma1
        super().__init__(
            f"steady state is not unique: two smallest singular values "
            f"{sigma0:.3e} and {sigma1:.3e}")


def smallest_singular_values(L: LiouvillianMap, k: int = 2) -> np.ndarray:
    """The ``k`` smallest singular values of the superoperator, ascending."""
    M = L.matrix
    if M.shape[0] <= 4096:
        return la.svdvals(M.toarray())[::-1][:k]
    # eigenvalues of M^dag M near zero via shift-invert slightly below the spectrum
    MhM = (M.getH() @ M).tocsc()
    vals = spla.eigsh(MhM, k=k, sigma=-1e-10, which="LM", return_eigenvectors=False)
    return np.sqrt(np.clip(np.sort(vals.real), 0, None))


def _degeneracy_error(L: LiouvillianMap) -> SteadyStateError:
    s0, s1 = smallest_singular_values(L, 2)
    if s1 - s0 <= 1e-8:
        return MultipleSteadyStatesError(float(s0), float(s1))
    return SteadyStateError(f"steady-state solve failed (smallest singular values {s0:.3e}, {s1:.3e})")


def steady_state(L: LiouvillianMap, *, verify: bool = True) -> np.ndarray:
    """Solve L(rho) = 0 with tr(rho) = 1.

    The first row of the vectorized system (the equation for rho_00) is
    replaced by the trace condition and the sparse system is factorized
    directly. The result is checked afterwards: residual
    ``||L(rho)||_1 <= 1e-10 * dim``, Hermiticity, unit trace and smallest
    eigenvalue ``>= -1e-8``. Negative eigenvalues are reported, never clipped.
    """
    if not L.params.is_dissipative:
        raise NoUniqueSteadyStateError(
            "all dissipative rates are zero; there is no unique steady state")
    d = L.dim
    M = L.matrix.tolil()
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[np.arange(d) * (d + 1)] = 1.0
    M[0, :] = trace_row
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.spsolve(M.tocsc(), rhs)
        except (spla.MatrixRankWarning, RuntimeError) as exc:
            raise _degeneracy_error(L) from exc
    if not np.all(np.isfinite(x)):
        raise _degeneracy_error(L)
    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    if verify:
        residual = np.abs(L.matrix @ vec(rho)).sum()
        if residual > 1e-10 * d:
            raise _degeneracy_error(L)
        try:
            check_density_matrix(rho)
        except DensityMatrixError as exc:
            raise SteadyStateError(f"steady state failed validation: {exc}") from exc
    return rho


def steady_state_by_evolution(L: LiouvillianMap, t_final: float, rho0: np.ndarray,
                              method: str = "expm", **kwargs) -> np.ndarray:
    """State reached after propagating ``rho0`` for ``t_final``.

    Used as an independent check on :func:`steady_state`. The default is the
    exact propagator exp(L t): relaxation at weak pumping is orders of
    magnitude slower than the cavity decay, which makes explicit
    Runge-Kutta stepping over the full horizon impractically long. Any
    ``evolve`` method may be passed instead.
    """
    from .dynamics import evolve

    if not t_final > 0:
        raise ValueError("t_final must be positive")
    traj = evolve(L, rho0, [0.0, t_final], method=method, check_cutoff=False, **kwargs)
    return traj.states[-1]
