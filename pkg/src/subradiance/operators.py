"""Composite-space operators for N two-level emitters coupled to one cavity mode.

Basis ordering is fixed: emitter 1 ⊗ emitter 2 ⊗ ... ⊗ emitter N ⊗ cavity.
Each emitter is a qubit with |g> = 0 and |e> = 1; the emitter bits form the
most significant part of a basis index and the cavity photon number the least
significant part::

    index = (b_1 b_2 ... b_N)_2 * (n_max + 1) + n

so for N=2, n_max=1 the basis runs |gg,0>, |gg,1>, |ge,0>, |ge,1>, |eg,0>, ...

Operators are returned as ``scipy.sparse.csr_matrix``; density matrices are
dense ``numpy`` arrays. Nothing in this module mutates its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Space",
    "build_space",
    "cavity_annihilation",
    "emitter_lowering",
    "emitter_number",
    "collective_lowering",
    "emitter_basis_index",
    "basis_state",
    "dicke_ket",
    "ket_to_dm",
    "expectation",
    "partial_trace_cavity",
    "top_fock_population",
    "swap_emitters",
    "check_density_matrix",
    "DensityMatrixError",
    "DENSE_DIM_LIMIT",
    "CUTOFF_TOLERANCE",
]

#: Below this Hilbert-space dimension callers may freely densify operators.
DENSE_DIM_LIMIT = 128

#: Population of the highest retained Fock level above which a state is
#: considered truncation-contaminated.
CUTOFF_TOLERANCE = 1e-6

_SIGMA_MINUS = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


class DensityMatrixError(ValueError):
    """A matrix failed the Hermiticity, trace or positivity checks."""


@dataclass(frozen=True)
class Space:
    """Hilbert space of ``n_emitters`` qubits and a cavity truncated at ``fock_cutoff``."""

    n_emitters: int
    fock_cutoff: int

    def __post_init__(self):
        if int(self.n_emitters) != self.n_emitters or self.n_emitters < 1:
            raise ValueError(f"n_emitters must be a positive integer, got {self.n_emitters!r}")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be an integer >= 1, got {self.fock_cutoff!r}")

    @property
    def n_fock(self) -> int:
        return self.fock_cutoff + 1

    @property
    def emitter_dim(self) -> int:
        return 2 ** self.n_emitters

    @property
    def dim(self) -> int:
        return self.emitter_dim * self.n_fock

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * self.n_emitters + (self.n_fock,)


def build_space(n_emitters: int, fock_cutoff: int) -> Space:
    return Space(n_emitters, fock_cutoff)


def _embed(space: Space, factors: dict[int, sp.spmatrix]) -> sp.csr_matrix:
    # factors keyed by tensor slot: 0..N-1 emitters, N cavity
    mats = []
    for slot, d in enumerate(space.dims):
        mats.append(factors.get(slot, sp.identity(d, dtype=complex, format="csr")))
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), mats).tocsr()


def cavity_annihilation(space: Space) -> sp.csr_matrix:
    """Truncated photon lowering operator with <n-1|a|n> = sqrt(n)."""
    n = np.arange(1, space.n_fock)
    a = sp.diags(np.sqrt(n).astype(complex), offsets=1, shape=(space.n_fock, space.n_fock))
    return _embed(space, {space.n_emitters: a.tocsr()})


def _check_emitter_index(space: Space, i: int) -> None:
    if int(i) != i or not 1 <= i <= space.n_emitters:
        raise IndexError(f"emitter index must be in 1..{space.n_emitters}, got {i!r}")


def emitter_lowering(space: Space, i: int) -> sp.csr_matrix:
    """sigma_i^- = |g><e| on emitter ``i`` (1-based), identity elsewhere."""
    _check_emitter_index(space, i)
    return _embed(space, {i - 1: _SIGMA_MINUS})


def emitter_number(space: Space, i: int) -> sp.csr_matrix:
    """Excited-state projector sigma_i^+ sigma_i^- of emitter ``i``."""
    s = emitter_lowering(space, i)
    return (s.getH() @ s).tocsr()


def collective_lowering(space: Space) -> sp.csr_matrix:
    """J = sum_i sigma_i^-."""
    J = emitter_lowering(space, 1)
    for i in range(2, space.n_emitters + 1):
        J = J + emitter_lowering(space, i)
    return J.tocsr()


def emitter_basis_index(bits: str | tuple[int, ...]) -> int:
    """Index of an emitter configuration such as ``"eg"`` or ``(1, 0)`` in the emitter factor."""
    if isinstance(bits, str):
        lookup = {"g": 0, "e": 1, "0": 0, "1": 1}
        try:
            bits = tuple(lookup[c] for c in bits)
        except KeyError:
            raise ValueError(f"emitter labels must be 'g'/'e', got {bits!r}") from None
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    return idx


def basis_state(space: Space, emitters: str | tuple[int, ...], n: int = 0) -> np.ndarray:
    """Ket |emitters, n> as a dense vector."""
    if len(emitters) != space.n_emitters:
        raise ValueError(f"expected {space.n_emitters} emitter labels, got {emitters!r}")
    if not 0 <= n <= space.fock_cutoff:
        raise ValueError(f"photon number {n} outside 0..{space.fock_cutoff}")
    psi = np.zeros(space.dim, dtype=complex)
    psi[emitter_basis_index(emitters) * space.n_fock + n] = 1.0
    return psi


def dicke_ket(space: Space, label: str, n: int = 0) -> np.ndarray:
    """Two-emitter Dicke state ``gg``, ``ee``, ``+`` or ``-`` with ``n`` photons.

    |+-> = (|eg> +- |ge>)/sqrt(2).
    """
    if space.n_emitters != 2:
        raise ValueError("Dicke kets are defined here for two emitters only")
    if label in ("gg", "ee"):
        return basis_state(space, label, n)
    if label not in ("+", "-"):
        raise ValueError(f"unknown Dicke label {label!r}")
    sign = 1.0 if label == "+" else -1.0
    return (basis_state(space, "eg", n) + sign * basis_state(space, "ge", n)) / np.sqrt(2)


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def expectation(rho: np.ndarray, op) -> complex:
    """tr(op @ rho)."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or op.shape != rho.shape:
        raise ValueError(f"dimension mismatch: operator {op.shape} vs state {rho.shape}")
    # tr(X rho) = sum_ij X_ij rho_ji
    if sp.issparse(op):
        op = op.tocoo()
        return complex(np.sum(op.data * rho[op.col, op.row]))
    return complex(np.einsum("ij,ji->", op, rho))


def partial_trace_cavity(rho: np.ndarray, space: Space) -> np.ndarray:
    """Reduced emitter density matrix (2^N x 2^N)."""
    rho = np.asarray(rho)
    if rho.shape != (space.dim, space.dim):
        raise ValueError(f"state shape {rho.shape} does not match space dim {space.dim}")
    m, f = space.emitter_dim, space.n_fock
    return np.einsum("ajbj->ab", rho.reshape(m, f, m, f))


def top_fock_population(rho: np.ndarray, space: Space) -> float:
    """Population in the highest retained photon-number level."""
    rho = np.asarray(rho)
    diag = np.real(np.diagonal(rho)).reshape(space.emitter_dim, space.n_fock)
    return float(diag[:, -1].sum())


def swap_emitters(space: Space, i: int, j: int) -> sp.csr_matrix:
    """Permutation operator exchanging emitters ``i`` and ``j`` (1-based)."""
    _check_emitter_index(space, i)
    _check_emitter_index(space, j)
    N, f = space.n_emitters, space.n_fock
    perm = np.empty(space.dim, dtype=int)
    for idx in range(space.dim):
        e, n = divmod(idx, f)
        bits = [(e >> (N - 1 - k)) & 1 for k in range(N)]
        bits[i - 1], bits[j - 1] = bits[j - 1], bits[i - 1]
        perm[idx] = emitter_basis_index(tuple(bits)) * f + n
    data = np.ones(space.dim, dtype=complex)
    return sp.csr_matrix((data, (perm, np.arange(space.dim))), shape=(space.dim, space.dim))


def check_density_matrix(rho: np.ndarray, *, herm_tol: float = 1e-12, trace_tol: float = 1e-10,
                         eig_tol: float = 1e-8) -> None:
    """Raise :class:`DensityMatrixError` unless ``rho`` is a valid state.

    Hermiticity is checked elementwise, trace against 1, and the smallest
    eigenvalue against ``-eig_tol``.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DensityMatrixError(f"not a square matrix: shape {rho.shape}")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > herm_tol:
        raise DensityMatrixError(f"not Hermitian: max |rho - rho^dag| = {herm_err:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise DensityMatrixError(f"trace {tr:.12g} differs from 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam < -eig_tol:
        raise DensityMatrixError(f"negative eigenvalue {lam:.3e}")
