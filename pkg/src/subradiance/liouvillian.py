"""Tavis-Cummings Hamiltonian and the Lindblad generator built on it.

All rates are dimensionless, measured in units of the reference coupling
(``g = 1`` by convention). The generator is

    L(rho) = -i[H, rho] + kappa D[a] + sum_i (P D[s_i^+] + gamma D[z_i] + Gamma_r D[s_i^-])

with D[A] rho = A rho A^dag - (A^dag A rho + rho A^dag A)/2 and z_i = s_i^+ s_i^-.
Because z_i is a projector, pure dephasing damps an emitter coherence at rate
gamma/2 (not 2 gamma as in the sigma_z convention).

Superoperators act on column-stacked density matrices:
vec(A rho B) = (B^T kron A) vec(rho), i.e. ``vec(rho) = rho.ravel(order="F")``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .operators import (
    Space,
    cavity_annihilation,
    emitter_lowering,
    emitter_number,
)

__all__ = [
    "SystemParams",
    "LiouvillianMap",
    "hamiltonian",
    "dissipator",
    "dissipator_superop",
    "build_liouvillian",
    "vec",
    "unvec",
]


@dataclass(frozen=True)
class SystemParams:
    """Model rates in units of the reference coupling.

    ``detunings`` may be left as ``None`` for resonant emitters; otherwise
    it must have one entry per emitter.
    """

    kappa: float
    pump: float
    dephasing: float = 0.0
    gamma_r: float = 0.0
    g: float = 1.0
    detunings: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in ("kappa", "pump", "dephasing", "gamma_r", "g"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a finite non-negative rate, got {v!r}")
        if self.detunings is not None:
            object.__setattr__(self, "detunings", tuple(float(d) for d in self.detunings))

    def detuning_list(self, n_emitters: int) -> tuple[float, ...]:
        if self.detunings is None:
            return (0.0,) * n_emitters
        if len(self.detunings) != n_emitters:
            raise ValueError(
                f"got {len(self.detunings)} detunings for {n_emitters} emitters")
        return self.detunings

    def scaled(self, s: float) -> "SystemParams":
        """All rates (including g and detunings) multiplied by ``s``."""
        det = None if self.detunings is None else tuple(s * d for d in self.detunings)
        return replace(self, kappa=s * self.kappa, pump=s * self.pump,
                       dephasing=s * self.dephasing, gamma_r=s * self.gamma_r,
                       g=s * self.g, detunings=det)

    @property
    def is_dissipative(self) -> bool:
        return any(r > 0 for r in (self.kappa, self.pump, self.dephasing, self.gamma_r))


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).ravel(order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def hamiltonian(space: Space, params: SystemParams) -> sp.csr_matrix:
    """H = sum_i [delta_i s_i^+ s_i^- + g (s_i^+ a + s_i^- a^dag)]."""
    deltas = params.detuning_list(space.n_emitters)
    a = cavity_annihilation(space)
    H = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for i, delta in enumerate(deltas, start=1):
        s = emitter_lowering(space, i)
        if delta != 0.0:
            H = H + delta * emitter_number(space, i)
        H = H + params.g * (s.getH() @ a + s @ a.getH())
    return H.tocsr()


def dissipator(A, rho: np.ndarray) -> np.ndarray:
    """D[A] rho = A rho A^dag - (A^dag A rho + rho A^dag A)/2."""
    rho = np.asarray(rho)
    if A.shape != rho.shape:
        raise ValueError(f"dimension mismatch: operator {A.shape} vs state {rho.shape}")
    Ad = A.conj().T
    return _dissipator(A, Ad, Ad @ A, rho)


def _dissipator(A, Ad, AdA, rho):
    # rho @ X for sparse X computed as (X^T @ rho^T)^T to stay on sparse @ dense
    return A @ _right(rho, Ad) - 0.5 * (AdA @ rho + _right(rho, AdA))


def _right(rho, X):
    """rho @ X with X possibly sparse."""
    if sp.issparse(X):
        return (X.T @ rho.T).T
    return rho @ X


def dissipator_superop(A) -> sp.csr_matrix:
    A = sp.csr_matrix(A)
    d = A.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    AdA = (A.getH() @ A).tocsr()
    return (sp.kron(A.conj(), A) - 0.5 * sp.kron(eye, AdA) - 0.5 * sp.kron(AdA.T, eye)).tocsr()


@dataclass
class LiouvillianMap:
    """Linear map rho -> L(rho) for one parameter point.

    ``apply`` works directly on density matrices; ``matrix`` is the sparse
    superoperator on column-stacked states, built on first access.
    """

    space: Space
    params: SystemParams
    H: sp.csr_matrix
    jump_ops: list[tuple[float, sp.csr_matrix]] = field(default_factory=list)

    def __post_init__(self):
        self._cached = [(r, A, A.getH().tocsr(), (A.getH() @ A).tocsr()) for r, A in self.jump_ops]

    @property
    def dim(self) -> int:
        return self.space.dim

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"state shape {rho.shape} does not match dim {self.dim}")
        out = -1j * (self.H @ rho - _right(rho, self.H))
        for rate, A, Ad, AdA in self._cached:
            out = out + rate * _dissipator(A, Ad, AdA, rho)
        return out

    __call__ = apply

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        d = self.dim
        eye = sp.identity(d, dtype=complex, format="csr")
        M = -1j * (sp.kron(eye, self.H) - sp.kron(self.H.T, eye))
        for rate, A in self.jump_ops:
            M = M + rate * dissipator_superop(A)
        M = M.tocsr()
        M.eliminate_zeros()
        return M


def build_liouvillian(space: Space, params: SystemParams) -> LiouvillianMap:
    """Generator for ``params`` on ``space``; zero-rate channels are omitted."""
    if space.fock_cutoff < 1:
        raise ValueError("fock_cutoff must be >= 1")
    H = hamiltonian(space, params)
    jumps: list[tuple[float, sp.csr_matrix]] = []
    if params.kappa > 0:
        jumps.append((params.kappa, cavity_annihilation(space)))
    for i in range(1, space.n_emitters + 1):
        s = emitter_lowering(space, i)
        if params.pump > 0:
            jumps.append((params.pump, s.getH().tocsr()))
        if params.dephasing > 0:
            jumps.append((params.dephasing, emitter_number(space, i)))
        if params.gamma_r > 0:
            jumps.append((params.gamma_r, s))
    return LiouvillianMap(space, params, H, jumps)
