"""Dicke-state populations and the cooperativity parameter."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    Space,
    collective_lowering,
    emitter_number,
    expectation,
    partial_trace_cavity,
)

__all__ = [
    "DickePopulations",
    "UnsupportedEmitterCount",
    "UndefinedObservable",
    "dicke_populations",
    "population_contrast",
    "cooperativity",
]

_R2 = 1 / np.sqrt(2)
# emitter-factor vectors in the |gg>, |ge>, |eg>, |ee> basis
_DICKE = {
    "gg": np.array([1, 0, 0, 0], dtype=complex),
    "ee": np.array([0, 0, 0, 1], dtype=complex),
    "plus": np.array([0, _R2, _R2, 0], dtype=complex),
    "minus": np.array([0, -_R2, _R2, 0], dtype=complex),
}


class UnsupportedEmitterCount(ValueError):
    pass


class UndefinedObservable(ValueError):
    """A ratio observable has a vanishing denominator."""


@dataclass(frozen=True)
class DickePopulations:
    p_gg: float
    p_ee: float
    p_plus: float
    p_minus: float

    @property
    def residual(self) -> float:
        return 1.0 - (self.p_gg + self.p_ee + self.p_plus + self.p_minus)

    def as_dict(self) -> dict[str, float]:
        return {"p_gg": self.p_gg, "p_ee": self.p_ee, "p_plus": self.p_plus,
                "p_minus": self.p_minus}


def dicke_populations(rho: np.ndarray, space: Space) -> DickePopulations:
    """Populations of |gg>, |ee>, |+> and |-> after tracing out the cavity.

    Only two emitters are supported. An imaginary part above 1e-10 in any
    projector expectation is treated as an error.
    """
    if space.n_emitters != 2:
        raise UnsupportedEmitterCount(
            f"Dicke populations are defined for 2 emitters, got {space.n_emitters}")
    red = partial_trace_cavity(rho, space)
    out = {}
    for name, v in _DICKE.items():
        p = complex(v.conj() @ red @ v)
        if abs(p.imag) > 1e-10:
            raise ValueError(f"population of {name} has imaginary part {p.imag:.3e}")
        out[name] = p.real
    return DickePopulations(out["gg"], out["ee"], out["plus"], out["minus"])


def population_contrast(p: DickePopulations) -> float:
    """(p_plus - p_minus) / p_plus; negative when the subradiant state dominates."""
    if p.p_plus <= 1e-14:
        raise UndefinedObservable(f"p_plus = {p.p_plus:.3e}; contrast is undefined")
    return (p.p_plus - p.p_minus) / p.p_plus


def cooperativity(rho: np.ndarray, space: Space) -> float:
    """C = (<J^dag J> - sum_i <s_i^+ s_i^->) / <J^dag J>."""
    J = collective_lowering(space)
    collective = expectation(rho, J.getH() @ J).real
    if collective <= 1e-12:
        raise UndefinedObservable(f"<J^dag J> = {collective:.3e}; cooperativity is undefined")
    individual = sum(expectation(rho, emitter_number(space, i)).real
                     for i in range(1, space.n_emitters + 1))
    return (collective - individual) / collective
