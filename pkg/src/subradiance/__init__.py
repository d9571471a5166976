"""Steady states, dynamics and photon correlations of N incoherently pumped
two-level emitters coupled to a lossy cavity mode, plus fitting of measured
g2(tau) histograms."""
from .dynamics import (
    CorrelationCurve,
    CutoffError,
    DarkStateError,
    IntegrationError,
    Trajectory,
    evolve,
    g2_cavity_zero,
    g2_tau,
    g2_zero,
    normalized_g2,
)
from .fitting import (
    FitError,
    FitParams,
    Histogram,
    derived_coupling,
    eval_g2_model,
    fit_g2,
    kappa_from_q,
    normalize_histogram,
)
from .liouvillian import LiouvillianMap, SystemParams, build_liouvillian, dissipator, hamiltonian
from .observables import (
    DickePopulations,
    UndefinedObservable,
    UnsupportedEmitterCount,
    cooperativity,
    dicke_populations,
    population_contrast,
)
from .operators import (
    Space,
    build_space,
    cavity_annihilation,
    collective_lowering,
    emitter_lowering,
    expectation,
    partial_trace_cavity,
    top_fock_population,
)
from .steady import (
    MultipleSteadyStatesError,
    NoUniqueSteadyStateError,
    SteadyStateError,
    steady_state,
    steady_state_by_evolution,
)
from .sweep import Axis, SweepResult, SweepSpec, find_peak_kappa, population_trajectories, run_sweep

__version__ = "0.1.0"
