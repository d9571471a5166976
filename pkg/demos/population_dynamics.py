"""Dicke-state populations after switching on the pump, for weak, moderate and strong pumping.

Run: python demos/population_dynamics.py
"""
import numpy as np

from subradiance.liouvillian import SystemParams
from subradiance.sweep import population_trajectories

times = np.linspace(0, 100, 6)
tables = population_trajectories(SystemParams(kappa=3.0, pump=0.1), [0.1, 1.0, 10.0], times,
                                 fock_cutoff=10)

for P, tab in zip([0.1, 1.0, 10.0], tables):
    print(f"\nP = {P} g")
    print(f"{'t g':>6} {'p_gg':>8} {'p_ee':>8} {'p_plus':>8} {'p_minus':>8}")
    for i, t in enumerate(tab.times):
        print(f"{t:6.0f} {tab.p_gg[i]:8.4f} {tab.p_ee[i]:8.4f} {tab.p_plus[i]:8.4f} {tab.p_minus[i]:8.4f}")
