"""Zero-delay bunching versus cavity loss, and the delay dependence at the optimum.

Run: python demos/correlation.py
"""
from dataclasses import replace

import numpy as np

from subradiance.dynamics import g2_cavity_zero, g2_tau, g2_zero
from subradiance.liouvillian import SystemParams
from subradiance.operators import build_space
from subradiance.sweep import find_peak_kappa

weak = SystemParams(kappa=11.7, pump=9e-4)
space = build_space(2, 3)

print(f"g2(0) from the collective operator: {g2_zero(space, weak):.2f}")
print(f"g2(0) from the cavity field:        {g2_cavity_zero(space, weak):.2f}")

peak = find_peak_kappa(weak, (1.0, 10.0), 25)
print(f"\nbunching peaks at kappa = {peak.kappa_star:.2f} g with g2(0) = {peak.g2_peak:.1f}")

for gamma in (0.0, 0.1, 1.0):
    print(f"dephasing {gamma:>4} g: g2(0) = {g2_zero(space, replace(weak, dephasing=gamma)):.3f}")

delays = np.array([0, 0.5, 1, 2, 4, 8])
curve = g2_tau(space, replace(weak, kappa=peak.kappa_star), delays)
print("\ng2(tau) at the optimum")
for d, v in zip(curve.delays, curve.values):
    print(f"  tau g = {d:4.1f}: {v:10.3f}")
