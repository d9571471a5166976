"""Coarse steady-state map of g2(0) and the subradiant population versus kappa and pump.

Run: python demos/steady_map.py
"""
import numpy as np

from subradiance.liouvillian import SystemParams
from subradiance.sweep import Axis, SweepSpec, run_sweep

spec = SweepSpec(
    axes=(Axis("kappa", 0.3, 30, 5), Axis("pump", 1e-3, 10, 5)),
    fixed=SystemParams(kappa=1.0, pump=1.0),
    observables=("g2_zero", "p_minus"),
    fock_cutoff=3,
    max_fock_cutoff=12,
)
res = run_sweep(spec)
kappas, pumps = (a.values() for a in spec.axes)

for name in ("g2_zero", "p_minus"):
    grid = res.column(name)
    print(f"\n{name} (rows: kappa/g, columns: P/g)")
    print("        " + "".join(f"{p:>10.0e}" for p in pumps))
    for k, row in zip(kappas, grid):
        print(f"{k:8.2f}" + "".join(f"{v:10.3g}" for v in row))

print("\nstatus counts:", res.status_counts())
