"""
A small phase sweep
===================

Sweep b in a = b eps |ln eps|^2 at two coarse eps values and write the CSV
table plus a gnuplot script for the phase diagram.  The same sweep is
available as ``glnematic sweep``.
"""

import os

from glnematic.minimize import Seed
from glnematic.sweep import SweepSpec, run_sweep, transition_estimate, write_gnuplot, write_sweep_csv

out = "out_sweep"
os.makedirs(out, exist_ok=True)

spec = SweepSpec(
    epsilons=[0.1, 0.07],
    scaling="square_log",
    b_values=[0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0],
    seeds=[Seed.thomas_fermi(), Seed.vortex(), Seed.vortex(degree=-1), Seed.random(1)],
    half_width=None,
)
res = run_sweep(spec, threads=os.cpu_count() or 1)
write_sweep_csv(os.path.join(out, "sweep.csv"), res, spec)
write_gnuplot(os.path.join(out, "phase_diagram.gp"), "sweep.csv", spec)

for r in res.rows:
    print(f"eps {r.epsilon:<5g} b {r.b:<5g} a {r.a:8.4f} gap {r.symmetry_gap:10.3e} {r.phase_label}")

try:
    for eps, t in transition_estimate(res, "ShadowVortex", "StandardVortexCenter").items():
        print(f"shadow -> center near b = {t.b:g} at eps = {eps:g}" + (" (non-monotone)" if t.nonmonotone else ""))
except ValueError as exc:
    print(exc)
